#include "mrtf/diag/metrics.hpp"

#include <algorithm>
#include <vector>

#include "mrtf/core/error.hpp"

namespace mrtf::diag {

namespace {

void check_same_arch(const nn::ParamVector& a, const nn::ParamVector& b) {
  if (!(a.arch() == b.arch())) throw ValueError("models have different architectures");
}

// Summing in sorted order makes the result independent of term order.
double sorted_sum(std::vector<double> terms) {
  std::sort(terms.begin(), terms.end());
  double acc = 0.0;
  for (double t : terms) acc += t;
  return acc;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  std::vector<double> terms(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    terms[i] = d * d;
  }
  return sorted_sum(std::move(terms));
}

}  // namespace

std::size_t argmax(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < row.size(); ++c) {
    if (row[c] > row[best]) best = c;
  }
  return best;
}

double argmax_accuracy(const Matrix& scores, std::span<const int> labels) {
  if (labels.empty()) throw ValueError("accuracy of an empty set");
  if (scores.rows() != labels.size()) throw DimensionError("score rows", labels.size(), scores.rows());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (static_cast<int>(argmax(scores.row(i))) == labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double accuracy(const nn::ParamVector& params, const Matrix& inputs, std::span<const int> labels) {
  if (labels.empty()) throw ValueError("accuracy of an empty set");
  return argmax_accuracy(nn::forward_logits(params, inputs), labels);
}

double pool_accuracy(const nn::ParamVector& params, const data::UnlabeledPool& pool) {
  return accuracy(params, pool.features(), EvalAccess::labels(pool));
}

double targets_accuracy(const Matrix& targets, const data::UnlabeledPool& pool) {
  return argmax_accuracy(targets, EvalAccess::labels(pool));
}

double gradient_variance(std::span<const nn::ParamVector> locals, const nn::ParamVector& aggregated) {
  if (locals.empty()) throw ValueError("gradient_variance: no local models");
  std::vector<double> terms;
  terms.reserve(locals.size());
  for (const auto& m : locals) {
    check_same_arch(m, aggregated);
    terms.push_back(squared_distance(m.values(), aggregated.values()));
  }
  return sorted_sum(std::move(terms)) / static_cast<double>(locals.size());
}

double weight_divergence(const nn::ParamVector& aggregated, const nn::ParamVector& centralized) {
  check_same_arch(aggregated, centralized);
  const double denom = squared_distance(centralized.values(), std::vector<double>(centralized.size(), 0.0));
  if (!(denom > 0.0)) throw ValueError("weight_divergence: centralized model has zero norm");
  return squared_distance(aggregated.values(), centralized.values()) / denom;
}

}  // namespace mrtf::diag
