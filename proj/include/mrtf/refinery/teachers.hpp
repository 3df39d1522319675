#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "mrtf/core/matrix.hpp"

// Distillation-target construction: stabilized teachers (per-model logit
// standardization), logit and probability averaging, per-sample entropy weights
// and the rectified blend of local and global teachers.

namespace mrtf::refinery {

enum class TargetSource { avg_logi, avg_prob, rectified, refined };

std::string_view source_name(TargetSource source);

/// M x C row-stochastic distillation targets over the server pool.
struct TeacherTargets {
  Matrix probs;
  TargetSource source = TargetSource::avg_prob;
};

/// Standardized logits are snapped to multiples of this before the softmax.
/// Rescaling raw logits by any c > 0 changes the standardized values only by a few
/// ulps; snapping removes that residue, which makes stabilized teachers exactly
/// invariant to logit magnitude in floating point.
inline constexpr double kStandardizedGrid = 0x1p-20;

/// Below this pooled standard deviation the logits are treated as constant.
inline constexpr double kMinLogitStd = 1e-12;

/// Population standard deviation over every entry of the matrix.
double pooled_std(const Matrix& logits);

/// tau * logits / pooled_std(logits), unsnapped. Its pooled std is tau.
/// Returns an all-zero matrix when the logits are constant.
Matrix standardize_logits(const Matrix& logits, double tau);

struct NormalizedTeacher {
  Matrix probs;
  /// Set when the logits were constant and the rows fell back to uniform.
  bool degenerate = false;
};

/// Stabilized teacher: softmax(snap(tau * f / std(f))), std taken over the whole pool.
NormalizedTeacher normalize_logits(const Matrix& logits, double tau);

/// softmax(sum_k w_k f_k), row-wise.
TeacherTargets avg_logi(std::span<const Matrix> logits, std::span<const double> weights);

/// sum_k w_k q_k.
TeacherTargets avg_prob(std::span<const Matrix> probs, std::span<const double> weights);

/// Row-wise Shannon entropy in nats.
std::vector<double> row_entropy(const Matrix& probs);

/// Per-sample softmax over clients of negated prediction entropies.
/// Result is clients x M; each column sums to 1.
Matrix entropy_weights(std::span<const Matrix> probs);

/// 0.25 + 0.75 * mean(min(L_k, ln C)) / ln C, so the result lies in [0.25, 1].
double compute_ut(std::span<const double> local_losses, std::size_t num_classes);

/// Teacher predictions for one round, all over the same pool.
struct TeacherSet {
  std::vector<Matrix> local_probs;
  Matrix global_before;
  Matrix global_after;
};

/// u_t * (entropy-weighted local mixture) + (1 - u_t)/2 * (q_g(before) + q_g(after)).
TeacherTargets rectified_targets(const TeacherSet& teachers, double u_t);

/// Throws ValueError unless `probs` is row-stochastic within 1e-6.
void check_targets(const Matrix& probs, const char* what);

}  // namespace mrtf::refinery
