#include "mrtf/core/matrix.hpp"

#include <cmath>
#include <string>

#include "mrtf/core/error.hpp"

namespace mrtf {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (data_.size() != rows * cols) {
    throw DimensionError("matrix storage size", rows * cols, data_.size());
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("ragged matrix literal", cols_, r.size());
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix gather_rows(const Matrix& src, std::span<const std::size_t> indices) {
  Matrix out(indices.size(), src.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= src.rows()) throw DimensionError("row index out of range", src.rows(), indices[i]);
    auto from = src.row(indices[i]);
    std::copy(from.begin(), from.end(), out.row(i).begin());
  }
  return out;
}

void require_finite(const Matrix& m, const char* what) {
  for (double v : m.values()) {
    if (!std::isfinite(v)) throw ValueError(std::string(what) + ": non-finite entry");
  }
}

void require_row_stochastic(const Matrix& m, double tol, const char* what) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double sum = 0.0;
    for (double v : m.row(i)) {
      if (!(v >= -tol && v <= 1.0 + tol)) {
        throw ValueError(std::string(what) + ": row " + std::to_string(i) + " has entry outside [0,1]");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol) {
      throw ValueError(std::string(what) + ": row " + std::to_string(i) + " sums to " + std::to_string(sum));
    }
  }
}

}  // namespace mrtf
