#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "otmarl/errors.hpp"

namespace otmarl {

/// Dense row-major matrix of doubles. Small by design: the solvers only need
/// shape-checked storage with contiguous rows.
class Matrix {
 public:
  Matrix() = default;

  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return Matrix();
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != m.cols_)
        throw DimensionMismatch("matrix rows have unequal lengths");
      std::copy(rows[i].begin(), rows[i].end(), m.row(i));
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  double max_entry() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, v);
    return m;
  }

  double sum() const {
    double s = 0.0;
    for (double v : data_) s += v;
    return s;
  }

  std::vector<double> row_sums() const {
    std::vector<double> out(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
      const double* r = row(i);
      double s = 0.0;
      for (std::size_t j = 0; j < cols_; ++j) s += r[j];
      out[i] = s;
    }
    return out;
  }

  std::vector<double> col_sums() const {
    std::vector<double> out(cols_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
      const double* r = row(i);
      for (std::size_t j = 0; j < cols_; ++j) out[j] += r[j];
    }
    return out;
  }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// ===== Small numeric helpers =====

inline double logsumexp(const std::vector<double>& xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

/// Numerically safe softmax of a logit vector.
inline std::vector<double> softmax(const std::vector<double>& logits) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  double m = *std::max_element(logits.begin(), logits.end());
  double s = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    s += out[i];
  }
  for (double& v : out) v /= s;
  return out;
}

/// Pulls a gradient on probabilities back to a gradient on logits through the
/// softmax Jacobian: (J^T v)_k = p_k * (v_k - <v, p>).
inline std::vector<double> softmax_pullback(const std::vector<double>& probs,
                                            const std::vector<double>& grad_probs) {
  if (probs.size() != grad_probs.size())
    throw DimensionMismatch("softmax_pullback: size mismatch");
  double inner = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) inner += probs[i] * grad_probs[i];
  std::vector<double> out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i)
    out[i] = probs[i] * (grad_probs[i] - inner);
  return out;
}

/// Row-wise softmax of a logit table.
inline Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  std::vector<double> row(logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    for (std::size_t c = 0; c < logits.cols(); ++c) row[c] = logits(r, c);
    auto probs = softmax(row);
    for (std::size_t c = 0; c < logits.cols(); ++c) out(r, c) = probs[c];
  }
  return out;
}

/// Median of a copy of xs. Even-sized inputs return the mean of the two
/// middle order statistics.
inline double median(std::vector<double> xs) {
  if (xs.empty()) throw InvalidArgument("median of an empty sample");
  std::sort(xs.begin(), xs.end());
  std::size_t n = xs.size();
  if (n % 2 == 1) return xs[n / 2];
  return 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace otmarl
