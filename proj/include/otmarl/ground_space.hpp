#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "otmarl/errors.hpp"
#include "otmarl/matrix.hpp"

namespace otmarl {

/// Finite set of support points together with a pairwise ground cost.
/// The cost matrix must be square, nonnegative, and zero on the diagonal.
/// When is_metric is set, symmetry and the triangle inequality are validated
/// on construction (within 1e-12); construction fails loudly otherwise.
class GroundSpace {
 public:
  static constexpr double kMetricTolerance = 1e-12;

  static std::shared_ptr<const GroundSpace> from_cost(std::vector<std::string> labels,
                                                      Matrix cost, bool is_metric) {
    return std::shared_ptr<const GroundSpace>(
        new GroundSpace(std::move(labels), std::move(cost), is_metric));
  }

  /// Convenience: points labelled "p0".."p{n-1}".
  static std::shared_ptr<const GroundSpace> from_cost(Matrix cost, bool is_metric) {
    std::vector<std::string> labels(cost.rows());
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = "p" + std::to_string(i);
    return from_cost(std::move(labels), std::move(cost), is_metric);
  }

  enum class PlaneMetric { kManhattan, kEuclidean };

  /// Ground space over planar points under a standard metric. The result is
  /// marked (and checked) as a metric unless validate is turned off, in which
  /// case is_metric is still set: both metrics satisfy the axioms by
  /// construction and large instances cannot afford the cubic check.
  static std::shared_ptr<const GroundSpace> from_plane_points(
      const std::vector<std::array<double, 2>>& pts, PlaneMetric metric,
      bool validate = true) {
    const std::size_t n = pts.size();
    Matrix cost(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        double dx = pts[i][0] - pts[j][0];
        double dy = pts[i][1] - pts[j][1];
        double d = metric == PlaneMetric::kManhattan
                       ? std::abs(dx) + std::abs(dy)
                       : std::sqrt(dx * dx + dy * dy);
        cost(i, j) = d;
        cost(j, i) = d;
      }
    }
    std::vector<std::string> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = "(" + std::to_string(pts[i][0]) + "," + std::to_string(pts[i][1]) + ")";
    }
    if (validate) return from_cost(std::move(labels), std::move(cost), true);
    auto g = std::shared_ptr<GroundSpace>(new GroundSpace());
    g->labels_ = std::move(labels);
    g->cost_ = std::move(cost);
    g->is_metric_ = true;
    g->validate_basic();
    return g;
  }

  /// For costs that are metrics by construction (sums and closures of known
  /// metrics) where the instance is too large for the cubic triangle check:
  /// marks the result as a metric after basic validation only. Callers own
  /// the claim.
  static std::shared_ptr<const GroundSpace> from_cost_trusted_metric(
      std::vector<std::string> labels, Matrix cost) {
    auto g = std::shared_ptr<GroundSpace>(new GroundSpace());
    g->labels_ = std::move(labels);
    g->cost_ = std::move(cost);
    g->is_metric_ = true;
    g->validate_basic();
    return g;
  }

  /// Points on a line; cost is absolute coordinate difference.
  static std::shared_ptr<const GroundSpace> from_line(const std::vector<double>& xs) {
    const std::size_t n = xs.size();
    Matrix cost(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) cost(i, j) = std::abs(xs[i] - xs[j]);
    std::vector<std::string> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = "x" + std::to_string(i);
    return from_cost(std::move(labels), std::move(cost), true);
  }

  std::size_t point_count() const { return cost_.rows(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const Matrix& cost() const { return cost_; }
  double cost_at(std::size_t i, std::size_t j) const { return cost_(i, j); }
  bool is_metric() const { return is_metric_; }

 private:
  GroundSpace() = default;

  GroundSpace(std::vector<std::string> labels, Matrix cost, bool is_metric)
      : labels_(std::move(labels)), cost_(std::move(cost)), is_metric_(is_metric) {
    validate_basic();
    if (is_metric_) validate_metric();
  }

  void validate_basic() const {
    if (cost_.rows() == 0) throw InvalidArgument("ground space needs at least one point");
    if (cost_.rows() != cost_.cols())
      throw DimensionMismatch("ground cost matrix must be square");
    if (!labels_.empty() && labels_.size() != cost_.rows())
      throw DimensionMismatch("ground labels and cost matrix disagree on point count");
    for (std::size_t i = 0; i < cost_.rows(); ++i) {
      if (cost_(i, i) != 0.0)
        throw InvalidArgument("ground cost must be zero on the diagonal (point " +
                              std::to_string(i) + ")");
      for (std::size_t j = 0; j < cost_.cols(); ++j) {
        double v = cost_(i, j);
        if (!(v >= 0.0) || !std::isfinite(v))
          throw NegativeWeight("ground cost entries must be finite and nonnegative");
      }
    }
  }

  void validate_metric() const {
    const std::size_t n = cost_.rows();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (std::abs(cost_(i, j) - cost_(j, i)) > kMetricTolerance)
          throw InvalidArgument("ground cost marked metric but not symmetric at (" +
                                std::to_string(i) + "," + std::to_string(j) + ")");
    for (std::size_t k = 0; k < n; ++k) {
      const double* ck = cost_.row(k);
      for (std::size_t i = 0; i < n; ++i) {
        const double dik = cost_(i, k);
        const double* ci = cost_.row(i);
        for (std::size_t j = 0; j < n; ++j) {
          if (ci[j] > dik + ck[j] + kMetricTolerance)
            throw InvalidArgument("ground cost marked metric but violates the triangle "
                                  "inequality through point " + std::to_string(k));
        }
      }
    }
  }

  std::vector<std::string> labels_;
  Matrix cost_;
  bool is_metric_ = false;
};

using GroundPtr = std::shared_ptr<const GroundSpace>;

/// Two grounds are interchangeable when they are the same object or carry
/// bitwise-equal cost matrices.
inline bool same_ground(const GroundPtr& a, const GroundPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return a->cost() == b->cost();
}

/// Floyd-Warshall closure: turns any nonnegative symmetric cost with zero
/// diagonal into a metric (its shortest-path metric).
inline Matrix shortest_path_closure(Matrix cost) {
  const std::size_t n = cost.rows();
  if (n != cost.cols()) throw DimensionMismatch("closure needs a square matrix");
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      const double dik = cost(i, k);
      for (std::size_t j = 0; j < n; ++j)
        cost(i, j) = std::min(cost(i, j), dik + cost(k, j));
    }
  return cost;
}

}  // namespace otmarl
