#pragma once

#include <cmath>
#include <cstddef>

#include "otmarl/distribution.hpp"
#include "otmarl/matrix.hpp"

namespace otmarl {

/// Coupling between two distributions on a shared ground space. entries(i,j)
/// is the mass moved from source point i to target point j; cost_value is
/// (sum entries * cost^p)^(1/p).
struct TransportPlan {
  Matrix entries;
  DiscreteDistribution source;
  DiscreteDistribution target;
  double p = 1.0;
  double cost_value = 0.0;

  /// Largest absolute difference between the plan marginals and the stated
  /// source/target weights.
  double marginal_violation() const {
    double worst = 0.0;
    auto rows = entries.row_sums();
    for (std::size_t i = 0; i < rows.size(); ++i)
      worst = std::max(worst, std::abs(rows[i] - source.weights[i]));
    auto cols = entries.col_sums();
    for (std::size_t j = 0; j < cols.size(); ++j)
      worst = std::max(worst, std::abs(cols[j] - target.weights[j]));
    return worst;
  }
};

/// Outcome summary attached to iterative solves.
struct SolverReport {
  int iterations = 0;
  double max_marginal_violation = 0.0;
  bool converged = false;
  double regularization = 0.0;
};

namespace detail {

inline void require_exponent(double p, const char* where) {
  if (!(p >= 1.0) || !std::isfinite(p))
    throw InvalidArgument(std::string(where) + ": exponent p must be a finite real >= 1");
}

}  // namespace detail

/// Transport cost of an arbitrary coupling under the ground cost of its
/// source distribution: (sum gamma_ij * d_ij^p)^(1/p).
inline double plan_cost(const Matrix& entries, const GroundSpace& ground, double p) {
  double total = 0.0;
  const std::size_t n = entries.rows(), m = entries.cols();
  for (std::size_t i = 0; i < n; ++i) {
    const double* g = entries.row(i);
    const double* d = ground.cost().row(i);
    for (std::size_t j = 0; j < m; ++j) {
      if (g[j] != 0.0) total += g[j] * std::pow(d[j], p);
    }
  }
  if (total < 0.0) total = 0.0;
  return std::pow(total, 1.0 / p);
}

}  // namespace otmarl
