#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "otmarl/distribution.hpp"
#include "otmarl/errors.hpp"

namespace otmarl {

/// Closed-form p-Wasserstein distance for distributions supported on a line,
/// via the quantile-function identity: W_p^p = integral over q in [0,1] of
/// |F_mu^{-1}(q) - F_nu^{-1}(q)|^p. Both quantile functions are piecewise
/// constant, so the integral is an exact finite sum, evaluated here by
/// marching the two sorted mass sequences against each other.
///
/// The ground cost must agree with |positions[i] - positions[j]| to within
/// 1e-9; anything else raises NotOneDimensional. Completely independent of
/// the flow-based solver, which is the point: it is the reference the solver
/// is tested against.
inline double quantile_oracle_1d(const DiscreteDistribution& mu,
                                 const DiscreteDistribution& nu,
                                 const std::vector<double>& positions, double p) {
  require_same_ground(mu, nu, "quantile_oracle_1d");
  if (!(p >= 1.0) || !std::isfinite(p))
    throw InvalidArgument("quantile_oracle_1d: exponent p must be >= 1");
  const GroundSpace& g = *mu.ground;
  if (positions.size() != g.point_count())
    throw DimensionMismatch("quantile_oracle_1d: one position per ground point required");
  for (std::size_t i = 0; i < positions.size(); ++i)
    for (std::size_t j = 0; j < positions.size(); ++j)
      if (std::abs(g.cost_at(i, j) - std::abs(positions[i] - positions[j])) > 1e-9)
        throw NotOneDimensional("quantile_oracle_1d: ground cost is not the line metric "
                                "of the given positions");

  std::vector<std::size_t> order(positions.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (positions[a] != positions[b]) return positions[a] < positions[b];
    return a < b;
  });

  struct Atom {
    double x;
    double mass;
  };
  auto atoms_of = [&](const DiscreteDistribution& d) {
    std::vector<Atom> atoms;
    for (std::size_t idx : order)
      if (d.weights[idx] > 0.0) atoms.push_back({positions[idx], d.weights[idx]});
    return atoms;
  };
  std::vector<Atom> a = atoms_of(mu);
  std::vector<Atom> b = atoms_of(nu);

  double total = 0.0;
  std::size_t i = 0, j = 0;
  double rem_a = a[0].mass, rem_b = b[0].mass;
  while (i < a.size() && j < b.size()) {
    const double step = std::min(rem_a, rem_b);
    total += step * std::pow(std::abs(a[i].x - b[j].x), p);
    rem_a -= step;
    rem_b -= step;
    if (rem_a <= 0.0) {
      if (++i < a.size()) rem_a = a[i].mass;
    }
    if (rem_b <= 0.0) {
      if (++j < b.size()) rem_b = b[j].mass;
    }
  }
  return std::pow(total, 1.0 / p);
}

/// Brute-force p-Wasserstein distance between uniform marginals on n source
/// and n target points, given the n x n cross cost block, by enumerating
/// every assignment. For uniform marginals some permutation matrix attains
/// the optimum (Birkhoff), so this equals the true distance:
/// min over permutations of ((1/n) sum_i cost(i, perm(i))^p)^(1/p).
/// Only defined for n <= 7 (5040 permutations); larger raises OracleTooLarge.
/// Completely independent of the flow-based solver.
inline double assignment_oracle(const Matrix& cost, double p) {
  if (!(p >= 1.0) || !std::isfinite(p))
    throw InvalidArgument("assignment_oracle: exponent p must be >= 1");
  if (cost.rows() != cost.cols())
    throw DimensionMismatch("assignment_oracle: cost block must be square");
  const std::size_t n = cost.rows();
  if (n == 0) throw InvalidArgument("assignment_oracle: empty cost block");
  if (n > 7)
    throw OracleTooLarge("assignment_oracle: enumeration capped at 7 points, got " +
                         std::to_string(n));
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += std::pow(cost(i, perm[i]), p);
    best = std::min(best, sum);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::pow(best / static_cast<double>(n), 1.0 / p);
}

/// Embeds an n x n bipartite cost block into a 2n-point ground space:
/// sources occupy indices [0, n), targets [n, 2n). Cross-block costs come
/// from the given matrix; within-side costs are filled with a large constant
/// so no optimal coupling ever uses them (marginals make them unreachable
/// anyway). Companion to assignment_oracle for driving the full solvers.
inline GroundPtr bipartite_ground(const Matrix& cost) {
  if (cost.rows() != cost.cols())
    throw DimensionMismatch("bipartite_ground: cost block must be square");
  const std::size_t n = cost.rows();
  const double far = 1.0 + 2.0 * cost.max_entry();
  Matrix full(2 * n, 2 * n, far);
  for (std::size_t i = 0; i < 2 * n; ++i) full(i, i) = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      full(i, n + j) = cost(i, j);
      full(n + j, i) = cost(i, j);
    }
  return GroundSpace::from_cost(std::move(full), false);
}

/// Uniform distributions on the two halves of a bipartite_ground.
inline std::pair<DiscreteDistribution, DiscreteDistribution> bipartite_uniforms(
    GroundPtr ground) {
  const std::size_t total = ground->point_count();
  const std::size_t n = total / 2;
  std::vector<double> wa(total, 0.0), wb(total, 0.0);
  for (std::size_t i = 0; i < n; ++i) wa[i] = 1.0;
  for (std::size_t j = n; j < total; ++j) wb[j] = 1.0;
  return {make_distribution(ground, std::move(wa)),
          make_distribution(std::move(ground), std::move(wb))};
}

}  // namespace otmarl
