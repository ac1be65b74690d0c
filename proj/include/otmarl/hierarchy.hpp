#pragma once
// Hierarchical transport: partition the ground points, couple cluster
// masses in a small upper problem, solve one restricted transport per
// nonzero upper entry, and compose a globally feasible plan. The flat exact
// solve runs alongside so every solution carries its optimality gap and
// both wall times.
//
// Deeper hierarchies come from applying the same operation again to a lower
// subproblem's restricted distributions; nothing below hard-codes two levels
// beyond the single upper/lower split per call.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "otmarl/exact_ot.hpp"
#include "otmarl/ground_space.hpp"

namespace otmarl {

// Cluster assignment over the points of one ground space: point i belongs
// to cluster assignment[i] in [0, k). Every cluster is nonempty.
struct Partition {
  std::vector<std::size_t> assignment;
  std::size_t k = 0;
};

// Weighted k-medoids on the ground distances, fully deterministic: the
// first medoid is the heaviest point (lowest index on ties), the rest come
// from farthest-first traversal, and both the assignment and the medoid
// update break ties by lowest index. Points that are medoids stay in their
// own cluster, which keeps every cluster nonempty even with duplicate
// points. Masses weight the medoid update only; zero-mass points are still
// assigned somewhere.
inline Partition partition_points(const GroundPtr& ground,
                                  const std::vector<double>& masses,
                                  std::size_t k) {
  if (!ground) throw InvalidArgument("partition_points: null ground");
  const std::size_t n = ground->point_count();
  if (masses.size() != n)
    throw DimensionMismatch("partition_points: expected one mass per point");
  for (double m : masses)
    if (!(m >= 0.0) || !std::isfinite(m))
      throw NegativeWeight("partition_points: masses must be finite and >= 0");
  if (k < 1 || k > n)
    throw BadClusterCount("partition_points: cluster count must be in [1, " +
                          std::to_string(n) + "], got " + std::to_string(k));

  Partition out;
  out.k = k;
  out.assignment.assign(n, 0);
  if (k == 1) return out;
  if (k == n) {
    for (std::size_t i = 0; i < n; ++i) out.assignment[i] = i;
    return out;
  }

  // Farthest-first seeding from the heaviest point.
  std::vector<std::size_t> medoids;
  medoids.reserve(k);
  std::size_t heaviest = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (masses[i] > masses[heaviest]) heaviest = i;
  medoids.push_back(heaviest);
  std::vector<char> is_medoid(n, 0);
  is_medoid[heaviest] = 1;
  while (medoids.size() < k) {
    std::size_t pick = n;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (is_medoid[i]) continue;
      double nearest = std::numeric_limits<double>::infinity();
      for (std::size_t m : medoids)
        nearest = std::min(nearest, ground->cost_at(i, m));
      if (nearest > best) {
        best = nearest;
        pick = i;
      }
    }
    medoids.push_back(pick);
    is_medoid[pick] = 1;
  }

  auto assign = [&](std::vector<std::size_t>& into) {
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t cluster = 0;
      double nearest = ground->cost_at(i, medoids[0]);
      for (std::size_t c = 1; c < k; ++c) {
        const double d = ground->cost_at(i, medoids[c]);
        if (d < nearest) {
          nearest = d;
          cluster = c;
        }
      }
      into[i] = cluster;
    }
    for (std::size_t c = 0; c < k; ++c) into[medoids[c]] = c;
  };

  assign(out.assignment);
  for (int round = 0; round < 64; ++round) {
    bool moved = false;
    for (std::size_t c = 0; c < k; ++c) {
      double current = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (out.assignment[i] == c) current += masses[i] * ground->cost_at(i, medoids[c]);
      std::size_t best_point = medoids[c];
      double best_cost = current;
      for (std::size_t cand = 0; cand < n; ++cand) {
        if (out.assignment[cand] != c || cand == medoids[c]) continue;
        double cost = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          if (out.assignment[i] == c) cost += masses[i] * ground->cost_at(i, cand);
        if (cost < best_cost) {
          best_cost = cost;
          best_point = cand;
        }
      }
      if (best_point != medoids[c]) {
        is_medoid[medoids[c]] = 0;
        medoids[c] = best_point;
        is_medoid[best_point] = 1;
        moved = true;
      }
    }
    if (!moved) break;
    assign(out.assignment);
  }
  return out;
}

// One solved subproblem of the hierarchy: the restricted transport between
// the renormalized cluster slices, plus the upper-plan mass that scales it
// into the composition.
struct LowerPlanEntry {
  std::size_t source_cluster = 0;
  std::size_t target_cluster = 0;
  double upper_mass = 0.0;
  TransportPlan plan;
};

struct HierarchicalSolution {
  Matrix upper;                       // cluster-mass coupling, k_src x k_tgt
  std::vector<LowerPlanEntry> lower;  // one per nonzero upper entry
  TransportPlan composed;             // full-size, globally feasible
  double flat_cost = 0.0;
  double hier_cost = 0.0;
  double gap_ratio = 1.0;             // hier_cost / flat_cost
  double flat_ms = 0.0;
  double hier_ms = 0.0;
};

namespace detail {

inline void require_partition(const Partition& part, std::size_t n, const char* side) {
  if (part.k < 1)
    throw BadClusterCount(std::string("solve_hierarchical: ") + side +
                          " partition has no clusters");
  if (part.assignment.size() != n)
    throw DimensionMismatch(std::string("solve_hierarchical: ") + side +
                            " partition does not cover the ground");
  std::vector<char> seen(part.k, 0);
  for (std::size_t c : part.assignment) {
    if (c >= part.k)
      throw InvalidArgument(std::string("solve_hierarchical: ") + side +
                            " partition assigns a cluster out of range");
    seen[c] = 1;
  }
  for (std::size_t c = 0; c < part.k; ++c)
    if (!seen[c])
      throw InvalidArgument(std::string("solve_hierarchical: ") + side +
                            " partition has an empty cluster");
}

}  // namespace detail

// Two-level decomposition of exact_ot(mu, nu, p). The upper problem couples
// cluster masses under the mass-weighted mean of p-powered point costs, so
// the independent (product) coupling of each cluster pair prices it; every
// nonzero upper entry then spawns an exact restricted solve, and the
// composition sum(upper_AB * lower_AB) inherits the global marginals
// exactly. Its cost can therefore never beat the flat optimum, which is
// solved too and reported with both wall times.
inline HierarchicalSolution solve_hierarchical(const DiscreteDistribution& mu,
                                               const DiscreteDistribution& nu,
                                               const GroundPtr& ground, double p,
                                               const Partition& partition_src,
                                               const Partition& partition_tgt) {
  if (!ground) throw InvalidArgument("solve_hierarchical: null ground");
  if (!same_ground(mu.ground, ground) || !same_ground(nu.ground, ground))
    throw DimensionMismatch("solve_hierarchical: inputs on different grounds");
  detail::require_exponent(p, "solve_hierarchical");
  const std::size_t n = ground->point_count();
  detail::require_partition(partition_src, n, "source");
  detail::require_partition(partition_tgt, n, "target");

  using clock = std::chrono::steady_clock;
  const auto in_ms = [](clock::duration d) {
    return std::chrono::duration<double, std::milli>(d).count();
  };

  HierarchicalSolution out;

  const auto flat_start = clock::now();
  const TransportPlan flat = exact_ot(mu, nu, p);
  out.flat_ms = in_ms(clock::now() - flat_start);
  out.flat_cost = flat.cost_value;

  const auto hier_start = clock::now();
  const std::size_t ks = partition_src.k;
  const std::size_t kt = partition_tgt.k;
  std::vector<std::vector<std::size_t>> src_members(ks), tgt_members(kt);
  for (std::size_t i = 0; i < n; ++i) {
    src_members[partition_src.assignment[i]].push_back(i);
    tgt_members[partition_tgt.assignment[i]].push_back(i);
  }
  std::vector<double> src_mass(ks, 0.0), tgt_mass(kt, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    src_mass[partition_src.assignment[i]] += mu.weights[i];
    tgt_mass[partition_tgt.assignment[i]] += nu.weights[i];
  }

  Matrix upper_cost(ks, kt, 0.0);
  for (std::size_t a = 0; a < ks; ++a) {
    if (src_mass[a] <= 0.0) continue;
    for (std::size_t b = 0; b < kt; ++b) {
      if (tgt_mass[b] <= 0.0) continue;
      double mean = 0.0;
      for (std::size_t x : src_members[a]) {
        if (mu.weights[x] == 0.0) continue;
        for (std::size_t y : tgt_members[b]) {
          if (nu.weights[y] == 0.0) continue;
          const double d = ground->cost_at(x, y);
          mean += mu.weights[x] * nu.weights[y] *
                  ((p == 1.0) ? d : std::pow(d, p));
        }
      }
      upper_cost(a, b) = mean / (src_mass[a] * tgt_mass[b]);
    }
  }

  out.upper = detail::min_cost_transport(src_mass, tgt_mass, upper_cost);

  Matrix composed(n, n, 0.0);
  for (std::size_t a = 0; a < ks; ++a)
    for (std::size_t b = 0; b < kt; ++b) {
      const double mass = out.upper(a, b);
      if (mass <= 0.0) continue;
      std::vector<double> restricted_mu(n, 0.0), restricted_nu(n, 0.0);
      for (std::size_t x : src_members[a]) restricted_mu[x] = mu.weights[x];
      for (std::size_t y : tgt_members[b]) restricted_nu[y] = nu.weights[y];
      LowerPlanEntry entry;
      entry.source_cluster = a;
      entry.target_cluster = b;
      entry.upper_mass = mass;
      entry.plan = exact_ot(make_distribution(ground, std::move(restricted_mu)),
                            make_distribution(ground, std::move(restricted_nu)), p);
      const auto& cells = entry.plan.entries.data();
      auto& target = composed.data();
      for (std::size_t i = 0; i < cells.size(); ++i)
        if (cells[i] != 0.0) target[i] += mass * cells[i];
      out.lower.push_back(std::move(entry));
    }

  out.composed.entries = std::move(composed);
  out.composed.source = mu;
  out.composed.target = nu;
  out.composed.p = p;
  out.composed.cost_value = plan_cost(out.composed.entries, *ground, p);
  out.hier_ms = in_ms(clock::now() - hier_start);
  out.hier_cost = out.composed.cost_value;

  if (out.flat_cost > 0.0) {
    out.gap_ratio = out.hier_cost / out.flat_cost;
  } else {
    out.gap_ratio = (out.hier_cost == 0.0)
                        ? 1.0
                        : std::numeric_limits<double>::infinity();
  }
  return out;
}

}  // namespace otmarl
