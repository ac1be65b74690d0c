#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "otmarl/distribution.hpp"
#include "otmarl/errors.hpp"
#include "otmarl/matrix.hpp"
#include "otmarl/transport_plan.hpp"

namespace otmarl {
namespace detail {

/// Exact minimum-cost transport between positive supply and demand vectors
/// over a dense cost matrix, via successive shortest augmenting paths with
/// node potentials (Dijkstra on the residual bipartite graph).
///
/// Suppliers are nodes [0, k), consumers [k, k + l). Each augmentation ships
/// the bottleneck mass along a minimum reduced-cost path, so one supplier or
/// consumer (or a rerouted arc) is exhausted exactly per step; masses are
/// real-valued and the loop finishes when every consumer is filled to within
/// 1e-13 of its demand.
inline Matrix min_cost_transport(const std::vector<double>& supply,
                                 const std::vector<double>& demand,
                                 const Matrix& cost) {
  const std::size_t k = supply.size();
  const std::size_t l = demand.size();
  if (cost.rows() != k || cost.cols() != l)
    throw DimensionMismatch("min_cost_transport: cost shape mismatch");
  const double kInf = std::numeric_limits<double>::infinity();
  constexpr double kDone = 1e-13;

  Matrix flow(k, l, 0.0);
  std::vector<double> rem_s = supply;
  std::vector<double> rem_t = demand;
  std::vector<double> pot_s(k, 0.0), pot_t(l, 0.0);

  const std::size_t node_count = k + l;
  std::vector<double> dist(node_count);
  std::vector<char> finalized(node_count);
  // parent[k + j] = supplier i (forward arc i->j); parent[i] = k + j
  // (residual arc j->i); kNoParent marks path roots.
  constexpr std::size_t kNoParent = static_cast<std::size_t>(-1);
  std::vector<std::size_t> parent(node_count);

  long guard = 200 * static_cast<long>(node_count) + 256;
  while (true) {
    std::size_t pending = kNoParent;
    for (std::size_t j = 0; j < l; ++j)
      if (rem_t[j] > kDone) {
        pending = j;
        break;
      }
    if (pending == kNoParent) break;
    if (--guard < 0)
      throw Error("min_cost_transport: augmentation budget exhausted "
                  "(degenerate instance)");

    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(finalized.begin(), finalized.end(), 0);
    std::fill(parent.begin(), parent.end(), kNoParent);
    bool any_source = false;
    for (std::size_t i = 0; i < k; ++i)
      if (rem_s[i] > kDone) {
        dist[i] = 0.0;
        any_source = true;
      }
    if (!any_source)
      throw Error("min_cost_transport: no remaining supply for outstanding demand");

    std::size_t target = kNoParent;
    double target_dist = kInf;
    while (true) {
      double best = kInf;
      std::size_t u = kNoParent;
      for (std::size_t v = 0; v < node_count; ++v)
        if (!finalized[v] && dist[v] < best) {
          best = dist[v];
          u = v;
        }
      if (u == kNoParent) break;
      finalized[u] = 1;
      if (u >= k && rem_t[u - k] > kDone) {
        target = u - k;
        target_dist = dist[u];
        break;
      }
      if (u < k) {
        const std::size_t i = u;
        const double base = dist[u] + pot_s[i];
        const double* ci = cost.row(i);
        for (std::size_t j = 0; j < l; ++j) {
          if (finalized[k + j]) continue;
          double nd = base + ci[j] - pot_t[j];
          if (nd < dist[u]) nd = dist[u];  // clamp rounding on reduced costs
          if (nd < dist[k + j]) {
            dist[k + j] = nd;
            parent[k + j] = i;
          }
        }
      } else {
        const std::size_t j = u - k;
        const double base = dist[u] + pot_t[j];
        for (std::size_t i = 0; i < k; ++i) {
          if (finalized[i] || flow(i, j) <= 0.0) continue;
          double nd = base - cost(i, j) - pot_s[i];
          if (nd < dist[u]) nd = dist[u];
          if (nd < dist[i]) {
            dist[i] = nd;
            parent[i] = k + j;
          }
        }
      }
    }
    if (target == kNoParent)
      throw Error("min_cost_transport: demand unreachable from remaining supply");

    for (std::size_t i = 0; i < k; ++i)
      pot_s[i] += std::min(dist[i], target_dist);
    for (std::size_t j = 0; j < l; ++j)
      pot_t[j] += std::min(dist[k + j], target_dist);

    // Walk the path back to its root supplier to find the bottleneck.
    double delta = rem_t[target];
    std::size_t root = kNoParent;
    for (std::size_t node = k + target; node != kNoParent;) {
      if (node < k) {
        const std::size_t up = parent[node];
        if (up == kNoParent) {
          root = node;
          delta = std::min(delta, rem_s[node]);
          break;
        }
        delta = std::min(delta, flow(node, up - k));  // residual arc capacity
        node = up;
      } else {
        node = parent[node];
      }
    }

    for (std::size_t node = k + target; node != kNoParent;) {
      if (node < k) {
        const std::size_t up = parent[node];
        if (up == kNoParent) break;
        double& f = flow(node, up - k);
        f = (f <= delta) ? 0.0 : f - delta;
        node = up;
      } else {
        const std::size_t i = parent[node];
        flow(i, node - k) += delta;
        node = i;
      }
    }
    rem_s[root] = (rem_s[root] <= delta) ? 0.0 : rem_s[root] - delta;
    rem_t[target] = (rem_t[target] <= delta) ? 0.0 : rem_t[target] - delta;
  }
  return flow;
}

/// Raises ground costs to the p-th power over given index subsets.
inline Matrix powered_cost(const GroundSpace& ground, const std::vector<std::size_t>& rows,
                           const std::vector<std::size_t>& cols, double p) {
  Matrix out(rows.size(), cols.size());
  for (std::size_t a = 0; a < rows.size(); ++a) {
    const double* src = ground.cost().row(rows[a]);
    double* dst = out.row(a);
    for (std::size_t b = 0; b < cols.size(); ++b) {
      const double d = src[cols[b]];
      dst[b] = (p == 1.0) ? d : std::pow(d, p);
    }
  }
  return out;
}

}  // namespace detail

/// Exact p-Wasserstein coupling between two distributions on a shared ground
/// space. Zero-weight points take no part in the flow problem; the returned
/// plan is full-sized with zero rows/columns there. Marginals of the result
/// match the inputs to within 1e-9 (in practice, accumulated rounding only).
inline TransportPlan exact_ot(const DiscreteDistribution& mu,
                              const DiscreteDistribution& nu, double p) {
  require_same_ground(mu, nu, "exact_ot");
  detail::require_exponent(p, "exact_ot");

  const std::vector<std::size_t> src_idx = mu.support();
  const std::vector<std::size_t> dst_idx = nu.support();
  std::vector<double> supply(src_idx.size()), demand(dst_idx.size());
  for (std::size_t a = 0; a < src_idx.size(); ++a) supply[a] = mu.weights[src_idx[a]];
  for (std::size_t b = 0; b < dst_idx.size(); ++b) demand[b] = nu.weights[dst_idx[b]];

  const Matrix sub_cost = detail::powered_cost(*mu.ground, src_idx, dst_idx, p);
  const Matrix sub_flow = detail::min_cost_transport(supply, demand, sub_cost);

  const std::size_t n = mu.ground->point_count();
  TransportPlan plan;
  plan.entries = Matrix(n, n, 0.0);
  for (std::size_t a = 0; a < src_idx.size(); ++a)
    for (std::size_t b = 0; b < dst_idx.size(); ++b)
      if (sub_flow(a, b) != 0.0) plan.entries(src_idx[a], dst_idx[b]) = sub_flow(a, b);
  plan.source = mu;
  plan.target = nu;
  plan.p = p;
  plan.cost_value = plan_cost(plan.entries, *mu.ground, p);
  return plan;
}

/// Just the p-Wasserstein distance, without materializing the full plan.
inline double wasserstein(const DiscreteDistribution& mu, const DiscreteDistribution& nu,
                          double p) {
  require_same_ground(mu, nu, "wasserstein");
  detail::require_exponent(p, "wasserstein");
  const std::vector<std::size_t> src_idx = mu.support();
  const std::vector<std::size_t> dst_idx = nu.support();
  std::vector<double> supply(src_idx.size()), demand(dst_idx.size());
  for (std::size_t a = 0; a < src_idx.size(); ++a) supply[a] = mu.weights[src_idx[a]];
  for (std::size_t b = 0; b < dst_idx.size(); ++b) demand[b] = nu.weights[dst_idx[b]];
  const Matrix sub_cost = detail::powered_cost(*mu.ground, src_idx, dst_idx, p);
  const Matrix sub_flow = detail::min_cost_transport(supply, demand, sub_cost);
  double total = 0.0;
  for (std::size_t a = 0; a < src_idx.size(); ++a) {
    const double* f = sub_flow.row(a);
    const double* c = sub_cost.row(a);
    for (std::size_t b = 0; b < dst_idx.size(); ++b) total += f[b] * c[b];
  }
  if (total < 0.0) total = 0.0;
  return std::pow(total, 1.0 / p);
}

}  // namespace otmarl
