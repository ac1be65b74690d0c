#pragma once
// Resource allocation: per-agent transports from a shared supply, both as
// the literal sum of independent solves and as one aggregate solve that
// respects the supply physically, plus a greedy feasible baseline, energy
// weighting of the ground cost, and rerouting after input changes.

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "otmarl/exact_ot.hpp"
#include "otmarl/ground_space.hpp"

namespace otmarl {

// Supply side: which ground points hold resources and how much. The supply
// distribution lives on the full ground with its mass on the listed nodes.
struct ResourcePool {
  std::vector<std::size_t> nodes;
  DiscreteDistribution supply;
};

inline ResourcePool make_pool(const GroundPtr& ground,
                              std::vector<std::size_t> nodes,
                              const std::vector<double>& node_supply) {
  if (!ground) throw InvalidArgument("make_pool: null ground");
  if (nodes.size() != node_supply.size())
    throw DimensionMismatch("make_pool: nodes and supply lengths differ");
  std::vector<double> raw(ground->point_count(), 0.0);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i] >= ground->point_count())
      throw InvalidArgument("make_pool: node index out of range");
    raw[nodes[i]] += node_supply[i];
  }
  return {std::move(nodes), make_distribution(ground, raw)};
}

// Demand side: one distribution per agent plus that agent's share of the
// total demand mass. Weights are normalized on construction.
struct DemandSet {
  std::vector<DiscreteDistribution> demands;
  std::vector<double> agent_weights;
};

inline DemandSet make_demand_set(std::vector<DiscreteDistribution> demands,
                                 std::vector<double> agent_weights) {
  if (demands.empty()) throw EmptyMass("make_demand_set: no demands");
  if (agent_weights.empty())
    agent_weights.assign(demands.size(), 1.0 / static_cast<double>(demands.size()));
  if (agent_weights.size() != demands.size())
    throw DimensionMismatch("make_demand_set: weights and demands lengths differ");
  double total = 0.0;
  for (double w : agent_weights) {
    if (w < 0.0) throw NegativeWeight("make_demand_set: negative agent weight");
    total += w;
  }
  if (total <= 0.0) throw EmptyMass("make_demand_set: agent weights all zero");
  for (double& w : agent_weights) w /= total;
  for (std::size_t i = 1; i < demands.size(); ++i)
    require_same_ground(demands[0], demands[i], "make_demand_set");
  return {std::move(demands), std::move(agent_weights)};
}

// Per-point energy intensity (energy per transported mass-distance unit at
// the receiving point) and its weight in the transport objective.
struct EnergyProfile {
  std::vector<double> intensity;
  double lambda = 1.0;
};

enum class AllocationMode { kLiteral, kAggregate };

// Outcome of an allocation solve. Literal mode fills plans (one independent
// optimal transport per agent, each drawing on the full supply) and the
// supply-reuse diagnostic. Aggregate mode fills global_plan (one exact solve
// against the pooled demand) and slices (per-agent shares of each entry,
// split proportionally to the agents' demand at the receiving point).
struct AllocationResult {
  AllocationMode mode = AllocationMode::kLiteral;
  std::vector<TransportPlan> plans;
  Matrix global_plan;
  std::vector<Matrix> slices;
  double total_cost = 0.0;
  std::vector<double> per_agent_cost;
  std::vector<double> supply_usage;
  double reuse_factor = 0.0;
  DemandSet demands;  // kept for rerouting
};

namespace detail {

inline void require_alloc_inputs(const ResourcePool& pool, const DemandSet& demands,
                                 const GroundPtr& ground, const char* where) {
  if (!ground) throw InvalidArgument(std::string(where) + ": null ground");
  if (!same_ground(pool.supply.ground, ground))
    throw DimensionMismatch(std::string(where) + ": supply on a different ground");
  if (demands.demands.empty()) throw EmptyMass(std::string(where) + ": no demands");
  for (const auto& d : demands.demands)
    if (!same_ground(d.ground, ground))
      throw DimensionMismatch(std::string(where) + ": demand on a different ground");
  double wsum = 0.0;
  for (double w : demands.agent_weights) wsum += w;
  if (demands.agent_weights.size() != demands.demands.size() ||
      std::abs(wsum - 1.0) > 1e-12)
    throw InvalidArgument(std::string(where) +
                          ": agent weights must be normalized per make_demand_set");
}

}  // namespace detail

// The objective exactly as the per-agent sum reads: every agent transports
// from the full supply independently, so total supply is counted once per
// agent. The reuse diagnostic makes that multiplicity visible.
inline AllocationResult solve_literal(const ResourcePool& pool,
                                      const DemandSet& demands,
                                      const GroundPtr& ground, double p) {
  detail::require_alloc_inputs(pool, demands, ground, "solve_literal");
  AllocationResult out;
  out.mode = AllocationMode::kLiteral;
  out.demands = demands;
  const std::size_t n = ground->point_count();
  out.supply_usage.assign(n, 0.0);
  for (const auto& demand : demands.demands) {
    out.plans.push_back(exact_ot(pool.supply, demand, p));
    const TransportPlan& plan = out.plans.back();
    out.per_agent_cost.push_back(plan.cost_value);
    out.total_cost += plan.cost_value;
    auto rows = plan.entries.row_sums();
    for (std::size_t i = 0; i < n; ++i) out.supply_usage[i] += rows[i];
  }
  out.reuse_factor = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (pool.supply.weights[i] > 0.0)
      out.reuse_factor =
          std::max(out.reuse_factor, out.supply_usage[i] / pool.supply.weights[i]);
  return out;
}

// One transport against the pooled demand, so the supply constraint is
// physical: nothing is counted twice. Entry (r, t) of the global plan is
// split among agents in proportion to their share of the demand at t.
inline AllocationResult solve_aggregate(const ResourcePool& pool,
                                        const DemandSet& demands,
                                        const GroundPtr& ground, double p) {
  detail::require_alloc_inputs(pool, demands, ground, "solve_aggregate");
  const std::size_t n = ground->point_count();
  const std::size_t n_agents = demands.demands.size();

  std::vector<double> pooled(n, 0.0);
  for (std::size_t a = 0; a < n_agents; ++a)
    for (std::size_t t = 0; t < n; ++t)
      pooled[t] += demands.agent_weights[a] * demands.demands[a].weights[t];
  auto aggregate_demand = make_distribution(ground, pooled);

  TransportPlan plan = exact_ot(pool.supply, aggregate_demand, p);

  AllocationResult out;
  out.mode = AllocationMode::kAggregate;
  out.demands = demands;
  out.global_plan = plan.entries;
  out.total_cost = plan.cost_value;
  out.supply_usage = plan.entries.row_sums();

  out.slices.assign(n_agents, Matrix(n, n, 0.0));
  out.per_agent_cost.assign(n_agents, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    const double pool_mass = aggregate_demand.weights[t];
    if (pool_mass <= 0.0) continue;
    for (std::size_t a = 0; a < n_agents; ++a) {
      const double share =
          demands.agent_weights[a] * demands.demands[a].weights[t] / pool_mass;
      if (share == 0.0) continue;
      for (std::size_t r = 0; r < n; ++r) {
        const double mass = plan.entries(r, t);
        if (mass != 0.0) out.slices[a](r, t) = mass * share;
      }
    }
  }
  for (std::size_t a = 0; a < n_agents; ++a)
    out.per_agent_cost[a] = plan_cost(out.slices[a], *ground, p);
  return out;
}

// Feasible reference point: repeatedly send the largest unmet demand from
// its nearest remaining supply node, lowest index on ties. Never better than
// the exact solve; the acceptance suite compares the two.
inline TransportPlan greedy_baseline(const ResourcePool& pool,
                                     const DiscreteDistribution& demand,
                                     const GroundPtr& ground, double p) {
  if (!same_ground(pool.supply.ground, ground) ||
      !same_ground(demand.ground, ground))
    throw DimensionMismatch("greedy_baseline: inputs on different grounds");
  detail::require_exponent(p, "greedy_baseline");
  const std::size_t n = ground->point_count();
  std::vector<double> unmet = demand.weights;
  std::vector<double> remaining = pool.supply.weights;
  Matrix entries(n, n, 0.0);

  constexpr double kDone = 1e-13;
  const std::size_t budget = 4 * n * n + 64;
  for (std::size_t round = 0; round < budget; ++round) {
    std::size_t target = n;
    double worst = kDone;
    for (std::size_t t = 0; t < n; ++t)
      if (unmet[t] > worst) {
        worst = unmet[t];
        target = t;
      }
    if (target == n) break;

    std::size_t source = n;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < n; ++r)
      if (remaining[r] > kDone && ground->cost_at(r, target) < best) {
        best = ground->cost_at(r, target);
        source = r;
      }
    if (source == n)
      throw Error("greedy_baseline: demand left but supply exhausted");

    const double mass = std::min(remaining[source], unmet[target]);
    entries(source, target) += mass;
    remaining[source] = (remaining[source] <= mass) ? 0.0 : remaining[source] - mass;
    unmet[target] = (unmet[target] <= mass) ? 0.0 : unmet[target] - mass;
  }

  TransportPlan plan;
  plan.entries = std::move(entries);
  plan.source = pool.supply;
  plan.target = demand;
  plan.p = p;
  plan.cost_value = plan_cost(plan.entries, *ground, p);
  return plan;
}

// Energy weighting: c'(r, a) = d(r, a) * (1 + lambda * e_a)^(1/p), so the
// p-th-power cost picks up the factor (1 + lambda * e_a). Receiving at a
// high-intensity point becomes proportionally expensive while zero-length
// moves stay free. The result is generally asymmetric, so the metric flag is
// dropped.
inline GroundPtr energy_weighted_ground(const GroundPtr& ground,
                                        const EnergyProfile& profile, double p) {
  if (!ground) throw InvalidArgument("energy_weighted_ground: null ground");
  detail::require_exponent(p, "energy_weighted_ground");
  if (profile.intensity.size() != ground->point_count())
    throw DimensionMismatch(
        "energy_weighted_ground: intensity vector does not cover the ground");
  if (!(profile.lambda >= 0.0) || !std::isfinite(profile.lambda))
    throw InvalidArgument("energy_weighted_ground: lambda must be finite and >= 0");
  for (double e : profile.intensity)
    if (e < 0.0 || !std::isfinite(e))
      throw NegativeWeight("energy_weighted_ground: negative intensity");

  const std::size_t n = ground->point_count();
  Matrix cost(n, n);
  for (std::size_t a = 0; a < n; ++a) {
    const double factor = std::pow(1.0 + profile.lambda * profile.intensity[a], 1.0 / p);
    for (std::size_t r = 0; r < n; ++r) cost(r, a) = ground->cost_at(r, a) * factor;
  }
  return GroundSpace::from_cost(std::vector<std::string>(ground->labels()),
                                std::move(cost), false);
}

// Energy actually spent by a plan under an intensity profile:
// sum of entries * d^p * e at the receiving point, in the BASE ground's
// distance units. This is the quantity the energy-weighted solve trades
// against plain distance.
inline double energy_expenditure(const Matrix& entries, const GroundSpace& base,
                                 const std::vector<double>& intensity, double p) {
  if (entries.rows() != base.point_count() || entries.cols() != base.point_count())
    throw DimensionMismatch("energy_expenditure: plan does not match the ground");
  if (intensity.size() != base.point_count())
    throw DimensionMismatch("energy_expenditure: intensity length mismatch");
  double total = 0.0;
  for (std::size_t r = 0; r < base.point_count(); ++r)
    for (std::size_t a = 0; a < base.point_count(); ++a) {
      const double m = entries(r, a);
      if (m == 0.0) continue;
      const double d = base.cost_at(r, a);
      total += m * ((p == 1.0) ? d : std::pow(d, p)) * intensity[a];
    }
  return total;
}

// Fresh solve after the supply or the energy picture changed, keeping the
// previous mode and demands, plus the total-variation-style size of the plan
// change. The new ground is the energy weighting of base_ground under the
// updated profile (lambda = 0 reproduces base_ground's costs bitwise).
inline std::pair<AllocationResult, double> reroute(const AllocationResult& previous,
                                                   const ResourcePool& updated_pool,
                                                   const EnergyProfile& updated_profile,
                                                   const GroundPtr& base_ground,
                                                   double p) {
  GroundPtr ground = energy_weighted_ground(base_ground, updated_profile, p);
  // The updated pool must be re-hosted on the new ground handle so the
  // solvers see one shared space.
  ResourcePool pool{updated_pool.nodes,
                    make_distribution(ground, updated_pool.supply.weights)};
  DemandSet demands;
  demands.agent_weights = previous.demands.agent_weights;
  for (const auto& d : previous.demands.demands)
    demands.demands.push_back(make_distribution(ground, d.weights));

  AllocationResult fresh = previous.mode == AllocationMode::kLiteral
                               ? solve_literal(pool, demands, ground, p)
                               : solve_aggregate(pool, demands, ground, p);

  double change = 0.0;
  if (previous.mode == AllocationMode::kLiteral) {
    if (fresh.plans.size() != previous.plans.size())
      throw DimensionMismatch("reroute: agent count changed");
    for (std::size_t a = 0; a < fresh.plans.size(); ++a) {
      const auto& now = fresh.plans[a].entries.data();
      const auto& was = previous.plans[a].entries.data();
      for (std::size_t i = 0; i < now.size(); ++i)
        change += std::abs(now[i] - was[i]);
    }
  } else {
    const auto& now = fresh.global_plan.data();
    const auto& was = previous.global_plan.data();
    if (now.size() != was.size())
      throw DimensionMismatch("reroute: plan shapes changed");
    for (std::size_t i = 0; i < now.size(); ++i)
      change += std::abs(now[i] - was[i]);
  }
  return {std::move(fresh), change};
}

}  // namespace otmarl
