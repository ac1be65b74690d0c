#pragma once
// State-action spaces over grid coordinates, ground costs on them, and
// policy occupancy measures: empirical estimates from logged trajectories
// and exact values from forward propagation of a known transition model.

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "otmarl/distribution.hpp"
#include "otmarl/errors.hpp"
#include "otmarl/ground_space.hpp"
#include "otmarl/matrix.hpp"

namespace otmarl {

struct GridPos {
  int x = 0;
  int y = 0;
};

inline bool operator==(const GridPos& a, const GridPos& b) {
  return a.x == b.x && a.y == b.y;
}

inline int manhattan(const GridPos& a, const GridPos& b) {
  return std::abs(a.x - b.x) + std::abs(a.y - b.y);
}

// Enumerated grid states crossed with a named action set. Joint indices pack
// the pair (state, action) as state * action_count + action, a bijection onto
// [0, state_count * action_count).
class StateActionSpace {
 public:
  StateActionSpace(std::vector<GridPos> states, std::vector<std::string> actions)
      : states_(std::move(states)), actions_(std::move(actions)) {
    if (states_.empty() || actions_.empty())
      throw InvalidArgument(
          "StateActionSpace needs at least one state and one action");
  }

  // All cells of a width x height grid in row-major order.
  static StateActionSpace grid(int width, int height,
                               std::vector<std::string> actions) {
    if (width <= 0 || height <= 0)
      throw InvalidArgument("StateActionSpace::grid: dimensions must be positive");
    std::vector<GridPos> cells;
    cells.reserve(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) cells.push_back({x, y});
    return StateActionSpace(std::move(cells), std::move(actions));
  }

  std::size_t state_count() const { return states_.size(); }
  std::size_t action_count() const { return actions_.size(); }
  std::size_t joint_count() const { return states_.size() * actions_.size(); }

  std::size_t joint_index(std::size_t state, std::size_t action) const {
    if (state >= states_.size() || action >= actions_.size())
      throw InvalidArgument("StateActionSpace::joint_index: index out of range");
    return state * actions_.size() + action;
  }
  std::size_t state_of(std::size_t joint) const { return joint / actions_.size(); }
  std::size_t action_of(std::size_t joint) const { return joint % actions_.size(); }

  const GridPos& state_pos(std::size_t state) const { return states_.at(state); }
  const std::string& action_name(std::size_t action) const {
    return actions_.at(action);
  }
  const std::vector<GridPos>& states() const { return states_; }
  const std::vector<std::string>& actions() const { return actions_; }

 private:
  std::vector<GridPos> states_;
  std::vector<std::string> actions_;
};

// Ground cost on joint points: manhattan distance between the states plus a
// flat mismatch penalty kappa when the actions differ. Both terms satisfy
// the triangle inequality, so the sum does as well and the result passes the
// metric validator. Set validate = false to skip the cubic check on large
// spaces; the construction is a metric regardless.
inline GroundPtr build_ground(const StateActionSpace& space, double kappa,
                              bool validate = true) {
  if (kappa < 0.0 || !std::isfinite(kappa))
    throw InvalidArgument("build_ground: kappa must be finite and nonnegative");
  const std::size_t n = space.joint_count();
  Matrix cost(n, n);
  std::vector<std::string> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const GridPos& pi = space.state_pos(space.state_of(i));
    labels[i] = "(" + std::to_string(pi.x) + "," + std::to_string(pi.y) + ")|" +
                space.action_name(space.action_of(i));
    for (std::size_t j = 0; j < n; ++j) {
      const GridPos& pj = space.state_pos(space.state_of(j));
      double d = static_cast<double>(manhattan(pi, pj));
      if (space.action_of(i) != space.action_of(j)) d += kappa;
      cost(i, j) = (i == j) ? 0.0 : d;
    }
  }
  if (!validate)
    return GroundSpace::from_cost_trusted_metric(std::move(labels), std::move(cost));
  return GroundSpace::from_cost(std::move(labels), std::move(cost), true);
}

struct TrajectoryStep {
  std::size_t state = 0;
  std::size_t action = 0;
  double reward = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;
};

// Inclusive episode range an occupancy estimate summarizes.
struct EpisodeWindow {
  std::size_t first = 0;
  std::size_t last = 0;
};

struct OccupancyMeasure {
  DiscreteDistribution distribution;
  EpisodeWindow window;
};

// Empirical occupancy: visit count of each (state, action) pair divided by
// the total number of logged steps. No smoothing; unvisited pairs get zero.
inline OccupancyMeasure estimate_occupancy(const std::vector<Trajectory>& trajs,
                                           const StateActionSpace& space,
                                           const GroundPtr& ground,
                                           EpisodeWindow window = {}) {
  if (trajs.empty()) throw EmptyMass("estimate_occupancy: no trajectories");
  if (!ground || ground->point_count() != space.joint_count())
    throw DimensionMismatch("estimate_occupancy: ground does not cover the space");
  std::vector<double> counts(space.joint_count(), 0.0);
  for (const Trajectory& traj : trajs) {
    if (traj.steps.empty())
      throw EmptyMass("estimate_occupancy: empty trajectory");
    for (const TrajectoryStep& step : traj.steps)
      counts[space.joint_index(step.state, step.action)] += 1.0;
  }
  return {make_distribution(ground, counts), window};
}

// Exact occupancy of a tabular policy under a known model: propagate the
// state distribution forward and average the induced state-action marginals
// over the horizon. policy is state_count x action_count with stochastic
// rows; transition is joint_count x state_count, row j giving the next-state
// distribution after joint pair j.
inline OccupancyMeasure exact_occupancy(const Matrix& policy,
                                        const Matrix& transition,
                                        const std::vector<double>& start,
                                        std::size_t horizon,
                                        const StateActionSpace& space,
                                        const GroundPtr& ground,
                                        EpisodeWindow window = {}) {
  const std::size_t ns = space.state_count();
  const std::size_t na = space.action_count();
  if (policy.rows() != ns || policy.cols() != na)
    throw DimensionMismatch("exact_occupancy: policy shape mismatch");
  if (transition.rows() != space.joint_count() || transition.cols() != ns)
    throw DimensionMismatch("exact_occupancy: transition shape mismatch");
  if (start.size() != ns)
    throw DimensionMismatch("exact_occupancy: start vector length mismatch");
  if (horizon == 0) throw InvalidArgument("exact_occupancy: horizon must be >= 1");
  if (!ground || ground->point_count() != space.joint_count())
    throw DimensionMismatch("exact_occupancy: ground does not cover the space");

  auto check_rows = [](const Matrix& m, const char* what) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
      double sum = 0.0;
      for (std::size_t c = 0; c < m.cols(); ++c) {
        const double v = m(r, c);
        if (!(v >= 0.0) || !std::isfinite(v))
          throw NotStochastic(std::string(what) + ": negative or non-finite entry");
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw NotStochastic(std::string(what) + ": row does not sum to 1");
    }
  };
  check_rows(policy, "exact_occupancy policy");
  check_rows(transition, "exact_occupancy transition");

  std::vector<double> d(ns, 0.0);
  double start_sum = 0.0;
  for (std::size_t s = 0; s < ns; ++s) {
    if (start[s] < 0.0) throw NegativeWeight("exact_occupancy: negative start weight");
    start_sum += start[s];
  }
  if (start_sum <= 0.0) throw EmptyMass("exact_occupancy: start has no mass");
  for (std::size_t s = 0; s < ns; ++s) d[s] = start[s] / start_sum;

  std::vector<double> occ(space.joint_count(), 0.0);
  std::vector<double> next(ns, 0.0);
  for (std::size_t t = 0; t < horizon; ++t) {
    for (std::size_t s = 0; s < ns; ++s) {
      if (d[s] == 0.0) continue;
      for (std::size_t a = 0; a < na; ++a)
        occ[s * na + a] += d[s] * policy(s, a);
    }
    if (t + 1 == horizon) break;
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t s = 0; s < ns; ++s) {
      if (d[s] == 0.0) continue;
      for (std::size_t a = 0; a < na; ++a) {
        const double mass = d[s] * policy(s, a);
        if (mass == 0.0) continue;
        const std::size_t j = s * na + a;
        for (std::size_t sn = 0; sn < ns; ++sn)
          next[sn] += mass * transition(j, sn);
      }
    }
    d.swap(next);
  }
  return {make_distribution(ground, occ), window};
}

}  // namespace otmarl
