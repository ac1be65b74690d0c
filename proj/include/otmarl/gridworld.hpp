#pragma once
// Deterministic, seedable multi-agent gridworld. Agents move simultaneously
// with no collision rule; blocked moves (off-grid or into an obstacle) keep
// the position; reward each step is the goal value of the cell occupied
// after the move. Reward switches reschedule the goal map at fixed episodes
// to create non-stationarity on demand.

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "otmarl/errors.hpp"
#include "otmarl/matrix.hpp"
#include "otmarl/occupancy.hpp"

namespace otmarl {

struct GoalSpec {
  GridPos cell;
  double value = 1.0;
};

// From `episode` onward the goal map is replaced wholesale by `goals`.
struct SwitchEvent {
  std::size_t episode = 0;
  std::vector<GoalSpec> goals;
};

struct Gridworld {
  int width = 6;
  int height = 6;
  std::vector<GoalSpec> goals;
  std::vector<GridPos> obstacles;
  std::vector<SwitchEvent> switches;
  std::vector<GridPos> starts;
  std::size_t horizon = 40;
};

inline bool in_bounds(const Gridworld& world, const GridPos& pos) {
  return pos.x >= 0 && pos.x < world.width && pos.y >= 0 && pos.y < world.height;
}

inline bool is_obstacle(const Gridworld& world, const GridPos& pos) {
  for (const GridPos& cell : world.obstacles)
    if (cell == pos) return true;
  return false;
}

// Row-major cell index, matching StateActionSpace::grid enumeration.
inline std::size_t cell_index(const Gridworld& world, const GridPos& pos) {
  return static_cast<std::size_t>(pos.y) * static_cast<std::size_t>(world.width) +
         static_cast<std::size_t>(pos.x);
}

namespace detail {

inline void require_goal_map(const Gridworld& world, const std::vector<GoalSpec>& goals,
                             const char* where) {
  for (const GoalSpec& goal : goals) {
    if (!in_bounds(world, goal.cell))
      throw InvalidArgument(std::string(where) + ": goal cell out of bounds");
    if (!std::isfinite(goal.value))
      throw InvalidArgument(std::string(where) + ": goal value must be finite");
    if (is_obstacle(world, goal.cell))
      throw InvalidArgument(std::string(where) + ": goal placed on an obstacle");
  }
}

}  // namespace detail

// Validating constructor; every field of Gridworld may also be filled by
// hand, but run_episode assumes these checks have passed.
inline Gridworld make_gridworld(int width, int height, std::vector<GoalSpec> goals,
                                std::vector<GridPos> obstacles,
                                std::vector<SwitchEvent> switches,
                                std::vector<GridPos> starts, std::size_t horizon) {
  if (width <= 0 || height <= 0)
    throw InvalidArgument("make_gridworld: dimensions must be positive");
  if (horizon == 0) throw InvalidArgument("make_gridworld: horizon must be >= 1");
  Gridworld world;
  world.width = width;
  world.height = height;
  world.obstacles = std::move(obstacles);
  for (const GridPos& cell : world.obstacles)
    if (!in_bounds(world, cell))
      throw InvalidArgument("make_gridworld: obstacle out of bounds");
  detail::require_goal_map(world, goals, "make_gridworld");
  world.goals = std::move(goals);
  for (std::size_t i = 0; i < switches.size(); ++i) {
    if (i > 0 && switches[i].episode <= switches[i - 1].episode)
      throw InvalidArgument("make_gridworld: switch episodes must strictly increase");
    detail::require_goal_map(world, switches[i].goals, "make_gridworld switch");
  }
  world.switches = std::move(switches);
  for (const GridPos& start : starts) {
    if (!in_bounds(world, start))
      throw InvalidArgument("make_gridworld: start cell out of bounds");
    if (is_obstacle(world, start))
      throw InvalidArgument("make_gridworld: start cell on an obstacle");
  }
  world.starts = std::move(starts);
  world.horizon = horizon;
  return world;
}

// Goal map in force at the given episode: the base map, overridden wholesale
// by the last switch whose episode is <= the query.
inline const std::vector<GoalSpec>& active_goals(const Gridworld& world,
                                                 std::size_t episode) {
  const std::vector<GoalSpec>* current = &world.goals;
  for (const SwitchEvent& event : world.switches) {
    if (event.episode > episode) break;
    current = &event.goals;
  }
  return *current;
}

// The fixed action set, in index order: up and down move along -y/+y, left
// and right along -x/+x, stay holds position.
inline std::vector<std::string> grid_actions() {
  return {"up", "down", "left", "right", "stay"};
}

inline GridPos apply_action(const Gridworld& world, const GridPos& from,
                            std::size_t action) {
  static constexpr int kDx[5] = {0, 0, -1, 1, 0};
  static constexpr int kDy[5] = {-1, 1, 0, 0, 0};
  if (action >= 5) throw InvalidArgument("apply_action: unknown action index");
  GridPos next{from.x + kDx[action], from.y + kDy[action]};
  if (!in_bounds(world, next) || is_obstacle(world, next)) return from;
  return next;
}

// One tabular agent: per-state action logits, a grid position, a lifetime
// return counter, and its own random stream. Policies are the row softmax of
// the logits, so any finite table is a valid stochastic policy.
struct AgentState {
  Matrix logits;
  GridPos position;
  double cumulative_return = 0.0;
  std::mt19937_64 stream;
};

inline AgentState make_agent(const StateActionSpace& space, std::uint64_t seed) {
  AgentState agent;
  agent.logits = Matrix(space.state_count(), space.action_count(), 0.0);
  agent.stream.seed(seed);
  return agent;
}

namespace detail {

// splitmix64 finalizer: decorrelates the per-agent and per-episode streams
// derived from one base seed.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Uniform draw in [0, 1) from the top 53 bits, so sampling does not depend
// on any library distribution's implementation details.
inline double unit_draw(std::mt19937_64& stream) {
  return static_cast<double>(stream() >> 11) * 0x1.0p-53;
}

inline std::size_t sample_row(const Matrix& probs, std::size_t row,
                              std::mt19937_64& stream) {
  const double u = unit_draw(stream);
  double cumulative = 0.0;
  const std::size_t last = probs.cols() - 1;
  for (std::size_t a = 0; a < last; ++a) {
    cumulative += probs(row, a);
    if (u < cumulative) return a;
  }
  return last;
}

}  // namespace detail

// One episode of simultaneous play. The seed fully determines the outcome:
// every agent's stream is reseeded from it, positions reset to the start
// cells, and exactly world.horizon steps are taken. Returns one trajectory
// per agent recording (state before the move, action, reward after it).
inline std::vector<Trajectory> run_episode(const Gridworld& world,
                                           std::vector<AgentState>& agents,
                                           std::uint64_t seed,
                                           double explore_floor = 0.0) {
  if (agents.empty()) throw InvalidArgument("run_episode: no agents");
  if (!(explore_floor >= 0.0 && explore_floor < 1.0))
    throw InvalidArgument("run_episode: explore floor must lie in [0, 1)");
  if (world.starts.size() < agents.size())
    throw InvalidArgument("run_episode: fewer start cells than agents");
  const std::size_t n_agents = agents.size();
  const std::size_t n_cells =
      static_cast<std::size_t>(world.width) * static_cast<std::size_t>(world.height);

  std::vector<double> reward_of_cell(n_cells, 0.0);
  for (const GoalSpec& goal : world.goals)
    reward_of_cell[cell_index(world, goal.cell)] = goal.value;

  for (std::size_t i = 0; i < n_agents; ++i) {
    if (agents[i].logits.rows() != n_cells || agents[i].logits.cols() != 5)
      throw DimensionMismatch("run_episode: logits table does not match the grid");
    if (!agents[i].logits.all_finite())
      throw NonFiniteGradient("run_episode: logits must be finite");
    agents[i].position = world.starts[i];
    agents[i].stream.seed(detail::mix_seed(seed, i));
  }

  std::vector<Trajectory> out(n_agents);
  for (auto& traj : out) traj.steps.reserve(world.horizon);
  std::vector<Matrix> probs;
  probs.reserve(n_agents);
  for (const AgentState& agent : agents) probs.push_back(softmax_rows(agent.logits));
  if (explore_floor > 0.0) {
    // Behavior policy is a mixture with the uniform: the floor guarantees
    // every action a minimum sampling rate however saturated the table is,
    // without consuming extra random draws.
    for (Matrix& p : probs)
      for (std::size_t s = 0; s < p.rows(); ++s)
        for (std::size_t a = 0; a < p.cols(); ++a)
          p(s, a) = (1.0 - explore_floor) * p(s, a) +
                    explore_floor / static_cast<double>(p.cols());
  }

  std::vector<GridPos> next(n_agents);
  for (std::size_t t = 0; t < world.horizon; ++t) {
    for (std::size_t i = 0; i < n_agents; ++i) {
      const std::size_t state = cell_index(world, agents[i].position);
      const std::size_t action = detail::sample_row(probs[i], state, agents[i].stream);
      next[i] = apply_action(world, agents[i].position, action);
      const double reward = reward_of_cell[cell_index(world, next[i])];
      out[i].steps.push_back({state, action, reward});
    }
    for (std::size_t i = 0; i < n_agents; ++i) {
      agents[i].position = next[i];
      agents[i].cumulative_return += out[i].steps.back().reward;
    }
  }
  return out;
}

}  // namespace otmarl
