#pragma once
// Training loops for the gridworld testbed: per-episode score-function
// updates with an exponential-moving-average return baseline, windowed
// occupancy estimates on a stride, drift-modulated or fixed learning rates,
// and optional alignment shaping. The shaping term enters as the exact
// policy gradient of the expected penalty, computed by forward/backward
// induction on the known grid dynamics rather than through the sampled
// return; at testbed scale the sampled estimator's variance swamps the
// penalty signal, while the closed form is deterministic and costs
// horizon x states x actions flops per agent per episode. Every metric
// the experiments read is logged per episode and per agent, and identical
// configs with identical seeds reproduce the numbers bitwise.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <string>
#include <utility>
#include <vector>

#include "otmarl/alignment.hpp"
#include "otmarl/drift.hpp"
#include "otmarl/errors.hpp"
#include "otmarl/gridworld.hpp"
#include "otmarl/occupancy.hpp"

namespace otmarl {

struct TrainConfig {
  Gridworld world;
  std::size_t agent_count = 3;
  std::size_t episodes = 400;
  std::size_t window = 20;  // episodes per occupancy estimate
  std::size_t stride = 10;  // cadence of occupancy/drift/shaping refreshes
  double beta = 0.0;        // alignment shaping weight; 0 disables shaping
  bool adaptive = false;    // drift-modulated rate on/off
  RateSchedule schedule{0.02, 0.5, 1.0};
  double fixed_alpha = 0.1;  // rate when adaptive is off or drift is unmeasured
  std::vector<std::uint64_t> seeds{1};
  double kappa = 0.5;    // action-mismatch term of the occupancy ground
  double p = 1.0;        // transport exponent for drift and alignment
  double epsilon = 0.05; // entropic regularization for shaping solves
  // L2 pull of the logits toward zero, added to the gradient as the
  // derivative of -(logit_decay/2)*||logits||^2. Zero keeps the plain
  // score-function estimator. A positive value bounds the logit gaps a
  // converged policy builds up, which keeps the policy responsive to reward
  // switches: a saturated softmax has gradient scale pi*(1-pi) ~ 0 and can
  // take hundreds of episodes to unlearn a dead route, silencing the drift
  // signal the adaptive rate schedule consumes. The pull is linear in the
  // gap, so it is the one term a deeply saturated table still feels.
  double logit_decay = 0.0;
  // Radius of the zero-force region for the logit pull. Inside the radius
  // the pull is zero, so convergence is the plain estimator's; outside it
  // grows linearly with the excess magnitude. A plain L2 pull (radius 0)
  // competes with route optimization at every scale and settles policies on
  // meandering paths; the leash only caps how deep saturation can get.
  double logit_leash = 0.0;
  // Decay of the exponential-moving-average return baseline. Larger values
  // remember further back: after a reward switch the baseline takes about
  // 1/(1 - baseline_decay) episodes to track the collapsed return, and the
  // advantage stays strongly negative for that whole stretch, which is what
  // pushes a converged policy off its dead route. 0.9 suits stationary
  // worlds; switch experiments use 0.95 so the correction window outlasts
  // the unlearning transient.
  double baseline_decay = 0.9;
  // Uniform mixture weight in the behavior policy. A converged softmax
  // explores only through its residual tail, which varies wildly from seed
  // to seed; after a reward switch a policy whose tail never reaches the
  // relocated goal sees identical returns on every trajectory, and a
  // score-function gradient of a constant objective is zero in expectation,
  // so the run never recovers. The floor puts a deterministic lower bound
  // on the exploration reach instead of leaving it to the seed. The update
  // stays unbiased: the gradient uses the mixture's own log-derivative.
  double epsilon_explore = 0.0;
};

// One metrics record per (episode, agent): the raw environment return of
// that episode, plus the drift, learning rate, and mean pairwise alignment
// distance in force while it ran (zero until first measured).
struct MetricsRow {
  std::size_t episode = 0;
  std::size_t agent = 0;
  double episode_return = 0.0;
  double drift = 0.0;
  double alpha = 0.0;
  double pairwise_mean = 0.0;
};

struct TrainRun {
  std::uint64_t seed = 0;
  std::vector<MetricsRow> metrics;   // episode-major, agent-minor
  std::vector<Matrix> final_logits;  // one table per agent
  Matrix last_pairwise;              // latest windowed alignment matrix
};

struct TrainResult {
  std::vector<TrainRun> runs;  // one per configured seed, in order
};

namespace detail {

inline void require_train_config(const TrainConfig& config) {
  if (config.agent_count == 0)
    throw InvalidArgument("train: agent count must be >= 1");
  if (config.world.starts.size() < config.agent_count)
    throw InvalidArgument("train: world must provide a start cell per agent");
  if (config.episodes == 0) throw InvalidArgument("train: episodes must be >= 1");
  if (config.window == 0 || config.stride == 0)
    throw InvalidArgument("train: window and stride must be >= 1");
  if (config.window > config.episodes)
    throw InvalidArgument("train: window cannot exceed the episode count");
  if (config.beta < 0.0 || !std::isfinite(config.beta))
    throw InvalidArgument("train: beta must be finite and >= 0");
  if (!(config.fixed_alpha >= 0.0) || !std::isfinite(config.fixed_alpha))
    throw InvalidArgument("train: fixed alpha must be finite and >= 0");
  if (config.seeds.empty()) throw InvalidArgument("train: no seeds configured");
  if (!(config.epsilon > 0.0))
    throw BadRegularization("train: epsilon must be positive");
  if (config.logit_decay < 0.0 || !std::isfinite(config.logit_decay))
    throw InvalidArgument("train: logit decay must be finite and >= 0");
  if (config.logit_leash < 0.0 || !std::isfinite(config.logit_leash))
    throw InvalidArgument("train: logit leash must be finite and >= 0");
  if (!(config.epsilon_explore >= 0.0 && config.epsilon_explore < 1.0))
    throw InvalidArgument("train: explore floor must lie in [0, 1)");
  if (!(config.baseline_decay >= 0.0 && config.baseline_decay < 1.0))
    throw InvalidArgument("train: baseline decay must lie in [0, 1)");
}

}  // namespace detail

// One seeded run of the full loop. Kept separate from train() so callers
// that pair seeds across configurations (the A/B experiments) can drive
// matching runs directly.
inline TrainRun train_single(const TrainConfig& config, std::uint64_t seed) {
  detail::require_train_config(config);
  const StateActionSpace space = StateActionSpace::grid(
      config.world.width, config.world.height, grid_actions());
  // Metric by construction; the cubic validator is skipped because the joint
  // space is large (cells x actions).
  const GroundPtr ground = build_ground(space, config.kappa, false);
  const std::size_t n_agents = config.agent_count;
  const std::size_t n_joint = space.joint_count();

  std::vector<AgentState> agents;
  agents.reserve(n_agents);
  for (std::size_t i = 0; i < n_agents; ++i)
    agents.push_back(make_agent(space, detail::mix_seed(seed, 1000 + i)));

  std::vector<DriftTracker> trackers(n_agents, DriftTracker(ground, config.p));
  std::vector<std::deque<Trajectory>> history(n_agents);
  std::vector<std::vector<double>> penalty(
      n_agents, std::vector<double>(n_joint, 0.0));
  std::vector<double> baseline(n_agents, 0.0);
  std::vector<bool> baseline_set(n_agents, false);
  std::vector<double> drift_now(n_agents, 0.0);
  std::vector<double> alpha_now(n_agents, config.fixed_alpha);
  std::vector<double> pairwise_mean_now(n_agents, 0.0);

  TrainRun run;
  run.seed = seed;
  run.metrics.reserve(config.episodes * n_agents);
  run.last_pairwise = Matrix(n_agents, n_agents, 0.0);

  // Successor table for the shaping gradient: moves depend only on bounds
  // and obstacles, both fixed for the life of the world, so one pass serves
  // every episode even across goal switches.
  const std::size_t n_states = space.state_count();
  const std::size_t n_actions = space.action_count();
  const std::size_t horizon = config.world.horizon;
  std::vector<std::size_t> successor(n_states * n_actions);
  for (std::size_t s = 0; s < n_states; ++s) {
    const GridPos pos{static_cast<int>(s % config.world.width),
                      static_cast<int>(s / config.world.width)};
    for (std::size_t a = 0; a < n_actions; ++a)
      successor[s * n_actions + a] =
          cell_index(config.world, apply_action(config.world, pos, a));
  }
  std::vector<double> state_dist((horizon + 1) * n_states);
  std::vector<double> penalty_value((horizon + 1) * n_states);
  std::vector<double> qrow(n_actions);

  Gridworld world = config.world;
  for (std::size_t ep = 0; ep < config.episodes; ++ep) {
    try {
      world.goals = active_goals(config.world, ep);
      std::vector<Trajectory> trajs = run_episode(
          world, agents, detail::mix_seed(seed, ep), config.epsilon_explore);

      for (std::size_t i = 0; i < n_agents; ++i) {
        double raw_return = 0.0;
        for (const TrajectoryStep& step : trajs[i].steps) raw_return += step.reward;

        if (!baseline_set[i]) {
          baseline[i] = raw_return;
          baseline_set[i] = true;
        }
        const double advantage = raw_return - baseline[i];
        baseline[i] = config.baseline_decay * baseline[i] +
                      (1.0 - config.baseline_decay) * raw_return;

        Matrix grad(space.state_count(), space.action_count(), 0.0);
        const Matrix probs = softmax_rows(agents[i].logits);
        if (config.epsilon_explore == 0.0) {
          for (const TrajectoryStep& step : trajs[i].steps) {
            grad(step.state, step.action) += advantage;
            for (std::size_t a = 0; a < space.action_count(); ++a)
              grad(step.state, a) -= advantage * probs(step.state, a);
          }
        } else {
          // Log-derivative of the mixture the actions were actually drawn
          // from: the softmax pattern scaled by how much of the sampled
          // action's probability the softmax (rather than the floor)
          // contributed.
          const double f = config.epsilon_explore;
          const double uni = f / static_cast<double>(n_actions);
          for (const TrajectoryStep& step : trajs[i].steps) {
            const double ps = probs(step.state, step.action);
            const double c = (1.0 - f) * ps / ((1.0 - f) * ps + uni);
            grad(step.state, step.action) += advantage * c;
            for (std::size_t a = 0; a < space.action_count(); ++a)
              grad(step.state, a) -= advantage * c * probs(step.state, a);
          }
        }

        if (config.logit_decay > 0.0) {
          for (std::size_t s = 0; s < n_states; ++s)
            for (std::size_t a = 0; a < n_actions; ++a) {
              const double l = agents[i].logits(s, a);
              const double excess =
                  std::max(0.0, std::abs(l) - config.logit_leash);
              grad(s, a) -= config.logit_decay * std::copysign(excess, l);
            }
        }

        if (config.beta > 0.0) {
          // Exact gradient of the expected total shaping penalty under the
          // current behavior policy. Forward pass: the state distribution at
          // each step, from this agent's start cell. Backward pass: the
          // expected penalty-to-go. The softmax policy gradient then weighs
          // each action by how much penalty its successor chain carries
          // relative to the state's softmax-mean, so the term steers routes
          // toward cells the other agents occupy instead of only reweighing
          // actions in place. With an exploration floor the dynamics run
          // under the mixture while the logit-derivative keeps the softmax
          // pattern scaled by the mixture weight.
          const double f = config.epsilon_explore;
          const Matrix* behav = &probs;
          Matrix mixed;
          if (f > 0.0) {
            mixed = probs;
            for (std::size_t s = 0; s < n_states; ++s)
              for (std::size_t a = 0; a < n_actions; ++a)
                mixed(s, a) = (1.0 - f) * mixed(s, a) +
                              f / static_cast<double>(n_actions);
            behav = &mixed;
          }
          std::fill(state_dist.begin(), state_dist.end(), 0.0);
          state_dist[cell_index(config.world, config.world.starts[i])] = 1.0;
          for (std::size_t t = 0; t < horizon; ++t)
            for (std::size_t s = 0; s < n_states; ++s) {
              const double mass = state_dist[t * n_states + s];
              if (mass == 0.0) continue;
              for (std::size_t a = 0; a < n_actions; ++a)
                state_dist[(t + 1) * n_states + successor[s * n_actions + a]] +=
                    mass * (*behav)(s, a);
            }
          std::fill(penalty_value.begin() + horizon * n_states,
                    penalty_value.begin() + (horizon + 1) * n_states, 0.0);
          for (std::size_t t = horizon; t-- > 0;)
            for (std::size_t s = 0; s < n_states; ++s) {
              double v = 0.0;
              for (std::size_t a = 0; a < n_actions; ++a)
                v += (*behav)(s, a) *
                     (penalty[i][s * n_actions + a] +
                      penalty_value[(t + 1) * n_states + successor[s * n_actions + a]]);
              penalty_value[t * n_states + s] = v;
            }
          for (std::size_t t = 0; t < horizon; ++t)
            for (std::size_t s = 0; s < n_states; ++s) {
              const double mass = state_dist[t * n_states + s];
              if (mass == 0.0) continue;
              double qbar = 0.0;
              for (std::size_t a = 0; a < n_actions; ++a) {
                qrow[a] =
                    penalty[i][s * n_actions + a] +
                    penalty_value[(t + 1) * n_states + successor[s * n_actions + a]];
                qbar += probs(s, a) * qrow[a];
              }
              for (std::size_t a = 0; a < n_actions; ++a)
                grad(s, a) -=
                    mass * (1.0 - f) * probs(s, a) * (qrow[a] - qbar);
            }
        }

        agents[i].logits = modulated_update(agents[i].logits, grad, alpha_now[i]);

        run.metrics.push_back({ep, i, raw_return, drift_now[i], alpha_now[i],
                               pairwise_mean_now[i]});

        history[i].push_back(std::move(trajs[i]));
        if (history[i].size() > config.window) history[i].pop_front();
      }

      const std::size_t done = ep + 1;
      if (done >= config.window && (done - config.window) % config.stride == 0) {
        std::vector<OccupancyMeasure> occupancies;
        occupancies.reserve(n_agents);
        for (std::size_t i = 0; i < n_agents; ++i) {
          std::vector<Trajectory> window_trajs(history[i].begin(), history[i].end());
          OccupancyMeasure occ =
              estimate_occupancy(window_trajs, space, ground,
                                 {done - config.window, ep});
          occupancies.push_back(occ);
          trackers[i].push(std::move(occ));
          if (trackers[i].size() >= 2) {
            drift_now[i] = measure_drift(trackers[i]);
            if (config.adaptive)
              alpha_now[i] = adapt_rate(config.schedule, drift_now[i]);
          }
        }
        if (n_agents >= 2) {
          const AlignmentObjective alignment =
              pairwise_wasserstein(occupancies, ground, config.p);
          run.last_pairwise = alignment.pairwise;
          for (std::size_t i = 0; i < n_agents; ++i) {
            double mean = 0.0;
            for (std::size_t j = 0; j < n_agents; ++j)
              if (j != i) mean += alignment.pairwise(i, j);
            pairwise_mean_now[i] = mean / static_cast<double>(n_agents - 1);
            if (config.beta > 0.0)
              penalty[i] = shaping_penalty(i, occupancies, ground, config.p,
                                           config.epsilon, config.beta, 1e-6, 20000);
          }
        }
      }
    } catch (const Error& failure) {
      throw Error("train: episode " + std::to_string(ep) + ": " + failure.what());
    }
  }

  for (AgentState& agent : agents) run.final_logits.push_back(std::move(agent.logits));
  return run;
}

// Every configured seed, in order, as independent runs.
inline TrainResult train(const TrainConfig& config) {
  detail::require_train_config(config);
  TrainResult result;
  result.runs.reserve(config.seeds.size());
  for (std::uint64_t seed : config.seeds)
    result.runs.push_back(train_single(config, seed));
  return result;
}

}  // namespace otmarl
