#pragma once
// Policy alignment: pairwise Wasserstein divergences between agents'
// occupancy measures, the summed alignment objective, direct descent on
// softmax-parameterized distributions, and potential-based reward shaping
// for use inside training loops.

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "otmarl/exact_ot.hpp"
#include "otmarl/matrix.hpp"
#include "otmarl/occupancy.hpp"
#include "otmarl/sinkhorn.hpp"

namespace otmarl {

// One tabular softmax policy per agent: logits are states x actions and the
// acting distribution is the row-wise softmax, so rows are always valid.
struct PolicySet {
  std::vector<Matrix> logits;

  std::size_t agent_count() const { return logits.size(); }
  Matrix probabilities(std::size_t agent) const {
    return softmax_rows(logits.at(agent));
  }
};

// Pairwise transport distances plus their sum over all ordered pairs.
// epsilon is zero when the entries came from the exact solver.
struct AlignmentObjective {
  Matrix pairwise;
  double total = 0.0;
  double p = 1.0;
  double epsilon = 0.0;
};

struct AlignmentMode {
  bool entropic = false;
  double epsilon = 0.0;

  static AlignmentMode exact() { return {false, 0.0}; }
  static AlignmentMode with_entropy(double epsilon) { return {true, epsilon}; }
};

// W_p between every pair of measures. Exact mode solves each unordered pair
// once and mirrors it. Entropic mode solves both ordered directions and
// averages them, cancelling the solver's sub-tolerance asymmetry.
inline AlignmentObjective pairwise_wasserstein(
    const std::vector<OccupancyMeasure>& measures, const GroundPtr& ground,
    double p, AlignmentMode mode = AlignmentMode::exact()) {
  const std::size_t n_agents = measures.size();
  if (n_agents < 2)
    throw InvalidArgument("pairwise_wasserstein: need at least two measures");
  for (const auto& m : measures)
    if (!same_ground(m.distribution.ground, ground))
      throw DimensionMismatch("pairwise_wasserstein: measure on a different ground");

  AlignmentObjective out;
  out.pairwise = Matrix(n_agents, n_agents, 0.0);
  out.p = p;
  out.epsilon = mode.entropic ? mode.epsilon : 0.0;
  for (std::size_t i = 0; i < n_agents; ++i) {
    for (std::size_t j = i + 1; j < n_agents; ++j) {
      double w;
      if (mode.entropic) {
        auto forward = sinkhorn_ot(measures[i].distribution,
                                   measures[j].distribution, p, mode.epsilon);
        auto backward = sinkhorn_ot(measures[j].distribution,
                                    measures[i].distribution, p, mode.epsilon);
        w = 0.5 * (forward.plan.cost_value + backward.plan.cost_value);
      } else {
        w = wasserstein(measures[i].distribution, measures[j].distribution, p);
      }
      out.pairwise(i, j) = w;
      out.pairwise(j, i) = w;
      out.total += 2.0 * w;
    }
  }
  return out;
}

// Debiased entropic alignment objective over softmax-parameterized
// distributions q_k and its gradient on the logits. The per-pair term is the
// entropic transport value minus half of each self term, which vanishes with
// zero gradient when the distributions coincide; the raw entropic value does
// neither. Gradients assemble the solver's dual potentials (the log-weight
// parts cancel between the pair and self terms) and pass through the softmax
// Jacobian, which also absorbs the potentials' additive constants.
struct AlignmentGradient {
  double objective = 0.0;
  std::vector<std::vector<double>> logit_gradients;
};

inline AlignmentGradient align_objective_and_gradient(
    const std::vector<std::vector<double>>& logits, const GroundPtr& ground,
    double p, double epsilon, double tol = 1e-9, int max_iter = 200000) {
  const std::size_t n_agents = logits.size();
  if (n_agents < 2)
    throw InvalidArgument("align_objective_and_gradient: need >= 2 agents");
  if (!ground) throw InvalidArgument("align_objective_and_gradient: null ground");
  const std::size_t n = ground->point_count();

  std::vector<DiscreteDistribution> q;
  q.reserve(n_agents);
  for (const auto& theta : logits) {
    if (theta.size() != n)
      throw DimensionMismatch("align_objective_and_gradient: logit length");
    q.push_back(make_distribution(ground, softmax(theta)));
  }

  auto solve = [&](std::size_t i, std::size_t j) {
    auto r = sinkhorn_ot(q[i], q[j], p, epsilon, tol, max_iter);
    if (!r.report.converged)
      throw StaleDuals("align_objective_and_gradient: pair solve did not converge");
    return r;
  };

  std::vector<SinkhornResult> self(n_agents);
  std::vector<double> self_value(n_agents);
  for (std::size_t k = 0; k < n_agents; ++k) {
    self[k] = solve(k, k);
    self_value[k] = entropic_value(self[k]);
  }

  double total = 0.0;
  std::vector<std::vector<double>> grad_q(n_agents, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n_agents; ++i) {
    for (std::size_t j = i + 1; j < n_agents; ++j) {
      auto r = solve(i, j);
      const double debiased =
          entropic_value(r) - 0.5 * (self_value[i] + self_value[j]);
      total += 2.0 * debiased;
      for (std::size_t x = 0; x < n; ++x) {
        grad_q[i][x] += 2.0 * r.source_gradient_potential[x];
        grad_q[j][x] += 2.0 * r.target_gradient_potential[x];
      }
    }
  }
  const double self_factor = static_cast<double>(n_agents - 1);
  for (std::size_t k = 0; k < n_agents; ++k)
    for (std::size_t x = 0; x < n; ++x)
      grad_q[k][x] -= self_factor * (self[k].source_gradient_potential[x] +
                                     self[k].target_gradient_potential[x]);

  AlignmentGradient out;
  out.objective = total;
  out.logit_gradients.reserve(n_agents);
  for (std::size_t k = 0; k < n_agents; ++k)
    out.logit_gradients.push_back(softmax_pullback(q[k].weights, grad_q[k]));
  return out;
}

struct AlignTraceRow {
  std::size_t step = 0;
  double objective = 0.0;
  double step_size = 0.0;
};

struct AlignDescentResult {
  std::vector<std::vector<double>> parameters;
  std::vector<AlignTraceRow> trace;
  bool converged = false;
};

// Gradient descent on the debiased alignment objective with a halving line
// search: each step starts at step0 and halves until the objective strictly
// decreases, so the recorded trace never increases at an accepted step.
// Stops early when the gradient vanishes or no descent direction remains at
// the line search's resolution.
inline AlignDescentResult align_descent(std::vector<std::vector<double>> initial,
                                        const GroundPtr& ground, double p,
                                        double epsilon,
                                        std::size_t max_steps = 100,
                                        double step0 = 0.1) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw BadRegularization("align_descent: entropic mode requires epsilon > 0");
  if (!(step0 > 0.0) || !std::isfinite(step0))
    throw InvalidArgument("align_descent: step0 must be positive");

  AlignDescentResult result;
  result.parameters = std::move(initial);
  auto eval = align_objective_and_gradient(result.parameters, ground, p, epsilon);
  result.trace.push_back({0, eval.objective, 0.0});

  constexpr double kGradFloor = 1e-10;
  constexpr double kStepFloor = 1e-14;
  for (std::size_t step = 1; step <= max_steps; ++step) {
    double grad_norm_sq = 0.0;
    for (const auto& g : eval.logit_gradients)
      for (double v : g) grad_norm_sq += v * v;
    if (std::sqrt(grad_norm_sq) <= kGradFloor) {
      result.converged = true;
      break;
    }

    // Require a decrease that clears floating-point fuzz: trial objectives
    // within rounding distance of the current one must not count as progress,
    // or the search would accept noise steps at an exact minimum.
    const double slack = 1e-12 * std::max(1.0, std::abs(eval.objective));
    double s = step0;
    bool accepted = false;
    std::vector<std::vector<double>> trial;
    AlignmentGradient trial_eval;
    while (s >= kStepFloor) {
      trial = result.parameters;
      for (std::size_t k = 0; k < trial.size(); ++k)
        for (std::size_t x = 0; x < trial[k].size(); ++x)
          trial[k][x] -= s * eval.logit_gradients[k][x];
      trial_eval = align_objective_and_gradient(trial, ground, p, epsilon);
      if (trial_eval.objective < eval.objective - slack) {
        accepted = true;
        break;
      }
      s *= 0.5;
    }
    if (!accepted) {
      result.converged = true;  // stationary at the line search's resolution
      break;
    }
    result.parameters = std::move(trial);
    eval = std::move(trial_eval);
    result.trace.push_back({step, eval.objective, s});
  }
  return result;
}

// Potential-based shaping signal for one agent: beta times the sum over
// other agents of this agent's mass-free source potential, centered to mean
// zero over the ground and normalized by the ground diameter. Subtracting it
// from the environment reward pushes the policy away from regions that
// inflate the pairwise distances. The mass-free flavor keeps the signal
// finite at never-visited pairs; the diameter normalization makes beta a
// dimensionless knob on the per-step reward scale instead of inheriting the
// ground's cost units, which would let wide grounds drown the reward signal.
inline std::vector<double> shaping_penalty(
    std::size_t agent, const std::vector<OccupancyMeasure>& measures,
    const GroundPtr& ground, double p, double epsilon, double beta,
    double tol = 1e-8, int max_iter = 10000) {
  if (!(beta >= 0.0) || !std::isfinite(beta))
    throw InvalidArgument("shaping_penalty: beta must be finite and >= 0");
  if (agent >= measures.size())
    throw InvalidArgument("shaping_penalty: agent index out of range");
  if (measures.size() < 2)
    throw InvalidArgument("shaping_penalty: need at least two measures");
  for (const auto& m : measures)
    if (!same_ground(m.distribution.ground, ground))
      throw DimensionMismatch("shaping_penalty: measure on a different ground");

  const std::size_t n = ground->point_count();
  std::vector<double> penalty(n, 0.0);
  if (beta == 0.0) return penalty;
  const double diameter = ground->cost().max_entry();
  const double unit = diameter > 0.0 ? diameter : 1.0;

  for (std::size_t j = 0; j < measures.size(); ++j) {
    if (j == agent) continue;
    auto r = sinkhorn_ot(measures[agent].distribution, measures[j].distribution,
                         p, epsilon, tol, max_iter);
    if (!r.report.converged)
      throw StaleDuals("shaping_penalty: pair solve did not converge");
    double mean = 0.0;
    for (double v : r.source_massfree_potential) mean += v;
    mean /= static_cast<double>(n);
    for (std::size_t x = 0; x < n; ++x)
      penalty[x] += beta * (r.source_massfree_potential[x] - mean) / unit;
  }
  return penalty;
}

}  // namespace otmarl
