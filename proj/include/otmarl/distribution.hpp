#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "otmarl/errors.hpp"
#include "otmarl/ground_space.hpp"

namespace otmarl {

/// Probability distribution over the points of a GroundSpace. Weights are
/// stored in full support representation (zeros allowed) and always sum to
/// one after construction.
struct DiscreteDistribution {
  GroundPtr ground;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
  double total_mass() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }

  /// Indices with strictly positive mass.
  std::vector<std::size_t> support() const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < weights.size(); ++i)
      if (weights[i] > 0.0) idx.push_back(i);
    return idx;
  }
};

/// Builds a distribution from raw nonnegative weights, normalizing them to
/// total mass one. Throws NegativeWeight on any negative or non-finite entry
/// and EmptyMass when nothing is positive.
inline DiscreteDistribution make_distribution(GroundPtr ground,
                                              std::vector<double> raw_weights) {
  if (!ground) throw InvalidArgument("make_distribution: null ground");
  if (raw_weights.size() != ground->point_count())
    throw DimensionMismatch("make_distribution: expected " +
                            std::to_string(ground->point_count()) + " weights, got " +
                            std::to_string(raw_weights.size()));
  double total = 0.0;
  for (double w : raw_weights) {
    if (!std::isfinite(w) || w < 0.0)
      throw NegativeWeight("make_distribution: weights must be finite and nonnegative");
    total += w;
  }
  if (total <= 0.0) throw EmptyMass("make_distribution: total mass is zero");
  for (double& w : raw_weights) w /= total;
  return DiscreteDistribution{std::move(ground), std::move(raw_weights)};
}

inline DiscreteDistribution uniform_distribution(GroundPtr ground) {
  if (!ground) throw InvalidArgument("uniform_distribution: null ground");
  const std::size_t n = ground->point_count();
  return make_distribution(std::move(ground), std::vector<double>(n, 1.0));
}

inline DiscreteDistribution point_mass(GroundPtr ground, std::size_t index) {
  if (!ground) throw InvalidArgument("point_mass: null ground");
  if (index >= ground->point_count())
    throw DimensionMismatch("point_mass: index out of range");
  std::vector<double> w(ground->point_count(), 0.0);
  w[index] = 1.0;
  return DiscreteDistribution{std::move(ground), std::move(w)};
}

inline void require_same_ground(const DiscreteDistribution& a,
                                const DiscreteDistribution& b, const char* where) {
  if (a.weights.size() != b.weights.size() || !same_ground(a.ground, b.ground))
    throw DimensionMismatch(std::string(where) +
                            ": distributions live on different ground spaces");
}

}  // namespace otmarl
