#pragma once
// Non-stationarity handling: the Wasserstein shift between an agent's
// consecutive occupancy windows, a bounded monotone map from that shift to a
// learning rate, and the rate-modulated tabular policy update.

#include <cmath>
#include <cstddef>
#include <deque>

#include "otmarl/exact_ot.hpp"
#include "otmarl/occupancy.hpp"

namespace otmarl {

// Rolling buffer of one agent's recent occupancy measures, newest last.
// Single writer (the training loop); measurement calls only read.
class DriftTracker {
 public:
  DriftTracker(GroundPtr ground, double p, std::size_t capacity = 8)
      : ground_(std::move(ground)), p_(p), capacity_(capacity) {
    if (!ground_) throw InvalidArgument("DriftTracker: null ground");
    if (capacity_ < 2) throw InvalidArgument("DriftTracker: capacity must be >= 2");
    detail::require_exponent(p_, "DriftTracker");
  }

  void push(OccupancyMeasure measure) {
    if (!same_ground(measure.distribution.ground, ground_))
      throw DimensionMismatch("DriftTracker: measure lives on a different ground");
    buffer_.push_back(std::move(measure));
    if (buffer_.size() > capacity_) buffer_.pop_front();
  }

  std::size_t size() const { return buffer_.size(); }
  const OccupancyMeasure& recent(std::size_t back = 0) const {
    if (back >= buffer_.size())
      throw InsufficientHistory("DriftTracker: not enough measures buffered");
    return buffer_[buffer_.size() - 1 - back];
  }
  double exponent() const { return p_; }
  const GroundPtr& ground() const { return ground_; }

 private:
  GroundPtr ground_;
  double p_;
  std::size_t capacity_;
  std::deque<OccupancyMeasure> buffer_;
};

// Shift between the two most recent occupancy windows, solved exactly.
inline double measure_drift(const DriftTracker& tracker) {
  if (tracker.size() < 2)
    throw InsufficientHistory("measure_drift: need at least two measures");
  return wasserstein(tracker.recent(1).distribution, tracker.recent(0).distribution,
                     tracker.exponent());
}

// Learning-rate map parameters: rates live in [alpha_min, alpha_max] and
// w_scale sets how much drift (in ground-distance units) it takes to move
// most of the way from the floor to the ceiling.
struct RateSchedule {
  double alpha_min;
  double alpha_max;
  double w_scale;

  RateSchedule(double amin, double amax, double wscale)
      : alpha_min(amin), alpha_max(amax), w_scale(wscale) {
    if (!(amin > 0.0) || !std::isfinite(amin))
      throw InvalidArgument("RateSchedule: alpha_min must be positive");
    if (!(amax >= amin) || !std::isfinite(amax))
      throw InvalidArgument("RateSchedule: need alpha_min <= alpha_max");
    if (!(wscale > 0.0) || !std::isfinite(wscale))
      throw InvalidArgument("RateSchedule: w_scale must be positive");
  }
};

// f(w) = alpha_min + (alpha_max - alpha_min) * (1 - exp(-w / w_scale)):
// monotone non-decreasing, f(0) = alpha_min, asymptote alpha_max.
inline double adapt_rate(const RateSchedule& schedule, double drift) {
  if (!(drift >= 0.0)) throw NegativeDrift("adapt_rate: drift must be >= 0");
  const double span = schedule.alpha_max - schedule.alpha_min;
  const double rate =
      schedule.alpha_min + span * (1.0 - std::exp(-drift / schedule.w_scale));
  return std::min(rate, schedule.alpha_max);
}

// w_scale self-calibration: the median of drifts observed during a
// calibration run, so the schedule needs no per-environment hand-tuning.
// A zero median (frozen dynamics) falls back to 1 to keep w_scale positive.
inline double calibrate_w_scale(const std::vector<double>& calibration_drifts) {
  if (calibration_drifts.empty())
    throw InsufficientHistory("calibrate_w_scale: no calibration drifts");
  const double m = median(calibration_drifts);
  return m > 0.0 ? m : 1.0;
}

// logits' = logits + alpha * gradient. Softmax rows stay valid because the
// update keeps every entry finite; non-finite gradients are rejected before
// they can poison the table.
inline Matrix modulated_update(const Matrix& logits, const Matrix& gradient,
                               double alpha) {
  if (!logits.same_shape(gradient))
    throw DimensionMismatch("modulated_update: logits/gradient shape mismatch");
  if (!(alpha >= 0.0) || !std::isfinite(alpha))
    throw InvalidArgument("modulated_update: alpha must be finite and >= 0");
  if (!gradient.all_finite())
    throw NonFiniteGradient("modulated_update: gradient has non-finite entries");
  Matrix out = logits;
  for (std::size_t i = 0; i < out.data().size(); ++i)
    out.data()[i] += alpha * gradient.data()[i];
  return out;
}

}  // namespace otmarl
