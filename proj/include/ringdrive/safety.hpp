#pragma once

#include <limits>

#include "ringdrive/action.hpp"

namespace ringdrive {

// Thresholds for the short-horizon safety rules. Times in seconds,
// distances in meters.
struct SafetyParams {
  double t_min = 3.0;        // minimum time gap required on top of d_tv_min
  double d_tv_min = 15.0;    // minimum standing gap to another vehicle
  double t_hard_brake = 2.0; // time-to-collision at or below which we hard-brake
  double t_brake = 3.0;      // time-to-collision at or below which we brake
  double t_accel = 8.0;      // traffic/baseline accelerate when TTC exceeds this
};

// Gap constraint: the gap to a vehicle must exceed d_tv_min even after
// t_min seconds of closing at v_closing. Strict inequality: an exactly
// minimal gap is not acceptable.
inline bool gap_ok(double gap, double v_closing, const SafetyParams& p) {
  return gap - p.t_min * v_closing > p.d_tv_min;
}

// Time to collision for a positive closing speed; no closing means no
// collision is pending.
inline double time_to_collision(double gap, double v_closing) {
  if (v_closing <= 0.0) return std::numeric_limits<double>::infinity();
  return gap / v_closing;
}

// Safe longitudinal fallback as a function of time to collision.
inline LongitudinalAction safe_longitudinal(double ttc, const SafetyParams& p) {
  if (ttc <= p.t_hard_brake) return LongitudinalAction::HardBrake;
  if (ttc <= p.t_brake) return LongitudinalAction::Brake;
  return LongitudinalAction::Maintain;
}

// Car-following rule used by traffic and the non-learning baselines: the
// safe fallback above, plus acceleration once the road ahead is clear.
inline LongitudinalAction idm_longitudinal(double ttc, const SafetyParams& p) {
  if (ttc > p.t_accel) return LongitudinalAction::Accelerate;
  return safe_longitudinal(ttc, p);
}

}  // namespace ringdrive
