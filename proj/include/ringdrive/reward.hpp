#pragma once

#include "ringdrive/affordance.hpp"

namespace ringdrive {

// Shaped reward configuration. Every term peaks at 0, so the best attainable
// reward per decision is 0 and any deviation is penalized.
struct RewardConfig {
  double v_des = 30.0;        // desired speed (m/s)
  double y_des = 5.7;         // desired lateral position: center-lane center (m)
  double headway_min = 1.3;   // desired headway (s) behind the preceding car
  double d_safe_floor = 20.0; // lower bound on the desired gap (m)
  double r_col = -10.0;       // collision reward
  double weight_v = 1.0 / 3.0;
  double weight_y = 1.0 / 3.0;
  double weight_x = 1.0 / 3.0;

  double d_safe(double v) const {
    double d = headway_min * v;
    return d > d_safe_floor ? d : d_safe_floor;
  }
};

// Speed term: exp(-(v - v_des)^2 / 10) - 1.
double reward_speed(double v, double v_des);

// Lane-position term: exp(-(y - y_des)^2 / 10) - 1.
double reward_lane(double y, double y_des);

// Headway term: zero beyond the desired gap, otherwise
// exp(-(d - d_safe)^2 / (10 * d_safe)) - 1.
double reward_headway(double d_lead, double d_safe);

// Weighted total over the post-step affordance view; a collision overrides
// everything with r_col.
double total_reward(const AffordanceVector& next, bool collision, const RewardConfig& cfg);

}  // namespace ringdrive
