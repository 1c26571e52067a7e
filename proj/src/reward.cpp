#include "ringdrive/reward.hpp"

#include <cmath>

namespace ringdrive {

double reward_speed(double v, double v_des) {
  double e = v - v_des;
  return std::exp(-e * e / 10.0) - 1.0;
}

double reward_lane(double y, double y_des) {
  double e = y - y_des;
  return std::exp(-e * e / 10.0) - 1.0;
}

double reward_headway(double d_lead, double d_safe) {
  if (d_lead >= d_safe) return 0.0;
  double e = d_lead - d_safe;
  return std::exp(-e * e / (10.0 * d_safe)) - 1.0;
}

double total_reward(const AffordanceVector& next, bool collision, const RewardConfig& cfg) {
  if (collision) return cfg.r_col;
  double v = next.ego_v_x();
  double rv = reward_speed(v, cfg.v_des);
  double ry = reward_lane(next.ego_y(), cfg.y_des);
  double rx = reward_headway(next.d_x(Slot::ClFront), cfg.d_safe(v));
  return cfg.weight_v * rv + cfg.weight_y * ry + cfg.weight_x * rx;
}

}  // namespace ringdrive
