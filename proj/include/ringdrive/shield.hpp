#pragma once

#include <optional>

#include "ringdrive/affordance.hpp"
#include "ringdrive/safety.hpp"

namespace ringdrive {

// Which safety rule overrode the proposed action, if any. GapRule guards the
// gap to the preceding car, EdgeLaneRule blocks lane changes off the road,
// LaneChangeMonitorRule gates new lane changes and aborts running ones.
enum class ShieldRule { None, GapRule, EdgeLaneRule, LaneChangeMonitorRule };

const char* to_string(ShieldRule r);

struct ShieldVerdict {
  Action executed;
  bool overridden = false;
  ShieldRule rule = ShieldRule::None;
};

// What the shield needs to know about the ego beyond the affordance vector:
// its current lane and any in-progress lane change.
struct EgoContext {
  int lane = 0;
  struct InProgress {
    int target_lane = 0;
    int direction = 0;      // +1 changing left, -1 changing right
    bool aborting = false;  // committed return to the origin lane, not monitored
  };
  std::optional<InProgress> lane_change;

  static EgoContext from(const VehicleState& ego) {
    EgoContext c;
    c.lane = ego.lane;
    if (ego.lane_change) {
      c.lane_change = InProgress{ego.lane_change->target_lane, ego.v_y > 0.0 ? 1 : -1,
                                 ego.lane_change->aborting};
    }
    return c;
  }
};

// Screen a proposed action against the three safety rules, in order: edge
// lanes, lane-change gap monitoring, preceding-car gap. The affordance vector
// must be un-normalized. Re-checking an approved action never overrides it
// again, so the executed action is always a fixed point of the shield.
ShieldVerdict check_and_override(const AffordanceVector& aff, Action proposed,
                                 const EgoContext& ctx, const SafetyParams& p);

}  // namespace ringdrive
