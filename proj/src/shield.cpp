#include "ringdrive/shield.hpp"

#include <algorithm>

namespace ringdrive {

const char* to_string(ShieldRule r) {
  switch (r) {
    case ShieldRule::None: return "None";
    case ShieldRule::GapRule: return "GapRule";
    case ShieldRule::EdgeLaneRule: return "EdgeLaneRule";
    case ShieldRule::LaneChangeMonitorRule: return "LaneChangeMonitorRule";
  }
  return "?";
}

namespace {

// Gap rule for the front occupant of a slot. Closing speed is ego minus
// neighbor, i.e. the negated relative speed stored in the affordance.
bool front_gap_ok(const AffordanceVector& aff, Slot s, const SafetyParams& p) {
  return gap_ok(aff.d_x(s), -aff.v_x(s), p);
}

// Gap rule for the rear occupant of a slot; closing speed is neighbor minus
// ego, the stored relative speed itself.
bool rear_gap_ok(const AffordanceVector& aff, Slot s, const SafetyParams& p) {
  return gap_ok(-aff.d_x(s), aff.v_x(s), p);
}

Slot front_slot_for(int lane_delta) {
  return lane_delta == 0 ? Slot::ClFront : (lane_delta < 0 ? Slot::RlFront : Slot::LlFront);
}

Slot rear_slot_for(int lane_delta) {
  return lane_delta == 0 ? Slot::ClRear : (lane_delta < 0 ? Slot::RlRear : Slot::LlRear);
}

}  // namespace

ShieldVerdict check_and_override(const AffordanceVector& aff, Action proposed,
                                 const EgoContext& ctx, const SafetyParams& p) {
  Action exec = proposed;
  ShieldRule fired = ShieldRule::None;
  auto note = [&](ShieldRule r) {
    if (fired == ShieldRule::None) fired = r;
  };

  // Which lane change (if any) survives to be gap-checked below.
  std::optional<int> monitor_target;
  int monitor_dir = 0;

  if (!ctx.lane_change) {
    // Rule: no lane changes off the road edges.
    if (exec.lateral == LateralAction::ChangeLeft) {
      if (ctx.lane >= kNumLanes - 1) {
        exec.lateral = LateralAction::Keep;
        note(ShieldRule::EdgeLaneRule);
      } else {
        monitor_target = ctx.lane + 1;
        monitor_dir = 1;
      }
    } else if (exec.lateral == LateralAction::ChangeRight) {
      if (ctx.lane <= 0) {
        exec.lateral = LateralAction::Keep;
        note(ShieldRule::EdgeLaneRule);
      } else {
        monitor_target = ctx.lane - 1;
        monitor_dir = -1;
      }
    }
  } else if (!ctx.lane_change->aborting) {
    // A proposal against the running maneuver is a voluntary abort and needs
    // no gap check; anything else means the maneuver continues and the
    // monitor below re-checks it. An aborting maneuver is already committed
    // to returning and is never re-checked.
    int dir = ctx.lane_change->direction;
    LateralAction abort_cmd = dir > 0 ? LateralAction::ChangeRight : LateralAction::ChangeLeft;
    if (exec.lateral != abort_cmd) {
      monitor_target = ctx.lane_change->target_lane;
      monitor_dir = dir;
    }
  }

  // Rule: a proposed or in-progress lane change requires the gap rule to
  // hold against the preceding car and the front and rear cars in the target
  // lane. A new change is not started; a running one is aborted.
  if (monitor_target) {
    int delta = *monitor_target - ctx.lane;
    bool ok = front_gap_ok(aff, Slot::ClFront, p) &&
              front_gap_ok(aff, front_slot_for(delta), p) &&
              rear_gap_ok(aff, rear_slot_for(delta), p);
    if (!ok) {
      if (ctx.lane_change) {
        exec.lateral = monitor_dir > 0 ? LateralAction::ChangeRight : LateralAction::ChangeLeft;
      } else {
        exec.lateral = LateralAction::Keep;
      }
      note(ShieldRule::LaneChangeMonitorRule);
    }
  }

  // Rule: when the gap to the preceding car violates the gap rule and the
  // ego is closing in on it, the longitudinal command is replaced by the
  // safe fallback for the current time to collision.
  double gap = aff.d_x(Slot::ClFront);
  double closing = -aff.v_x(Slot::ClFront);
  if (closing > 0.0 && !gap_ok(gap, closing, p)) {
    LongitudinalAction safe = safe_longitudinal(time_to_collision(std::max(gap, 0.0), closing), p);
    if (exec.longitudinal != safe) {
      exec.longitudinal = safe;
      note(ShieldRule::GapRule);
    }
  }

  return ShieldVerdict{exec, !(exec == proposed), fired};
}

}  // namespace ringdrive
