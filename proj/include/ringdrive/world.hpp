#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "ringdrive/action.hpp"
#include "ringdrive/safety.hpp"

namespace ringdrive {

inline constexpr int kNumLanes = 3;

struct SimParams {
  double circumference = 2000.0;      // ring road length (m)
  double lane_width = 3.8;            // m
  double dt = 1.0;                    // decision/integration period (s)
  double lane_change_duration = 5.0;  // full lane change takes this long (s)
  double accel_nominal = 2.0;         // +/- for Accelerate/Brake (m/s^2)
  double accel_hard = 4.0;            // HardBrake (m/s^2)
  double vehicle_length = 5.0;        // m
  double vehicle_width = 2.0;         // m
  double ego_v_max = 32.0;            // m/s
  double ego_speed_init = 25.0;       // m/s
  double traffic_v_max_min = 20.0;    // traffic v_max drawn uniformly from
  double traffic_v_max_max = 32.0;    //   [traffic_v_max_min, traffic_v_max_max]
  double traffic_lane_change_prob = 0.02;  // per vehicle per step
  double spawn_range = 250.0;         // traffic placed within +/- this arc of ego (m)
  double spawn_clearance = 2.0;       // extra bumper gap required at spawn (m)
  int max_traffic = 30;

  int lane_change_steps() const {
    return static_cast<int>(std::ceil(lane_change_duration / dt));
  }
  double lane_change_speed() const { return lane_width / lane_change_duration; }
  double road_width() const { return kNumLanes * lane_width; }
};

// Acceleration for a longitudinal command.
inline double longitudinal_accel(LongitudinalAction a, const SimParams& p) {
  switch (a) {
    case LongitudinalAction::Maintain: return 0.0;
    case LongitudinalAction::Accelerate: return p.accel_nominal;
    case LongitudinalAction::Brake: return -p.accel_nominal;
    case LongitudinalAction::HardBrake: return -p.accel_hard;
  }
  return 0.0;
}

// In-progress lane change bookkeeping. steps_remaining counts the lateral
// integration steps left until the vehicle sits on the target lane center.
struct LaneChange {
  int target_lane = 0;
  int steps_remaining = 0;
  // An aborted change is committed to returning to its origin lane: it is
  // not monitored again and further abort commands are ignored, so a car
  // cannot oscillate indefinitely between two lanes.
  bool aborting = false;
};

struct VehicleState {
  int id = 0;
  double x = 0.0;    // arc position along the ring (m), in [0, circumference)
  double y = 0.0;    // lateral position from the right road edge (m)
  double v_x = 0.0;  // longitudinal speed (m/s), never negative
  double v_y = 0.0;  // lateral speed (m/s), nonzero only while changing lane
  int lane = 0;      // 0 = rightmost
  double v_max = 32.0;
  double length = 5.0;
  double width = 2.0;
  std::optional<LaneChange> lane_change;
};

struct WorldState {
  std::vector<VehicleState> vehicles;  // vehicles[0] is the ego
  double circumference = 2000.0;
  double lane_width = 3.8;
  std::int64_t time_index = 0;

  VehicleState& ego() { return vehicles.front(); }
  const VehicleState& ego() const { return vehicles.front(); }
};

// Wrap an arc position into [0, circumference).
double wrap_position(double x, double circumference);

// Wrap a signed arc offset into (-circumference/2, circumference/2].
double wrap_signed(double dx, double circumference);

inline double lane_center(int lane, double lane_width) {
  return (lane + 0.5) * lane_width;
}

// Lanes a vehicle currently occupies: its own lane, plus the other lane of an
// in-progress lane change (source or target, whichever the lane field is not).
// Returns the count and writes lanes[0..count).
int occupied_lanes(const VehicleState& v, int lanes_out[2]);

// One longitudinal integration step: position advances with the current
// speed, then speed responds to the acceleration, clamped to [0, v_max].
VehicleState step_longitudinal(const VehicleState& s, double a_x, double dt,
                               double circumference);

// One lateral integration step with commanded lateral speed v_y. Updates the
// lane field when the vehicle crosses into the target lane's band, counts
// down an in-progress maneuver, and snaps onto the target center on the final
// step. Positions are clamped to the road; *clamped reports if that happened.
VehicleState step_lateral(const VehicleState& s, double v_y, double dt,
                          double lane_width, bool* clamped = nullptr);

// Signed bumper-to-bumper arc distance from one vehicle to another, positive
// if `to` is ahead of `from` in the direction of travel. Overlapping
// footprints report zero rather than a flipped sign.
double rel_distance(const VehicleState& from, const VehicleState& to,
                    double circumference);

// First pair of overlapping vehicle footprints (by vehicle id), if any.
std::optional<std::pair<int, int>> detect_collision(const WorldState& w);

// First pair whose longitudinal order flipped between the two states while
// the footprints overlapped laterally at either end: a pass-through that the
// end-of-step overlap check alone would miss at high closing speed.
std::optional<std::pair<int, int>> detect_passthrough(const WorldState& before,
                                                      const WorldState& after);

// Fresh ring world holding only the ego, centered in the middle lane.
WorldState make_ring_world(const SimParams& p);

// Place n_cars traffic vehicles within +/- spawn_range of the ego by
// rejection sampling; throws if n_cars is invalid or placement fails.
void spawn_traffic(std::mt19937_64& rng, int n_cars, WorldState& w, const SimParams& p);

// Traffic controller: car-following longitudinal action by TTC thresholds,
// plus occasional lane changes gated (and monitored) by the gap rule.
Action traffic_policy(const VehicleState& v, const WorldState& w, std::mt19937_64& rng,
                      const SimParams& p, const SafetyParams& sp);

struct StepOutcome {
  std::optional<std::pair<int, int>> collision;  // vehicle ids, if any overlap
  bool ego_lateral_clamped = false;
};

// Advance the whole world by one step: the ego executes ego_action, traffic
// vehicles act per traffic_policy, all kinematics update simultaneously from
// the pre-step snapshot, then collisions are checked. cap_ego extends the
// traffic speed governor to the ego as well — used when the ego runs a
// scripted baseline policy that drives like traffic, never for the learner.
StepOutcome step_world(WorldState& w, Action ego_action, std::mt19937_64& rng,
                       const SimParams& p, const SafetyParams& sp, bool cap_ego = false);

}  // namespace ringdrive
