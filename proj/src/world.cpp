#include "ringdrive/world.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ringdrive {

const char* to_string(LongitudinalAction a) {
  switch (a) {
    case LongitudinalAction::Maintain: return "Maintain";
    case LongitudinalAction::Accelerate: return "Accelerate";
    case LongitudinalAction::Brake: return "Brake";
    case LongitudinalAction::HardBrake: return "HardBrake";
  }
  return "?";
}

const char* to_string(LateralAction a) {
  switch (a) {
    case LateralAction::Keep: return "Keep";
    case LateralAction::ChangeLeft: return "ChangeLeft";
    case LateralAction::ChangeRight: return "ChangeRight";
  }
  return "?";
}

double wrap_position(double x, double circumference) {
  double r = std::fmod(x, circumference);
  if (r < 0.0) r += circumference;
  if (r >= circumference) r -= circumference;  // fmod can round up to c
  return r;
}

double wrap_signed(double dx, double circumference) {
  double r = std::fmod(dx, circumference);
  if (r > circumference / 2.0) r -= circumference;
  if (r <= -circumference / 2.0) r += circumference;
  return r;
}

int occupied_lanes(const VehicleState& v, int lanes_out[2]) {
  lanes_out[0] = v.lane;
  if (!v.lane_change) return 1;
  // The lane field flips from source to target mid-maneuver; the other lane
  // of the pair is one step against the direction of lateral motion.
  int other;
  if (v.lane_change->target_lane != v.lane) {
    other = v.lane_change->target_lane;
  } else {
    other = v.lane - (v.v_y > 0.0 ? 1 : -1);
  }
  if (other == v.lane || other < 0 || other >= kNumLanes) return 1;
  lanes_out[1] = other;
  return 2;
}

VehicleState step_longitudinal(const VehicleState& s, double a_x, double dt,
                               double circumference) {
  VehicleState r = s;
  r.x = wrap_position(s.x + s.v_x * dt, circumference);
  r.v_x = std::clamp(s.v_x + a_x * dt, 0.0, s.v_max);
  return r;
}

VehicleState step_lateral(const VehicleState& s, double v_y, double dt,
                          double lane_width, bool* clamped) {
  VehicleState r = s;
  r.v_y = v_y;
  double y_new = s.y + v_y * dt;
  bool clip = false;
  double road = kNumLanes * lane_width;
  if (y_new < 0.0) { y_new = 0.0; clip = true; }
  if (y_new > road) { y_new = road; clip = true; }
  r.y = y_new;
  if (r.lane_change) {
    LaneChange lc = *r.lane_change;
    if (std::abs(y_new - lane_center(lc.target_lane, lane_width)) < lane_width / 2.0) {
      r.lane = lc.target_lane;
    }
    lc.steps_remaining -= 1;
    if (lc.steps_remaining <= 0) {
      r.y = lane_center(lc.target_lane, lane_width);
      r.lane = lc.target_lane;
      r.v_y = 0.0;
      r.lane_change.reset();
    } else {
      r.lane_change = lc;
    }
  }
  if (clamped) *clamped = clip;
  return r;
}

double rel_distance(const VehicleState& from, const VehicleState& to,
                    double circumference) {
  if (from.id == to.id) return 0.0;
  double dc = wrap_signed(to.x - from.x, circumference);
  double half_lengths = (from.length + to.length) / 2.0;
  if (dc > 0.0) return std::max(0.0, dc - half_lengths);
  if (dc < 0.0) return std::min(0.0, dc + half_lengths);
  return 0.0;
}

std::optional<std::pair<int, int>> detect_collision(const WorldState& w) {
  const auto& vs = w.vehicles;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    for (std::size_t j = i + 1; j < vs.size(); ++j) {
      double dx = std::abs(wrap_signed(vs[j].x - vs[i].x, w.circumference));
      double dy = std::abs(vs[j].y - vs[i].y);
      if (dx < (vs[i].length + vs[j].length) / 2.0 &&
          dy < (vs[i].width + vs[j].width) / 2.0) {
        return std::make_pair(vs[i].id, vs[j].id);
      }
    }
  }
  return std::nullopt;
}

std::optional<std::pair<int, int>> detect_passthrough(const WorldState& before,
                                                      const WorldState& after) {
  const auto& pre = before.vehicles;
  const auto& post = after.vehicles;
  for (std::size_t i = 0; i < pre.size(); ++i) {
    for (std::size_t j = i + 1; j < pre.size(); ++j) {
      double lat_limit = (pre[i].width + pre[j].width) / 2.0;
      if (std::abs(pre[j].y - pre[i].y) >= lat_limit &&
          std::abs(post[j].y - post[i].y) >= lat_limit) {
        continue;
      }
      double b = wrap_signed(pre[j].x - pre[i].x, before.circumference);
      double a = wrap_signed(post[j].x - post[i].x, after.circumference);
      // A sign flip near zero (not at the far side of the ring) means the
      // pair swapped order within one step.
      if ((b > 0.0) != (a > 0.0) &&
          std::abs(a) + std::abs(b) < before.circumference / 2.0) {
        return std::make_pair(pre[i].id, pre[j].id);
      }
    }
  }
  return std::nullopt;
}

WorldState make_ring_world(const SimParams& p) {
  WorldState w;
  w.circumference = p.circumference;
  w.lane_width = p.lane_width;
  VehicleState ego;
  ego.id = 0;
  ego.x = 0.0;
  ego.lane = 1;
  ego.y = lane_center(ego.lane, p.lane_width);
  ego.v_x = p.ego_speed_init;
  ego.v_max = p.ego_v_max;
  ego.length = p.vehicle_length;
  ego.width = p.vehicle_width;
  w.vehicles.push_back(ego);
  return w;
}

namespace {

// True if a vehicle with this footprint could sit at (x, lane) without
// coming within `clearance` of any existing vehicle.
bool placement_free(const WorldState& w, double x, int lane, double length,
                    double clearance) {
  for (const auto& v : w.vehicles) {
    if (v.lane != lane && !v.lane_change) {
      // different lane, lane-keeping: lateral separation is at least one
      // lane width minus the widths, which spawn never violates
      continue;
    }
    int lanes[2];
    int n = occupied_lanes(v, lanes);
    bool shares = false;
    for (int k = 0; k < n; ++k) shares |= lanes[k] == lane;
    if (!shares) continue;
    double dx = std::abs(wrap_signed(v.x - x, w.circumference));
    if (dx < (v.length + length) / 2.0 + clearance) return false;
  }
  return true;
}

// True if a car spawning at (x, lane) with speed v keeps a full following
// distance (one step of travel plus the speed cap's margin) to its nearest
// lane neighbors through the first step. The cap only bounds future speeds,
// so the spawn itself must rule out first-step rear-ends, and it must not
// drop a follower so close that the cap slams it to a near stop at once.
bool spawn_speed_ok(const WorldState& w, double x, int lane, double speed,
                    double length, const SimParams& p) {
  const VehicleState* front = nullptr;
  const VehicleState* rear = nullptr;
  double front_gap = 0.0, rear_gap = 0.0;
  for (const auto& v : w.vehicles) {
    int lanes[2];
    int n = occupied_lanes(v, lanes);
    bool shares = false;
    for (int k = 0; k < n; ++k) shares |= lanes[k] == lane;
    if (!shares) continue;
    double d = wrap_signed(v.x - x, w.circumference);
    double gap = std::abs(d) - (v.length + length) / 2.0;
    if (d >= 0.0) {
      if (!front || gap < front_gap) front = &v, front_gap = gap;
    } else {
      if (!rear || gap < rear_gap) rear = &v, rear_gap = gap;
    }
  }
  const double margin = 0.5;
  if (front && front_gap + (front->v_x - speed) * p.dt < speed * p.dt + margin) return false;
  if (rear && rear_gap + (speed - rear->v_x) * p.dt < rear->v_x * p.dt + margin) return false;
  return true;
}

}  // namespace

void spawn_traffic(std::mt19937_64& rng, int n_cars, WorldState& w, const SimParams& p) {
  if (n_cars < 1 || n_cars > p.max_traffic) {
    throw std::invalid_argument("spawn_traffic: car count out of range");
  }
  std::uniform_int_distribution<int> lane_dist(0, kNumLanes - 1);
  std::uniform_real_distribution<double> offset_dist(-p.spawn_range, p.spawn_range);
  std::uniform_real_distribution<double> v_max_dist(p.traffic_v_max_min, p.traffic_v_max_max);
  std::uniform_real_distribution<double> speed_frac_dist(0.7, 1.0);
  const int max_attempts = 1000;
  double ego_x = w.ego().x;
  for (int car = 0; car < n_cars; ++car) {
    bool placed = false;
    for (int attempt = 0; attempt < max_attempts && !placed; ++attempt) {
      int lane = lane_dist(rng);
      double x = wrap_position(ego_x + offset_dist(rng), w.circumference);
      double v_max = v_max_dist(rng);
      double v_x = speed_frac_dist(rng) * v_max;
      if (!placement_free(w, x, lane, p.vehicle_length, p.spawn_clearance) ||
          !spawn_speed_ok(w, x, lane, v_x, p.vehicle_length, p)) {
        continue;
      }
      VehicleState v;
      v.id = static_cast<int>(w.vehicles.size());
      v.x = x;
      v.lane = lane;
      v.y = lane_center(lane, p.lane_width);
      v.v_max = v_max;
      v.v_x = v_x;
      v.length = p.vehicle_length;
      v.width = p.vehicle_width;
      w.vehicles.push_back(v);
      placed = true;
    }
    if (!placed) throw std::runtime_error("spawn_traffic: no free placement found");
  }
}

namespace {

struct Neighbor {
  const VehicleState* vehicle = nullptr;
  double gap = 0.0;  // bumper-to-bumper, >= 0 ahead / <= 0 behind
};

// Nearest vehicle ahead of (or behind) `self` among occupants of `lane`.
Neighbor nearest_in_lane(const WorldState& w, const VehicleState& self, int lane,
                         bool ahead) {
  Neighbor best;
  for (const auto& v : w.vehicles) {
    if (v.id == self.id) continue;
    int lanes[2];
    int n = occupied_lanes(v, lanes);
    bool in_lane = false;
    for (int k = 0; k < n; ++k) in_lane |= lanes[k] == lane;
    if (!in_lane) continue;
    double d = rel_distance(self, v, w.circumference);
    if (ahead ? d < 0.0 : d >= 0.0) continue;
    if (!best.vehicle || std::abs(d) < std::abs(best.gap)) {
      best.vehicle = &v;
      best.gap = d;
    }
  }
  return best;
}

// Gap rule against the front and rear occupants of a target lane, as used to
// gate and monitor traffic lane changes.
bool target_lane_gaps_ok(const WorldState& w, const VehicleState& self, int target,
                         const SafetyParams& sp) {
  Neighbor front = nearest_in_lane(w, self, target, true);
  if (front.vehicle && !gap_ok(front.gap, self.v_x - front.vehicle->v_x, sp)) return false;
  Neighbor rear = nearest_in_lane(w, self, target, false);
  if (rear.vehicle && !gap_ok(-rear.gap, rear.vehicle->v_x - self.v_x, sp)) return false;
  return true;
}

// Extra gate for *starting* a traffic lane change: the merge must also be
// compatible with the one-step-headway governor, i.e. it may not put this car
// inside the rear neighbor's headway (slamming it to a crawl and launching a
// shock wave down the lane) or put this car inside its own new leader's
// headway. The ego's shield is not held to this; only scripted traffic is.
bool merge_headway_ok(const WorldState& w, const VehicleState& self, int target,
                      const SimParams& p) {
  const double margin = 0.5;
  Neighbor front = nearest_in_lane(w, self, target, true);
  if (front.vehicle &&
      front.gap + (front.vehicle->v_x - self.v_x) * p.dt < self.v_x * p.dt + margin) {
    return false;
  }
  Neighbor rear = nearest_in_lane(w, self, target, false);
  if (rear.vehicle) {
    double rear_gap = -rear.gap;
    double rear_v = rear.vehicle->v_x;
    if (rear_gap + (self.v_x - rear_v) * p.dt < rear_v * p.dt + margin) return false;
  }
  return true;
}

// Apply a lateral command to the maneuver bookkeeping and return the lateral
// speed to integrate this step. Starting a change off the road is a no-op.
double resolve_lateral(VehicleState& v, LateralAction lat, const SimParams& p) {
  double speed = p.lane_change_speed();
  if (v.lane_change) {
    int dir = v.v_y > 0.0 ? 1 : -1;
    if (v.lane_change->aborting) return dir * speed;  // committed to the return
    LateralAction abort_cmd = dir > 0 ? LateralAction::ChangeRight : LateralAction::ChangeLeft;
    if (lat == abort_cmd) {
      int total = p.lane_change_steps();
      int done = total - v.lane_change->steps_remaining;
      int origin = v.lane_change->target_lane - dir;
      if (done <= 0) {
        v.lane_change.reset();
        v.v_y = 0.0;
        return 0.0;
      }
      v.lane_change = LaneChange{origin, done, true};
      return -dir * speed;
    }
    return dir * speed;  // Keep or same-direction command: continue
  }
  if (lat == LateralAction::ChangeLeft && v.lane < kNumLanes - 1) {
    v.lane_change = LaneChange{v.lane + 1, p.lane_change_steps()};
    return speed;
  }
  if (lat == LateralAction::ChangeRight && v.lane > 0) {
    v.lane_change = LaneChange{v.lane - 1, p.lane_change_steps()};
    return -speed;
  }
  return 0.0;
}

// Upper bound on a traffic vehicle's next speed so it cannot run into any
// vehicle ahead. The discrete action set alone cannot guarantee this at a
// 1 s step, so the cap is applied on top of the chosen action (traffic only;
// the ego is free to misbehave). The bound assumes nothing about a front
// vehicle's next move (it may itself be capped to a dead stop), so the next
// displacement may never exceed the end-of-step gap minus the margin; the
// effect is a one-step-headway governor that keeps traffic gaps positive.
// Every car ahead is considered, not just the nearest: the nearest front may
// be the uncapped ego, which can slide laterally out from in front of a
// stopped car with no warning for whoever is following.
double rear_end_speed_cap(const WorldState& w, const VehicleState& self,
                          const SimParams& p) {
  double cap = std::numeric_limits<double>::infinity();
  int self_lanes[2];
  int n_self = occupied_lanes(self, self_lanes);
  for (const auto& v : w.vehicles) {
    if (v.id == self.id) continue;
    int lanes[2];
    int n = occupied_lanes(v, lanes);
    bool shares = false;
    for (int k = 0; k < n && !shares; ++k) {
      for (int m = 0; m < n_self; ++m) shares |= lanes[k] == self_lanes[m];
    }
    if (!shares) continue;
    double gap = rel_distance(self, v, w.circumference);
    if (gap < 0.0) continue;  // behind
    double gap_next = gap + (v.v_x - self.v_x) * p.dt;
    double margin = 0.5;
    cap = std::min(cap, std::max(0.0, (gap_next - margin) / p.dt));
  }
  return cap;
}

}  // namespace

Action traffic_policy(const VehicleState& v, const WorldState& w, std::mt19937_64& rng,
                      const SimParams& p, const SafetyParams& sp) {
  Action a;
  // Longitudinal: TTC thresholds against the nearest vehicle ahead in any
  // occupied lane.
  double ttc = std::numeric_limits<double>::infinity();
  int lanes[2];
  int n = occupied_lanes(v, lanes);
  for (int k = 0; k < n; ++k) {
    Neighbor front = nearest_in_lane(w, v, lanes[k], true);
    if (!front.vehicle) continue;
    ttc = std::min(ttc, time_to_collision(std::max(front.gap, 0.0),
                                          v.v_x - front.vehicle->v_x));
  }
  a.longitudinal = idm_longitudinal(ttc, sp);

  if (v.lane_change) {
    // Monitor the running maneuver; bail out if the target lane closed up.
    // A change already aborting is committed and no longer monitored.
    if (!v.lane_change->aborting &&
        !target_lane_gaps_ok(w, v, v.lane_change->target_lane, sp)) {
      a.lateral = v.v_y > 0.0 ? LateralAction::ChangeRight : LateralAction::ChangeLeft;
    }
    return a;
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) < p.traffic_lane_change_prob) {
    int target = -1;
    if (v.lane == 0) {
      target = 1;
    } else if (v.lane == kNumLanes - 1) {
      target = kNumLanes - 2;
    } else {
      std::uniform_int_distribution<int> dir(0, 1);
      target = v.lane + (dir(rng) ? 1 : -1);
    }
    if (target >= 0 && target_lane_gaps_ok(w, v, target, sp) &&
        merge_headway_ok(w, v, target, p)) {
      a.lateral = target > v.lane ? LateralAction::ChangeLeft : LateralAction::ChangeRight;
    }
  }
  return a;
}

StepOutcome step_world(WorldState& w, Action ego_action, std::mt19937_64& rng,
                       const SimParams& p, const SafetyParams& sp, bool cap_ego) {
  StepOutcome out;
  // All decisions and all kinematic inputs read the pre-step snapshot so the
  // update is simultaneous and order-independent.
  WorldState snapshot = w;
  std::vector<Action> actions(w.vehicles.size());
  actions[0] = ego_action;
  for (std::size_t i = 1; i < snapshot.vehicles.size(); ++i) {
    actions[i] = traffic_policy(snapshot.vehicles[i], snapshot, rng, p, sp);
  }
  for (std::size_t i = 0; i < w.vehicles.size(); ++i) {
    VehicleState v = snapshot.vehicles[i];
    double v_y = resolve_lateral(v, actions[i].lateral, p);
    bool clipped = false;
    v = step_lateral(v, v_y, p.dt, p.lane_width, &clipped);
    if (i == 0) out.ego_lateral_clamped = clipped;
    v = step_longitudinal(v, longitudinal_accel(actions[i].longitudinal, p), p.dt,
                          p.circumference);
    if (i != 0 || cap_ego) {
      v.v_x = std::min(v.v_x, rear_end_speed_cap(snapshot, snapshot.vehicles[i], p));
    }
    w.vehicles[i] = v;
  }
  w.time_index += 1;
  out.collision = detect_collision(w);
  if (!out.collision) out.collision = detect_passthrough(snapshot, w);
  return out;
}

}  // namespace ringdrive
