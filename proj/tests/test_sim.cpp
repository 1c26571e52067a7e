#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "ringdrive/world.hpp"

using namespace ringdrive;
using doctest::Approx;

namespace {

Action act(LongitudinalAction lon, LateralAction lat) { return Action{lon, lat}; }

VehicleState car(int id, double x, int lane, double v, const SimParams& p,
                 double v_max = 32.0) {
  VehicleState c;
  c.id = id;
  c.x = x;
  c.lane = lane;
  c.y = lane_center(lane, p.lane_width);
  c.v_x = v;
  c.v_max = v_max;
  c.length = p.vehicle_length;
  c.width = p.vehicle_width;
  return c;
}

}  // namespace

TEST_CASE("position wraps into [0, circumference)") {
  CHECK(wrap_position(0.0, 1000.0) == 0.0);
  CHECK(wrap_position(1000.0, 1000.0) == 0.0);
  CHECK(wrap_position(1018.0, 1000.0) == 18.0);
  CHECK(wrap_position(-2.0, 1000.0) == 998.0);
  CHECK(wrap_position(2500.0, 1000.0) == 500.0);
}

TEST_CASE("signed offsets wrap into (-c/2, c/2]") {
  CHECK(wrap_signed(600.0, 1000.0) == -400.0);
  CHECK(wrap_signed(-600.0, 1000.0) == 400.0);
  CHECK(wrap_signed(500.0, 1000.0) == 500.0);
  CHECK(wrap_signed(-500.0, 1000.0) == 500.0);
  CHECK(wrap_signed(20.0, 1000.0) == 20.0);
}

TEST_CASE("longitudinal step advances with the old speed, then accelerates") {
  SimParams p;
  VehicleState s = car(0, 100.0, 1, 20.0, p);
  VehicleState r = step_longitudinal(s, 2.0, 1.0, p.circumference);
  CHECK(r.x == 120.0);
  CHECK(r.v_x == 22.0);
}

TEST_CASE("longitudinal step wraps around the ring") {
  VehicleState s;
  s.x = 998.0;
  s.v_x = 20.0;
  s.v_max = 32.0;
  VehicleState r = step_longitudinal(s, 0.0, 1.0, 1000.0);
  CHECK(r.x == 18.0);
  CHECK(r.v_x == 20.0);
}

TEST_CASE("speed clamps to [0, v_max]") {
  SimParams p;
  VehicleState s = car(0, 0.0, 0, 31.0, p, 32.0);
  CHECK(step_longitudinal(s, 2.0, 1.0, p.circumference).v_x == 32.0);
  s.v_x = 1.0;
  CHECK(step_longitudinal(s, -4.0, 1.0, p.circumference).v_x == 0.0);
}

TEST_CASE("lateral step moves by v_y * dt") {
  SimParams p;
  VehicleState s = car(0, 0.0, 0, 20.0, p);  // y = 1.9
  VehicleState r = step_lateral(s, 0.76, 1.0, p.lane_width);
  CHECK(r.y == Approx(2.66).epsilon(1e-12));
  CHECK(r.v_y == 0.76);
}

TEST_CASE("lateral positions clamp to the road edges") {
  SimParams p;
  VehicleState s = car(0, 0.0, 0, 20.0, p);
  bool clipped = false;
  VehicleState r = step_lateral(s, -5.0, 1.0, p.lane_width, &clipped);
  CHECK(r.y == 0.0);
  CHECK(clipped);
  s = car(0, 0.0, 2, 20.0, p);  // y = 9.5
  r = step_lateral(s, +5.0, 1.0, p.lane_width, &clipped);
  CHECK(r.y == Approx(3 * 3.8));
  CHECK(clipped);
}

TEST_CASE("a commanded lane change completes in exactly five steps") {
  SimParams p;
  WorldState w = make_ring_world(p);  // ego in lane 1, y = 5.7
  std::mt19937_64 rng(1);

  // Step 1..4: still mid-maneuver; lane field flips once the ego crosses
  // into the target lane's band.
  const double expect_y[5] = {6.46, 7.22, 7.98, 8.74, 9.5};
  const int expect_lane[5] = {1, 1, 2, 2, 2};
  for (int t = 0; t < 5; ++t) {
    step_world(w, act(LongitudinalAction::Maintain, LateralAction::ChangeLeft), rng, p, {});
    CHECK(w.ego().y == Approx(expect_y[t]).epsilon(1e-12));
    CHECK(w.ego().lane == expect_lane[t]);
    if (t < 4) {
      REQUIRE(w.ego().lane_change.has_value());
      CHECK(w.ego().lane_change->target_lane == 2);
    }
  }
  CHECK_FALSE(w.ego().lane_change.has_value());
  CHECK(w.ego().y == lane_center(2, p.lane_width));  // snapped exactly
  CHECK(w.ego().v_y == 0.0);
}

TEST_CASE("a lane change off the road edge is a no-op") {
  SimParams p;
  WorldState w = make_ring_world(p);
  w.ego().lane = 2;
  w.ego().y = lane_center(2, p.lane_width);
  std::mt19937_64 rng(1);
  step_world(w, act(LongitudinalAction::Maintain, LateralAction::ChangeLeft), rng, p, {});
  CHECK(w.ego().lane == 2);
  CHECK(w.ego().y == lane_center(2, p.lane_width));
  CHECK_FALSE(w.ego().lane_change.has_value());
}

TEST_CASE("relative distance is bumper to bumper across the wrap") {
  SimParams p;
  VehicleState ego = car(0, 990.0, 1, 25.0, p);
  VehicleState tv = car(1, 10.0, 1, 20.0, p);
  WorldState w;
  w.circumference = 1000.0;
  CHECK(rel_distance(ego, tv, w.circumference) == 15.0);   // 20 center - 5
  CHECK(rel_distance(tv, ego, w.circumference) == -15.0);  // antisymmetric
}

TEST_CASE("overlapping footprints report zero distance, not a flipped sign") {
  SimParams p;
  VehicleState a = car(0, 100.0, 1, 20.0, p);
  VehicleState b = car(1, 103.0, 1, 20.0, p);  // centers 3 apart, lengths 5
  CHECK(rel_distance(a, b, 2000.0) == 0.0);
  CHECK(rel_distance(b, a, 2000.0) == 0.0);
}

TEST_CASE("collision detection by footprint overlap") {
  SimParams p;
  WorldState w = make_ring_world(p);
  CHECK_FALSE(detect_collision(w).has_value());  // ego alone

  w.vehicles.push_back(car(1, 4.0, 1, 20.0, p));  // 4 m ahead, same lane
  auto hit = detect_collision(w);
  REQUIRE(hit.has_value());
  CHECK(hit->first == 0);
  CHECK(hit->second == 1);

  // Same arc position but one lane over: lateral separation 3.8 >= 2.
  w.vehicles.back() = car(1, 4.0, 2, 20.0, p);
  CHECK_FALSE(detect_collision(w).has_value());
}

TEST_CASE("pass-through detection catches an order flip within one step") {
  SimParams p;
  WorldState before = make_ring_world(p);
  before.vehicles.push_back(car(1, 8.0, 1, 0.0, p));
  WorldState after = before;
  after.vehicles[0].x = 20.0;  // ego jumped over the slow car
  after.vehicles[1].x = 9.0;
  auto hit = detect_passthrough(before, after);
  REQUIRE(hit.has_value());
  CHECK(hit->first == 0);
  CHECK(hit->second == 1);
}

TEST_CASE("pass-through ignores laterally separated pairs") {
  SimParams p;
  WorldState before = make_ring_world(p);
  before.vehicles.push_back(car(1, 8.0, 2, 0.0, p));  // one lane over at both ends
  WorldState after = before;
  after.vehicles[0].x = 20.0;
  after.vehicles[1].x = 9.0;
  CHECK_FALSE(detect_passthrough(before, after).has_value());
}

TEST_CASE("pass-through ignores a sign flip at the far side of the ring") {
  SimParams p;
  p.circumference = 1000.0;
  WorldState before = make_ring_world(p);
  before.circumference = 1000.0;
  before.vehicles.push_back(car(1, 400.0, 1, 0.0, p));
  WorldState after = before;
  // The pair's offset moves +400 -> -400: it crossed the antipode, which is
  // a lap difference, not a swap at close range.
  after.vehicles[1].x = 600.0;
  CHECK_FALSE(detect_passthrough(before, after).has_value());
}

TEST_CASE("fresh world holds a centered ego") {
  SimParams p;
  WorldState w = make_ring_world(p);
  REQUIRE(w.vehicles.size() == 1);
  CHECK(w.ego().id == 0);
  CHECK(w.ego().lane == 1);
  CHECK(w.ego().y == lane_center(1, p.lane_width));
  CHECK(w.ego().v_x == p.ego_speed_init);
  CHECK(w.ego().v_max == p.ego_v_max);
  CHECK(w.circumference == p.circumference);
}

TEST_CASE("occupied lanes cover both ends of a maneuver") {
  SimParams p;
  VehicleState v = car(1, 0.0, 1, 20.0, p);
  int lanes[2];
  CHECK(occupied_lanes(v, lanes) == 1);
  CHECK(lanes[0] == 1);

  // Before the lane field flips: lane 1, heading for 2.
  v.lane_change = LaneChange{2, 4};
  v.v_y = 0.76;
  REQUIRE(occupied_lanes(v, lanes) == 2);
  CHECK(lanes[0] == 1);
  CHECK(lanes[1] == 2);

  // After the flip: lane field already 2, still straddling 1.
  v.lane = 2;
  REQUIRE(occupied_lanes(v, lanes) == 2);
  CHECK(lanes[0] == 2);
  CHECK(lanes[1] == 1);
}

TEST_CASE("spawn rejects car counts outside [1, max_traffic]") {
  SimParams p;
  WorldState w = make_ring_world(p);
  std::mt19937_64 rng(7);
  CHECK_THROWS_AS(spawn_traffic(rng, 0, w, p), std::invalid_argument);
  CHECK_THROWS_AS(spawn_traffic(rng, -3, w, p), std::invalid_argument);
  CHECK_THROWS_AS(spawn_traffic(rng, p.max_traffic + 1, w, p), std::invalid_argument);
  CHECK(w.vehicles.size() == 1);  // nothing was placed
}

TEST_CASE("spawn produces collision-free traffic near the ego, in range") {
  SimParams p;
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
    WorldState w = make_ring_world(p);
    std::mt19937_64 rng(seed);
    spawn_traffic(rng, 30, w, p);
    REQUIRE(w.vehicles.size() == 31);
    CHECK_FALSE(detect_collision(w).has_value());
    for (std::size_t i = 1; i < w.vehicles.size(); ++i) {
      const VehicleState& v = w.vehicles[i];
      CHECK(v.id == static_cast<int>(i));
      CHECK(std::abs(wrap_signed(v.x - w.ego().x, w.circumference)) <= p.spawn_range);
      CHECK(v.lane >= 0);
      CHECK(v.lane < kNumLanes);
      CHECK(v.y == lane_center(v.lane, p.lane_width));
      CHECK(v.v_max >= p.traffic_v_max_min);
      CHECK(v.v_max <= p.traffic_v_max_max);
      CHECK(v.v_x >= 0.7 * v.v_max);
      CHECK(v.v_x <= v.v_max);
    }
  }
}

TEST_CASE("spawn is deterministic for a fixed seed") {
  SimParams p;
  WorldState a = make_ring_world(p), b = make_ring_world(p);
  std::mt19937_64 ra(42), rb(42);
  spawn_traffic(ra, 15, a, p);
  spawn_traffic(rb, 15, b, p);
  REQUIRE(a.vehicles.size() == b.vehicles.size());
  for (std::size_t i = 0; i < a.vehicles.size(); ++i) {
    CHECK(a.vehicles[i].x == b.vehicles[i].x);
    CHECK(a.vehicles[i].lane == b.vehicles[i].lane);
    CHECK(a.vehicles[i].v_x == b.vehicles[i].v_x);
    CHECK(a.vehicles[i].v_max == b.vehicles[i].v_max);
  }
}

TEST_CASE("traffic accelerates on an open road and keeps its lane") {
  SimParams p;
  p.traffic_lane_change_prob = 0.0;
  WorldState w = make_ring_world(p);
  w.ego().x = 1000.0;  // far away
  w.vehicles.push_back(car(1, 100.0, 0, 20.0, p, 28.0));
  std::mt19937_64 rng(3);
  Action a = traffic_policy(w.vehicles[1], w, rng, p, {});
  CHECK(a.longitudinal == LongitudinalAction::Accelerate);
  CHECK(a.lateral == LateralAction::Keep);
}

TEST_CASE("traffic brakes by time to collision against its leader") {
  SimParams p;
  p.traffic_lane_change_prob = 0.0;
  WorldState w = make_ring_world(p);
  w.ego().x = 1000.0;
  w.vehicles.push_back(car(1, 100.0, 0, 20.0, p));
  w.vehicles.push_back(car(2, 130.0, 0, 10.0, p));  // gap 25, closing 10, ttc 2.5
  std::mt19937_64 rng(3);
  Action a = traffic_policy(w.vehicles[1], w, rng, p, {});
  CHECK(a.longitudinal == LongitudinalAction::Brake);

  w.vehicles[2].v_x = 0.0;  // closing 20, ttc 1.25
  a = traffic_policy(w.vehicles[1], w, rng, p, {});
  CHECK(a.longitudinal == LongitudinalAction::HardBrake);
}

TEST_CASE("maintain and keep is a fixed point of the dynamics") {
  SimParams p;
  WorldState w = make_ring_world(p);
  std::mt19937_64 rng(1);
  double v0 = w.ego().v_x;
  for (int t = 0; t < 10; ++t) {
    StepOutcome out = step_world(w, act(LongitudinalAction::Maintain, LateralAction::Keep),
                                 rng, p, {});
    CHECK_FALSE(out.collision.has_value());
  }
  CHECK(w.ego().v_x == v0);
  CHECK(w.ego().y == lane_center(1, p.lane_width));
  CHECK(w.ego().x == wrap_position(10 * v0, p.circumference));
  CHECK(w.time_index == 10);
}

TEST_CASE("world stepping is bit-identical across repeated runs") {
  SimParams p;
  auto run = [&] {
    WorldState w = make_ring_world(p);
    std::mt19937_64 rng(99);
    spawn_traffic(rng, 12, w, p);
    for (int t = 0; t < 50; ++t) {
      step_world(w, act(LongitudinalAction::Maintain, LateralAction::Keep), rng, p, {});
    }
    return w;
  };
  WorldState a = run(), b = run();
  REQUIRE(a.vehicles.size() == b.vehicles.size());
  for (std::size_t i = 0; i < a.vehicles.size(); ++i) {
    CHECK(a.vehicles[i].x == b.vehicles[i].x);
    CHECK(a.vehicles[i].y == b.vehicles[i].y);
    CHECK(a.vehicles[i].v_x == b.vehicles[i].v_x);
    CHECK(a.vehicles[i].v_y == b.vehicles[i].v_y);
    CHECK(a.vehicles[i].lane == b.vehicles[i].lane);
  }
}

TEST_CASE("the speed governor stops traffic short of a stalled leader") {
  SimParams p;
  p.traffic_lane_change_prob = 0.0;
  WorldState w = make_ring_world(p);
  w.ego().x = 1000.0;  // out of the way
  w.vehicles.push_back(car(1, 30.0, 0, 20.0, p));        // follower at 20 m/s
  w.vehicles.push_back(car(2, 60.0, 0, 0.0, p, 0.0));    // stalled leader (v_max 0)
  std::mt19937_64 rng(5);
  for (int t = 0; t < 8; ++t) {
    StepOutcome out = step_world(w, act(LongitudinalAction::Maintain, LateralAction::Keep),
                                 rng, p, {});
    REQUIRE_FALSE(out.collision.has_value());
  }
  const VehicleState& follower = w.vehicles[1];
  const VehicleState& leader = w.vehicles[2];
  CHECK(leader.v_x == 0.0);
  CHECK(follower.v_x == 0.0);  // governed to a stop
  double gap = rel_distance(follower, leader, w.circumference);
  CHECK(gap >= 0.4);  // ~the governor margin survives
  CHECK(gap <= 5.1);
}

TEST_CASE("an aborted ego lane change returns to the origin lane and commits") {
  SimParams p;
  WorldState w = make_ring_world(p);
  std::mt19937_64 rng(1);
  // Two steps into a leftward change from lane 1.
  step_world(w, act(LongitudinalAction::Maintain, LateralAction::ChangeLeft), rng, p, {});
  step_world(w, act(LongitudinalAction::Maintain, LateralAction::ChangeLeft), rng, p, {});
  REQUIRE(w.ego().lane_change.has_value());
  CHECK(w.ego().y == Approx(7.22).epsilon(1e-12));

  // Abort by commanding the opposite direction.
  step_world(w, act(LongitudinalAction::Maintain, LateralAction::ChangeRight), rng, p, {});
  REQUIRE(w.ego().lane_change.has_value());
  CHECK(w.ego().lane_change->aborting);
  CHECK(w.ego().lane_change->target_lane == 1);
  CHECK(w.ego().y == Approx(6.46).epsilon(1e-12));

  // While aborting, a re-abort (or any lateral command) is ignored: the
  // return is committed and finishes on schedule.
  step_world(w, act(LongitudinalAction::Maintain, LateralAction::ChangeLeft), rng, p, {});
  CHECK_FALSE(w.ego().lane_change.has_value());
  CHECK(w.ego().lane == 1);
  CHECK(w.ego().y == lane_center(1, p.lane_width));
  CHECK(w.ego().v_y == 0.0);
}

TEST_CASE("continuing commands do not restart a running maneuver") {
  SimParams p;
  WorldState w = make_ring_world(p);
  std::mt19937_64 rng(1);
  step_world(w, act(LongitudinalAction::Maintain, LateralAction::ChangeLeft), rng, p, {});
  REQUIRE(w.ego().lane_change.has_value());
  int remaining = w.ego().lane_change->steps_remaining;
  // Same-direction command: continue, counter decreases by exactly one.
  step_world(w, act(LongitudinalAction::Maintain, LateralAction::ChangeLeft), rng, p, {});
  REQUIRE(w.ego().lane_change.has_value());
  CHECK(w.ego().lane_change->steps_remaining == remaining - 1);
  // Keep: also continue.
  step_world(w, act(LongitudinalAction::Maintain, LateralAction::Keep), rng, p, {});
  REQUIRE(w.ego().lane_change.has_value());
  CHECK(w.ego().lane_change->steps_remaining == remaining - 2);
}

TEST_CASE("long mixed-traffic rollouts never produce traffic-only collisions") {
  SimParams p;
  for (std::uint64_t seed : {11ull, 22ull, 33ull}) {
    WorldState w = make_ring_world(p);
    std::mt19937_64 rng(seed);
    spawn_traffic(rng, 20, w, p);
    for (int t = 0; t < 200; ++t) {
      // Ego holds speed mid-lane; it was spawned clear of traffic and the
      // governor protects everyone else.
      StepOutcome out = step_world(w, act(LongitudinalAction::Maintain, LateralAction::Keep),
                                   rng, p, {}, true);
      REQUIRE_FALSE(out.collision.has_value());
    }
  }
}
