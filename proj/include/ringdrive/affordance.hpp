#pragma once

#include <array>
#include <cstdint>

#include "ringdrive/world.hpp"

namespace ringdrive {

inline constexpr int kAffordanceSize = 27;

struct AffordanceParams {
  double sensor_range = 200.0;   // vehicles beyond this arc distance are invisible (m)
  double velocity_scale = 40.0;  // velocity entries divided by this when normalizing
};

// Neighbor slots, ego-relative: cl = ego's current lane, rl = adjacent right,
// ll = adjacent left; f/r = nearest ahead/behind.
enum class Slot { ClFront = 0, ClRear = 1, RlFront = 2, RlRear = 3, LlFront = 4, LlRear = 5 };
inline constexpr int kNumSlots = 6;

// Fixed-order feature vector: six neighbor slots of four entries each
// (longitudinal distance, longitudinal relative speed, lateral distance,
// lateral relative speed; all relative quantities are neighbor minus ego),
// followed by ego speed, ego lateral position, ego lateral speed.
//
// Missing neighbor: distances at +/- sensor_range (sign by front/rear),
// relative speeds 0. Nonexistent adjacent lane: all four entries 0.
struct AffordanceVector {
  std::array<double, kAffordanceSize> values{};

  double d_x(Slot s) const { return values[4 * static_cast<int>(s) + 0]; }
  double v_x(Slot s) const { return values[4 * static_cast<int>(s) + 1]; }
  double d_y(Slot s) const { return values[4 * static_cast<int>(s) + 2]; }
  double v_y(Slot s) const { return values[4 * static_cast<int>(s) + 3]; }
  double ego_v_x() const { return values[24]; }
  double ego_y() const { return values[25]; }
  double ego_v_y() const { return values[26]; }
};

// Build the (un-normalized) affordance vector from the ego's perspective.
// Vehicles mid lane change count as occupying both lanes of the maneuver.
AffordanceVector extract_affordance(const WorldState& w, const AffordanceParams& p);

// Scale distances by 1/sensor_range and velocities by 1/velocity_scale so
// neighbor entries land in [-1, 1].
AffordanceVector normalize_affordance(const AffordanceVector& a, const AffordanceParams& p);

// Canonical entry name, index 0..26; the layout contract for checkpoints.
const char* affordance_entry_name(int index);

// Hash of the canonical entry ordering, embedded in checkpoints so a network
// is never silently fed features in a different order than it was trained on.
std::uint64_t affordance_ordering_hash();

}  // namespace ringdrive
