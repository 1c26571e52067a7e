#include "ringdrive/affordance.hpp"

#include <cmath>
#include <cstring>

namespace ringdrive {

namespace {

constexpr const char* kEntryNames[kAffordanceSize] = {
    "d_cl_fx", "v_cl_fx", "d_cl_fy", "v_cl_fy",
    "d_cl_rx", "v_cl_rx", "d_cl_ry", "v_cl_ry",
    "d_rl_fx", "v_rl_fx", "d_rl_fy", "v_rl_fy",
    "d_rl_rx", "v_rl_rx", "d_rl_ry", "v_rl_ry",
    "d_ll_fx", "v_ll_fx", "d_ll_fy", "v_ll_fy",
    "d_ll_rx", "v_ll_rx", "d_ll_ry", "v_ll_ry",
    "v_e_x", "d_e_y", "v_e_y",
};

}  // namespace

const char* affordance_entry_name(int index) { return kEntryNames[index]; }

std::uint64_t affordance_ordering_hash() {
  // FNV-1a over the comma-joined canonical names.
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](char c) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  };
  for (int i = 0; i < kAffordanceSize; ++i) {
    if (i) mix(',');
    for (const char* c = kEntryNames[i]; *c; ++c) mix(*c);
  }
  return h;
}

AffordanceVector extract_affordance(const WorldState& w, const AffordanceParams& p) {
  const VehicleState& ego = w.ego();
  AffordanceVector a;

  // Slot -> lane relative to ego: cl 0, rl -1, ll +1; front slots even.
  const int lane_offset[kNumSlots] = {0, 0, -1, -1, +1, +1};
  const bool is_front[kNumSlots] = {true, false, true, false, true, false};

  const VehicleState* best[kNumSlots] = {};
  double best_d[kNumSlots] = {};

  for (std::size_t i = 1; i < w.vehicles.size(); ++i) {
    const VehicleState& v = w.vehicles[i];
    double d = rel_distance(ego, v, w.circumference);
    if (std::abs(d) > p.sensor_range) continue;
    int lanes[2];
    int n = occupied_lanes(v, lanes);
    for (int s = 0; s < kNumSlots; ++s) {
      int lane = ego.lane + lane_offset[s];
      if (lane < 0 || lane >= kNumLanes) continue;
      bool in_lane = false;
      for (int k = 0; k < n; ++k) in_lane |= lanes[k] == lane;
      if (!in_lane) continue;
      if (is_front[s] ? d < 0.0 : d >= 0.0) continue;
      if (!best[s] || std::abs(d) < std::abs(best_d[s])) {
        best[s] = &v;
        best_d[s] = d;
      }
    }
  }

  for (int s = 0; s < kNumSlots; ++s) {
    int base = 4 * s;
    int lane = ego.lane + lane_offset[s];
    if (lane < 0 || lane >= kNumLanes) {
      // nonexistent adjacent lane: blocked sentinel, all zeros
      continue;
    }
    if (best[s]) {
      const VehicleState& v = *best[s];
      a.values[base + 0] = best_d[s];
      a.values[base + 1] = v.v_x - ego.v_x;
      a.values[base + 2] = v.y - ego.y;
      a.values[base + 3] = v.v_y - ego.v_y;
    } else {
      double sentinel = is_front[s] ? p.sensor_range : -p.sensor_range;
      a.values[base + 0] = sentinel;
      a.values[base + 1] = 0.0;
      a.values[base + 2] = sentinel;
      a.values[base + 3] = 0.0;
    }
  }

  a.values[24] = ego.v_x;
  a.values[25] = ego.y;
  a.values[26] = ego.v_y;
  return a;
}

AffordanceVector normalize_affordance(const AffordanceVector& a, const AffordanceParams& p) {
  AffordanceVector n = a;
  for (int s = 0; s < kNumSlots; ++s) {
    int base = 4 * s;
    n.values[base + 0] /= p.sensor_range;
    n.values[base + 1] /= p.velocity_scale;
    n.values[base + 2] /= p.sensor_range;
    n.values[base + 3] /= p.velocity_scale;
  }
  n.values[24] /= p.velocity_scale;
  n.values[25] /= p.sensor_range;
  n.values[26] /= p.velocity_scale;
  return n;
}

}  // namespace ringdrive
