#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ringdrive/config.hpp"
#include "ringdrive/qnet.hpp"
#include "ringdrive/shield.hpp"

namespace ringdrive {

enum class PolicyKind { Ddqn, IdmNoLaneChange, IdmWithLaneChange };

const char* to_string(PolicyKind p);

// Non-learning baseline built from the car-following thresholds. The
// lane-change variant moves over when the target lane offers at least 10 m
// more front gap and the gap rule holds against its front and rear cars.
Action idm_baseline(const AffordanceVector& aff, const EgoContext& ctx,
                    bool with_lane_change, const SafetyParams& p);

struct EvalMetrics {
  int episodes = 0;
  int completed_episodes = 0;
  double mean_reward = 0.0;  // per decision, over completed episodes
  double mean_speed = 0.0;   // over completed episodes
  int collisions = 0;
  long long shield_triggers = 0;
  std::vector<double> episode_rewards;
  std::vector<double> episode_speeds;
  std::vector<int> episode_triggers;
  std::vector<int> episode_collided;
};

// Greedy rollouts under the shield at a fixed traffic density (0 = empty
// road). net may be null for the baseline policies. Episode e draws its
// world from a seed derived from (seed, e), so a given episode's traffic is
// identical across policies being compared.
EvalMetrics evaluate_policy(const QNetwork* net, PolicyKind policy, int density,
                            int episodes, std::uint64_t seed, const RunConfig& cfg);

// Optional per-step trajectory dump of the first episode, one row per
// vehicle per step: time_index, id, x, y, v_x, v_y, lane.
EvalMetrics evaluate_policy(const QNetwork* net, PolicyKind policy, int density,
                            int episodes, std::uint64_t seed, const RunConfig& cfg,
                            class CsvWriter* trajectory);

struct SweepRow {
  int density = 0;
  PolicyKind policy = PolicyKind::Ddqn;
  double mean_speed = 0.0;
  double mean_reward = 0.0;
  int collisions = 0;
  int episodes = 0;
};

// Cross product of densities x {IDM, IDM+lane-change, DDQN}.
std::vector<SweepRow> density_sweep(const QNetwork& net, std::span<const int> densities,
                                    int episodes_per_density, std::uint64_t seed,
                                    const RunConfig& cfg);

struct CurveSeries {
  std::vector<double> mean;
  std::vector<double> lower;  // mean - 1.96 * stderr
  std::vector<double> upper;
};

// Pointwise mean and 1.96-stderr band across runs, after smoothing each run
// with a trailing moving average of the given window (1 = no smoothing).
// Needs at least two runs; series are truncated to the shortest.
CurveSeries learning_curve(const std::vector<std::vector<double>>& runs, int window);

}  // namespace ringdrive
