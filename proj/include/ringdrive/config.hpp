#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ringdrive/affordance.hpp"
#include "ringdrive/reward.hpp"
#include "ringdrive/safety.hpp"
#include "ringdrive/world.hpp"

namespace ringdrive {

enum class ReplayMode { DualBuffer, Prioritized };

struct TrainConfig {
  double gamma = 0.9;
  int episodes = 10000;
  int samples_per_episode = 200;
  double epsilon_start = 1.0;
  double epsilon_end = 0.2;
  int epsilon_anneal_episodes = 7000;
  int target_sync_episodes = 100;
  int minibatch_size = 32;
  double collision_fraction = 0.25;  // minibatch share drawn from the collision buffer
  std::size_t safe_capacity = 100000;
  std::size_t collision_capacity = 10000;
  double learning_rate = 1e-4;
  bool shield_enabled = true;
  ReplayMode replay_mode = ReplayMode::DualBuffer;
  double per_alpha = 0.6;
  double per_beta = 0.4;
  double per_epsilon = 1e-3;
  int eval_period = 100;  // greedy evaluation every this many episodes; 0 disables
  int eval_episodes = 3;
};

struct AdaptConfig {
  int episodes = 2000;
  double learning_rate = 1e-5;
  int trigger_window = 100;  // moving-average window for the trigger log
};

struct EvalConfig {
  int episodes = 100;
  int density = 10;                         // cars on the ring; 0 = empty road
  std::vector<int> densities = {5, 10, 15, 20, 25, 30};
  int episodes_per_density = 50;
};

// Everything a run needs, serializable as flat key = value text.
struct RunConfig {
  SimParams sim;
  AffordanceParams affordance;
  SafetyParams safety;
  RewardConfig reward;
  TrainConfig train;
  AdaptConfig adapt;
  EvalConfig eval;
  int n_cars_min = 1;   // per-episode traffic count drawn uniformly from
  int n_cars_max = 30;  //   [n_cars_min, n_cars_max] during training
  std::uint64_t seed = 0;
  std::string out_dir;
};

// Set one key; throws std::invalid_argument on unknown keys or bad values.
void apply_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

// Parse `key = value` lines ('#' starts a comment). Throws on unknown keys.
void load_config_file(RunConfig& cfg, const std::string& path);

// Write every key in a form load_config_file accepts, reproducing this
// config exactly.
void write_config_snapshot(const RunConfig& cfg, std::ostream& os);
void write_config_snapshot(const RunConfig& cfg, const std::string& path);

const char* to_string(ReplayMode m);

}  // namespace ringdrive
