#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ringdrive/checkpoint.hpp"
#include "ringdrive/config.hpp"
#include "ringdrive/csv.hpp"
#include "ringdrive/qnet.hpp"
#include "ringdrive/replay.hpp"

namespace ringdrive {

// Stable seed derivation so auxiliary streams (greedy evaluations, per-episode
// worlds) never perturb the main training stream.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

// Exploration schedule: linear from epsilon_start to epsilon_end over the
// anneal horizon, constant afterwards.
double epsilon_at(int episode, const TrainConfig& tc);

// Epsilon-greedy action pick; draws one uniform variate, plus a uniform
// action when exploring.
int select_action(const QNetwork& net, std::span<const double> state, double epsilon,
                  std::mt19937_64& rng, Workspace& ws);

// Regression targets: collision records train toward their raw reward; safe
// records bootstrap with the online net choosing the successor action and
// the target net valuing it.
std::vector<double> compute_targets(std::span<const Transition* const> batch,
                                    const QNetwork& online, const QNetwork& target,
                                    double gamma, Workspace& ws);

struct EpisodeLog {
  int episode = 0;
  double mean_reward = 0.0;  // per decision, collision reward included
  double epsilon = 0.0;
  int shield_triggers = 0;
  int collided = 0;
  double mean_loss = 0.0;
  int steps = 0;
  double mean_speed = 0.0;
};

struct EvalPoint {
  int episode = 0;
  double mean_reward = 0.0;
  double mean_speed = 0.0;
  int collisions = 0;
  long long shield_triggers = 0;
};

struct TrainSinks {
  CsvWriter* training_log = nullptr;
  CsvWriter* eval_log = nullptr;
  CsvWriter* shield_audit = nullptr;
};

struct TrainResult {
  QNetwork net;
  AdamState adam;
  std::vector<EpisodeLog> episodes;
  std::vector<EvalPoint> evals;
  long long override_records = 0;   // shield overrides stored to the collision buffer
  long long collision_records = 0;  // actual collisions stored to the collision buffer
  int collision_episodes = 0;
  std::string rng_state;  // for resumable checkpoints
  std::size_t safe_buffer_size = 0;
  std::size_t collision_buffer_size = 0;
};

// Full training loop. Pass a checkpoint to resume from its episode counter
// with its parameters, optimizer state, and (if present) RNG stream; replay
// buffers always start empty.
TrainResult train(const RunConfig& cfg, const TrainSinks& sinks = {},
                  const Checkpoint* resume = nullptr);

struct AdaptResult {
  QNetwork net;
  std::vector<int> triggers_per_episode;
  std::vector<double> trigger_moving_avg;
  long long total_triggers = 0;
  int collision_episodes = 0;
};

// Deployment-style adaptation: the learned policy runs greedily under the
// shield; every override lands in the collision buffer and training
// continues at the (lower) adaptation learning rate. A zero learning rate
// turns this into a frozen-policy baseline that only measures triggers.
AdaptResult adapt(const QNetwork& trained, const RunConfig& cfg,
                  CsvWriter* trigger_log = nullptr);

}  // namespace ringdrive
