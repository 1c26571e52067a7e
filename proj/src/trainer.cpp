#include "ringdrive/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ringdrive/reward.hpp"
#include "ringdrive/shield.hpp"

namespace ringdrive {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ splitmix64(b));
}

double epsilon_at(int episode, const TrainConfig& tc) {
  if (tc.epsilon_anneal_episodes <= 0 || episode >= tc.epsilon_anneal_episodes) {
    return tc.epsilon_end;
  }
  double frac = static_cast<double>(episode) / tc.epsilon_anneal_episodes;
  return tc.epsilon_start + (tc.epsilon_end - tc.epsilon_start) * frac;
}

int select_action(const QNetwork& net, std::span<const double> state, double epsilon,
                  std::mt19937_64& rng, Workspace& ws) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) < epsilon) {
    std::uniform_int_distribution<int> pick(0, net.output_size() - 1);
    return pick(rng);
  }
  return argmax_q(net, state, ws);
}

std::vector<double> compute_targets(std::span<const Transition* const> batch,
                                    const QNetwork& online, const QNetwork& target,
                                    double gamma, Workspace& ws) {
  std::vector<double> ys;
  ys.reserve(batch.size());
  for (const Transition* t : batch) {
    if (t->source == TransitionSource::Collision || !t->has_next) {
      ys.push_back(t->reward);
      continue;
    }
    int best = argmax_q(online, t->next_state, ws);
    const std::vector<double>& qt = forward(target, t->next_state, ws);
    ys.push_back(t->reward + gamma * qt[best]);
  }
  return ys;
}

namespace {

// Shared per-step learning machinery for the dual-buffer and prioritized
// modes; owns the scratch buffers so the hot loop never allocates.
struct Learner {
  const RunConfig& cfg;
  QNetwork& online;
  QNetwork& target;
  AdamState& adam;
  ReplayBuffers dual;
  PrioritizedBuffer per;
  bool use_per;

  Workspace ws;
  std::vector<double> grad;
  std::vector<double> residuals;
  std::vector<const Transition*> picks;
  std::vector<BatchSample> batch;

  explicit Learner(const RunConfig& c, QNetwork& net, QNetwork& tgt, AdamState& ad)
      : cfg(c),
        online(net),
        target(tgt),
        adam(ad),
        dual(c.train.safe_capacity, c.train.collision_capacity),
        per(c.train.safe_capacity, c.train.per_alpha, c.train.per_beta, c.train.per_epsilon),
        use_per(c.train.replay_mode == ReplayMode::Prioritized) {}

  void store(const Transition& t) {
    if (use_per) {
      per.push(t);
    } else if (t.source == TransitionSource::Collision) {
      dual.collision.push(t);
    } else {
      dual.safe.push(t);
    }
  }

  bool warm() const {
    std::size_t n = static_cast<std::size_t>(cfg.train.minibatch_size);
    return use_per ? per.size() >= n : dual.safe.size() >= n;
  }

  // One minibatch update; returns the loss, or no value while warming up.
  std::optional<double> step(std::mt19937_64& rng) {
    if (!warm()) return std::nullopt;
    int n = cfg.train.minibatch_size;
    PrioritizedBuffer::Sample ps;
    if (use_per) {
      ps = per.sample(n, rng);
      picks.clear();
      for (std::size_t i : ps.indices) picks.push_back(&per[i]);
    } else {
      picks = sample_minibatch(dual, n, cfg.train.collision_fraction, rng);
    }
    std::vector<double> ys = compute_targets(picks, online, target, cfg.train.gamma, ws);
    batch.clear();
    for (std::size_t k = 0; k < picks.size(); ++k) {
      BatchSample s;
      s.state = picks[k]->state.data();
      s.action = picks[k]->action;
      s.target = ys[k];
      s.weight = use_per ? ps.weights[k] : 1.0;
      batch.push_back(s);
    }
    double loss = loss_and_gradient(online, batch, grad, ws, &residuals);
    if (use_per) per.update_priorities(ps.indices, residuals);
    adam_step(online, grad, adam);
    return loss;
  }

  std::size_t safe_size() const { return use_per ? per.size() : dual.safe.size(); }
  std::size_t collision_size() const { return use_per ? 0 : dual.collision.size(); }
};

bool involves_ego(const std::optional<std::pair<int, int>>& collision) {
  return collision && (collision->first == 0 || collision->second == 0);
}

int draw_car_count(std::mt19937_64& rng, const RunConfig& cfg) {
  int lo = std::max(0, cfg.n_cars_min);
  int hi = std::min(cfg.sim.max_traffic, std::max(lo, cfg.n_cars_max));
  std::uniform_int_distribution<int> pick(lo, hi);
  return pick(rng);
}

WorldState spawn_episode_world(std::mt19937_64& rng, const RunConfig& cfg, int n_cars) {
  WorldState w = make_ring_world(cfg.sim);
  if (n_cars > 0) spawn_traffic(rng, n_cars, w, cfg.sim);
  return w;
}

// Small greedy rollout used for the periodic learning-progress probe. Runs
// on its own derived RNG stream so the training trajectory is unaffected.
EvalPoint greedy_probe(const QNetwork& net, const RunConfig& cfg, int episode) {
  EvalPoint pt;
  pt.episode = episode;
  std::mt19937_64 rng(mix_seed(cfg.seed, 0x65766100ull + static_cast<std::uint64_t>(episode)));
  Workspace ws;
  double reward_sum = 0.0, speed_sum = 0.0;
  long long steps = 0;
  for (int e = 0; e < cfg.train.eval_episodes; ++e) {
    WorldState w = spawn_episode_world(rng, cfg, draw_car_count(rng, cfg));
    AffordanceVector raw = extract_affordance(w, cfg.affordance);
    AffordanceVector norm = normalize_affordance(raw, cfg.affordance);
    for (int t = 0; t < cfg.train.samples_per_episode; ++t) {
      int a = argmax_q(net, norm.values, ws);
      ShieldVerdict v = check_and_override(raw, action_from_index(a),
                                           EgoContext::from(w.ego()), cfg.safety);
      if (v.overridden) pt.shield_triggers += 1;
      StepOutcome out = step_world(w, v.executed, rng, cfg.sim, cfg.safety);
      raw = extract_affordance(w, cfg.affordance);
      norm = normalize_affordance(raw, cfg.affordance);
      bool hit = involves_ego(out.collision);
      reward_sum += total_reward(raw, hit, cfg.reward);
      speed_sum += w.ego().v_x;
      steps += 1;
      if (out.collision) {
        if (hit) pt.collisions += 1;
        break;
      }
    }
  }
  if (steps > 0) {
    pt.mean_reward = reward_sum / static_cast<double>(steps);
    pt.mean_speed = speed_sum / static_cast<double>(steps);
  }
  return pt;
}

}  // namespace

TrainResult train(const RunConfig& cfg, const TrainSinks& sinks, const Checkpoint* resume) {
  const TrainConfig& tc = cfg.train;
  std::mt19937_64 rng(cfg.seed);
  std::vector<int> arch = {kAffordanceSize, 100, 100, kNumActions};
  QNetwork online = QNetwork::init_random(arch, rng);
  AdamState adam(online.theta.size(), tc.learning_rate);
  int start_episode = 0;
  if (resume) {
    online = resume->net;
    if (resume->adam) adam = *resume->adam;
    adam.lr = tc.learning_rate;
    start_episode = static_cast<int>(resume->episodes_completed);
    if (resume->rng_state) {
      std::istringstream is(*resume->rng_state);
      is >> rng;
    }
  }
  QNetwork target = online;
  Learner learner(cfg, online, target, adam);
  Workspace ws;

  TrainResult result;
  if (sinks.training_log) {
    sinks.training_log->row({"episode", "mean_reward", "epsilon", "shield_triggers",
                             "collision", "loss", "steps", "mean_speed"});
  }
  if (sinks.eval_log) {
    sinks.eval_log->row({"episode", "mean_reward", "mean_speed", "collisions",
                         "shield_triggers"});
  }
  if (sinks.shield_audit) {
    sinks.shield_audit->row({"step", "episode", "rule", "proposed", "executed"});
  }

  long long global_step = 0;
  for (int ep = start_episode; ep < tc.episodes; ++ep) {
    double eps = epsilon_at(ep, tc);
    WorldState world = spawn_episode_world(rng, cfg, draw_car_count(rng, cfg));
    AffordanceVector raw = extract_affordance(world, cfg.affordance);
    AffordanceVector norm = normalize_affordance(raw, cfg.affordance);

    EpisodeLog log;
    log.episode = ep;
    log.epsilon = eps;
    double reward_sum = 0.0, speed_sum = 0.0, loss_sum = 0.0;
    int learn_steps = 0;

    for (int t = 0; t < tc.samples_per_episode; ++t) {
      int proposed = select_action(online, norm.values, eps, rng, learner.ws);
      int executed = proposed;
      if (tc.shield_enabled) {
        ShieldVerdict v = check_and_override(raw, action_from_index(proposed),
                                             EgoContext::from(world.ego()), cfg.safety);
        if (v.overridden) {
          Transition unsafe;
          unsafe.state = norm.values;
          unsafe.action = proposed;
          unsafe.reward = cfg.reward.r_col;
          unsafe.source = TransitionSource::Collision;
          learner.store(unsafe);
          result.override_records += 1;
          log.shield_triggers += 1;
          executed = action_index(v.executed);
          if (sinks.shield_audit) {
            sinks.shield_audit->row({format_number(global_step), format_number(ep),
                                     to_string(v.rule), format_number(proposed),
                                     format_number(executed)});
          }
        }
      }
      StepOutcome out = step_world(world, action_from_index(executed), rng, cfg.sim,
                                   cfg.safety);
      AffordanceVector raw_next = extract_affordance(world, cfg.affordance);
      AffordanceVector norm_next = normalize_affordance(raw_next, cfg.affordance);
      bool ego_hit = involves_ego(out.collision);
      double r = total_reward(raw_next, ego_hit, cfg.reward);

      Transition tr;
      tr.state = norm.values;
      tr.action = executed;
      tr.reward = r;
      if (ego_hit) {
        tr.source = TransitionSource::Collision;
        result.collision_records += 1;
      } else {
        tr.source = TransitionSource::Safe;
        tr.has_next = true;
        tr.next_state = norm_next.values;
      }
      learner.store(tr);

      reward_sum += r;
      speed_sum += world.ego().v_x;
      log.steps += 1;
      if (auto loss = learner.step(rng)) {
        loss_sum += *loss;
        learn_steps += 1;
      }
      global_step += 1;
      if (out.collision) {
        if (ego_hit) log.collided = 1;
        break;
      }
      raw = raw_next;
      norm = norm_next;
    }

    if (log.steps > 0) {
      log.mean_reward = reward_sum / log.steps;
      log.mean_speed = speed_sum / log.steps;
    }
    if (learn_steps > 0) log.mean_loss = loss_sum / learn_steps;
    result.collision_episodes += log.collided;
    result.episodes.push_back(log);
    if (sinks.training_log) {
      sinks.training_log->row({format_number(log.episode), format_number(log.mean_reward),
                               format_number(log.epsilon), format_number(log.shield_triggers),
                               format_number(log.collided), format_number(log.mean_loss),
                               format_number(log.steps), format_number(log.mean_speed)});
    }

    if (tc.target_sync_episodes > 0 && (ep + 1) % tc.target_sync_episodes == 0) {
      target = online;
    }
    if (tc.eval_period > 0 && (ep + 1) % tc.eval_period == 0) {
      EvalPoint pt = greedy_probe(online, cfg, ep + 1);
      result.evals.push_back(pt);
      if (sinks.eval_log) {
        sinks.eval_log->row({format_number(pt.episode), format_number(pt.mean_reward),
                             format_number(pt.mean_speed), format_number(pt.collisions),
                             format_number(pt.shield_triggers)});
      }
    }
  }

  result.net = online;
  result.adam = adam;
  result.safe_buffer_size = learner.safe_size();
  result.collision_buffer_size = learner.collision_size();
  std::ostringstream os;
  os << rng;
  result.rng_state = os.str();
  return result;
}

AdaptResult adapt(const QNetwork& trained, const RunConfig& cfg, CsvWriter* trigger_log) {
  std::mt19937_64 rng(mix_seed(cfg.seed, 0xada57ull));
  QNetwork net = trained;
  QNetwork target = net;
  AdamState adam(net.theta.size(), cfg.adapt.learning_rate);
  Learner learner(cfg, net, target, adam);
  const bool learning = cfg.adapt.learning_rate > 0.0;

  AdaptResult result{net, {}, {}};
  if (trigger_log) trigger_log->row({"episode", "triggers", "moving_avg"});

  for (int ep = 0; ep < cfg.adapt.episodes; ++ep) {
    WorldState world = spawn_episode_world(rng, cfg, draw_car_count(rng, cfg));
    AffordanceVector raw = extract_affordance(world, cfg.affordance);
    AffordanceVector norm = normalize_affordance(raw, cfg.affordance);
    int triggers = 0;
    for (int t = 0; t < cfg.train.samples_per_episode; ++t) {
      int proposed = argmax_q(net, norm.values, learner.ws);
      ShieldVerdict v = check_and_override(raw, action_from_index(proposed),
                                           EgoContext::from(world.ego()), cfg.safety);
      int executed = proposed;
      if (v.overridden) {
        Transition unsafe;
        unsafe.state = norm.values;
        unsafe.action = proposed;
        unsafe.reward = cfg.reward.r_col;
        unsafe.source = TransitionSource::Collision;
        learner.store(unsafe);
        triggers += 1;
        executed = action_index(v.executed);
      }
      StepOutcome out = step_world(world, action_from_index(executed), rng, cfg.sim,
                                   cfg.safety);
      AffordanceVector raw_next = extract_affordance(world, cfg.affordance);
      AffordanceVector norm_next = normalize_affordance(raw_next, cfg.affordance);
      bool ego_hit = involves_ego(out.collision);

      Transition tr;
      tr.state = norm.values;
      tr.action = executed;
      tr.reward = total_reward(raw_next, ego_hit, cfg.reward);
      if (ego_hit) {
        tr.source = TransitionSource::Collision;
      } else {
        tr.source = TransitionSource::Safe;
        tr.has_next = true;
        tr.next_state = norm_next.values;
      }
      learner.store(tr);
      // With a zero learning rate the parameters cannot move, so the
      // gradient work is skipped outright and only triggers are measured.
      if (learning) learner.step(rng);
      if (out.collision) {
        if (ego_hit) result.collision_episodes += 1;
        break;
      }
      raw = raw_next;
      norm = norm_next;
    }
    result.triggers_per_episode.push_back(triggers);
    result.total_triggers += triggers;
    if (learning && cfg.train.target_sync_episodes > 0 &&
        (ep + 1) % cfg.train.target_sync_episodes == 0) {
      target = net;
    }
  }

  // Trailing moving average of the per-episode trigger counts.
  int window = std::max(1, cfg.adapt.trigger_window);
  double running = 0.0;
  for (std::size_t i = 0; i < result.triggers_per_episode.size(); ++i) {
    running += result.triggers_per_episode[i];
    if (i >= static_cast<std::size_t>(window)) running -= result.triggers_per_episode[i - window];
    double denom = std::min<std::size_t>(i + 1, static_cast<std::size_t>(window));
    result.trigger_moving_avg.push_back(running / static_cast<double>(denom));
  }
  if (trigger_log) {
    for (std::size_t i = 0; i < result.triggers_per_episode.size(); ++i) {
      trigger_log->row({format_number(static_cast<long long>(i)),
                        format_number(result.triggers_per_episode[i]),
                        format_number(result.trigger_moving_avg[i])});
    }
  }
  result.net = net;
  return result;
}

}  // namespace ringdrive
