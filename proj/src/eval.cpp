#include "ringdrive/eval.hpp"

#include <cmath>
#include <stdexcept>

#include "ringdrive/csv.hpp"
#include "ringdrive/reward.hpp"
#include "ringdrive/trainer.hpp"

namespace ringdrive {

const char* to_string(PolicyKind p) {
  switch (p) {
    case PolicyKind::Ddqn: return "ddqn";
    case PolicyKind::IdmNoLaneChange: return "idm";
    case PolicyKind::IdmWithLaneChange: return "idm_lc";
  }
  return "?";
}

Action idm_baseline(const AffordanceVector& aff, const EgoContext& ctx,
                    bool with_lane_change, const SafetyParams& p) {
  Action a;
  double gap = aff.d_x(Slot::ClFront);
  double closing = -aff.v_x(Slot::ClFront);
  a.longitudinal = idm_longitudinal(time_to_collision(std::max(gap, 0.0), closing), p);
  if (!with_lane_change || ctx.lane_change) return a;

  // Consider both adjacent lanes; require a clearly better front gap (10 m)
  // and the gap rule against the target lane's front and rear occupants.
  double best_gain = 0.0;
  int best_target = -1;
  struct Option { int target; Slot front, rear; };
  const Option options[2] = {{ctx.lane + 1, Slot::LlFront, Slot::LlRear},
                             {ctx.lane - 1, Slot::RlFront, Slot::RlRear}};
  for (const Option& o : options) {
    if (o.target < 0 || o.target >= kNumLanes) continue;
    double target_gap = aff.d_x(o.front);
    if (target_gap < gap + 10.0) continue;
    if (!gap_ok(aff.d_x(o.front), -aff.v_x(o.front), p)) continue;
    if (!gap_ok(-aff.d_x(o.rear), aff.v_x(o.rear), p)) continue;
    double gain = target_gap - gap;
    // ties prefer the left lane, checked first
    if (best_target < 0 || gain > best_gain) {
      best_target = o.target;
      best_gain = gain;
    }
  }
  if (best_target >= 0) {
    a.lateral = best_target > ctx.lane ? LateralAction::ChangeLeft : LateralAction::ChangeRight;
  }
  return a;
}

EvalMetrics evaluate_policy(const QNetwork* net, PolicyKind policy, int density,
                            int episodes, std::uint64_t seed, const RunConfig& cfg) {
  return evaluate_policy(net, policy, density, episodes, seed, cfg, nullptr);
}

EvalMetrics evaluate_policy(const QNetwork* net, PolicyKind policy, int density,
                            int episodes, std::uint64_t seed, const RunConfig& cfg,
                            CsvWriter* trajectory) {
  if (policy == PolicyKind::Ddqn && !net) {
    throw std::invalid_argument("evaluate_policy: DDQN policy needs a network");
  }
  if (density < 0 || density > cfg.sim.max_traffic) {
    throw std::invalid_argument("evaluate_policy: density out of range");
  }
  EvalMetrics m;
  m.episodes = episodes;
  Workspace ws;
  if (trajectory) trajectory->row({"time_index", "id", "x", "y", "v_x", "v_y", "lane"});
  auto dump_world = [&](const WorldState& w) {
    for (const auto& v : w.vehicles) {
      trajectory->row({format_number(static_cast<long long>(w.time_index)),
                       format_number(v.id), format_number(v.x), format_number(v.y),
                       format_number(v.v_x), format_number(v.v_y), format_number(v.lane)});
    }
  };

  double reward_total = 0.0, speed_total = 0.0;
  long long completed_steps = 0;
  for (int e = 0; e < episodes; ++e) {
    std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(e)));
    WorldState w = make_ring_world(cfg.sim);
    if (density > 0) spawn_traffic(rng, density, w, cfg.sim);
    AffordanceVector raw = extract_affordance(w, cfg.affordance);
    AffordanceVector norm = normalize_affordance(raw, cfg.affordance);
    bool dump = trajectory && e == 0;
    if (dump) dump_world(w);

    double reward_sum = 0.0, speed_sum = 0.0;
    int steps = 0, triggers = 0, collided = 0;
    for (int t = 0; t < cfg.train.samples_per_episode; ++t) {
      EgoContext ctx = EgoContext::from(w.ego());
      Action proposed;
      if (policy == PolicyKind::Ddqn) {
        proposed = action_from_index(argmax_q(*net, norm.values, ws));
      } else {
        proposed = idm_baseline(raw, ctx, policy == PolicyKind::IdmWithLaneChange,
                                cfg.safety);
      }
      ShieldVerdict v = check_and_override(raw, proposed, ctx, cfg.safety);
      if (v.overridden) triggers += 1;
      // Baseline arms drive like scripted traffic, governor included; only
      // the learned policy runs bare behind the shield.
      StepOutcome out = step_world(w, v.executed, rng, cfg.sim, cfg.safety,
                                   policy != PolicyKind::Ddqn);
      raw = extract_affordance(w, cfg.affordance);
      norm = normalize_affordance(raw, cfg.affordance);
      bool ego_hit = out.collision && (out.collision->first == 0 || out.collision->second == 0);
      reward_sum += total_reward(raw, ego_hit, cfg.reward);
      speed_sum += w.ego().v_x;
      steps += 1;
      if (dump) dump_world(w);
      if (out.collision) {
        collided = 1;
        break;
      }
    }
    double ep_reward = steps > 0 ? reward_sum / steps : 0.0;
    double ep_speed = steps > 0 ? speed_sum / steps : 0.0;
    m.episode_rewards.push_back(ep_reward);
    m.episode_speeds.push_back(ep_speed);
    m.episode_triggers.push_back(triggers);
    m.episode_collided.push_back(collided);
    m.shield_triggers += triggers;
    if (collided) {
      m.collisions += 1;
    } else {
      m.completed_episodes += 1;
      reward_total += reward_sum;
      speed_total += speed_sum;
      completed_steps += steps;
    }
  }
  if (completed_steps > 0) {
    m.mean_reward = reward_total / static_cast<double>(completed_steps);
    m.mean_speed = speed_total / static_cast<double>(completed_steps);
  }
  return m;
}

std::vector<SweepRow> density_sweep(const QNetwork& net, std::span<const int> densities,
                                    int episodes_per_density, std::uint64_t seed,
                                    const RunConfig& cfg) {
  std::vector<SweepRow> rows;
  const PolicyKind policies[3] = {PolicyKind::IdmNoLaneChange,
                                  PolicyKind::IdmWithLaneChange, PolicyKind::Ddqn};
  for (int d : densities) {
    for (PolicyKind p : policies) {
      // same per-density seed across policies: identical traffic draws
      EvalMetrics m = evaluate_policy(p == PolicyKind::Ddqn ? &net : nullptr, p, d,
                                      episodes_per_density,
                                      mix_seed(seed, static_cast<std::uint64_t>(d)), cfg);
      SweepRow r;
      r.density = d;
      r.policy = p;
      r.mean_speed = m.mean_speed;
      r.mean_reward = m.mean_reward;
      r.collisions = m.collisions;
      r.episodes = episodes_per_density;
      rows.push_back(r);
    }
  }
  return rows;
}

CurveSeries learning_curve(const std::vector<std::vector<double>>& runs, int window) {
  if (runs.size() < 2) throw std::invalid_argument("learning_curve: need at least two runs");
  if (window < 1) throw std::invalid_argument("learning_curve: window must be positive");
  std::size_t len = runs[0].size();
  for (const auto& r : runs) len = std::min(len, r.size());

  // Trailing moving average per run, then pointwise stats across runs.
  std::vector<std::vector<double>> smooth(runs.size(), std::vector<double>(len));
  for (std::size_t r = 0; r < runs.size(); ++r) {
    double running = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      running += runs[r][i];
      if (i >= static_cast<std::size_t>(window)) running -= runs[r][i - window];
      double denom = static_cast<double>(std::min<std::size_t>(i + 1, window));
      smooth[r][i] = running / denom;
    }
  }
  CurveSeries out;
  out.mean.resize(len);
  out.lower.resize(len);
  out.upper.resize(len);
  double n = static_cast<double>(runs.size());
  for (std::size_t i = 0; i < len; ++i) {
    double sum = 0.0;
    for (const auto& r : smooth) sum += r[i];
    double mean = sum / n;
    double ss = 0.0;
    for (const auto& r : smooth) ss += (r[i] - mean) * (r[i] - mean);
    double stderr_ = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    out.mean[i] = mean;
    out.lower[i] = mean - 1.96 * stderr_;
    out.upper[i] = mean + 1.96 * stderr_;
  }
  return out;
}

}  // namespace ringdrive
