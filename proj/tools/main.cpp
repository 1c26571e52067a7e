// Command-line front end for the ring-road driving workbench: training,
// evaluation, density sweeps, replay comparisons, shielded adaptation, and
// checkpoint inspection. Configuration precedence: flags > config file >
// built-in defaults.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ringdrive/checkpoint.hpp"
#include "ringdrive/config.hpp"
#include "ringdrive/csv.hpp"
#include "ringdrive/eval.hpp"
#include "ringdrive/trainer.hpp"

namespace fs = std::filesystem;
using namespace ringdrive;

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::string> out;
  std::optional<long long> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "flat key = value config file");
  cmd->add_option("--set", args.sets, "override a single config key, key=value")
      ->take_all();
  cmd->add_option("--out", args.out, "output directory for this run");
  cmd->add_option("--seed", args.seed, "master RNG seed");
}

std::string trim_copy(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

RunConfig build_config(const CommonArgs& args, const char* subcommand) {
  RunConfig cfg;
  if (!args.config_path.empty()) load_config_file(cfg, args.config_path);
  for (const std::string& kv : args.sets) {
    std::size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("--set expects key=value, got: " + kv);
    }
    apply_config_value(cfg, trim_copy(kv.substr(0, eq)), trim_copy(kv.substr(eq + 1)));
  }
  if (args.seed) cfg.seed = static_cast<std::uint64_t>(*args.seed);
  if (args.out) {
    cfg.out_dir = *args.out;
  } else if (cfg.out_dir.empty()) {
    const char* root = std::getenv("RINGDRIVE_OUT");
    cfg.out_dir = (fs::path(root ? root : "runs") / subcommand).string();
  }
  return cfg;
}

void prepare_out_dir(const RunConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  write_config_snapshot(cfg, (fs::path(cfg.out_dir) / "config.snapshot").string());
}

void set_fixed_density(RunConfig& cfg, int density) {
  cfg.n_cars_min = density;
  cfg.n_cars_max = density;
  cfg.eval.density = density;
}

TrainResult run_one_training(const RunConfig& cfg, const std::string& dir, bool audit,
                             const Checkpoint* resume) {
  fs::create_directories(dir);
  write_config_snapshot(cfg, (fs::path(dir) / "config.snapshot").string());
  CsvWriter training_log((fs::path(dir) / "training_log.csv").string());
  CsvWriter eval_log((fs::path(dir) / "eval_log.csv").string());
  std::optional<CsvWriter> audit_log;
  TrainSinks sinks{&training_log, &eval_log, nullptr};
  if (audit) {
    audit_log.emplace((fs::path(dir) / "shield_audit.csv").string());
    sinks.shield_audit = &*audit_log;
  }
  TrainResult result = train(cfg, sinks, resume);
  Checkpoint ck;
  ck.net = result.net;
  ck.adam = result.adam;
  ck.episodes_completed = cfg.train.episodes;
  ck.rng_state = result.rng_state;
  save_checkpoint((fs::path(dir) / "checkpoint.ckpt").string(), ck);
  return result;
}

double final_window_mean(const std::vector<EpisodeLog>& episodes, int window) {
  if (episodes.empty()) return 0.0;
  int n = std::min<int>(window, static_cast<int>(episodes.size()));
  double sum = 0.0;
  for (int i = static_cast<int>(episodes.size()) - n; i < static_cast<int>(episodes.size()); ++i) {
    sum += episodes[i].mean_reward;
  }
  return sum / n;
}

int cmd_train(const CommonArgs& common, int runs, std::optional<int> episodes,
              std::optional<int> density, bool no_shield,
              const std::optional<std::string>& replay, bool audit,
              const std::optional<std::string>& resume_path) {
  RunConfig cfg = build_config(common, "train");
  if (episodes) cfg.train.episodes = *episodes;
  if (density) set_fixed_density(cfg, *density);
  if (no_shield) cfg.train.shield_enabled = false;
  if (replay) apply_config_value(cfg, "replay_mode", *replay);
  prepare_out_dir(cfg);

  std::optional<Checkpoint> resume;
  if (resume_path) resume = load_checkpoint(*resume_path);
  if (runs <= 1) {
    TrainResult r = run_one_training(cfg, cfg.out_dir, audit, resume ? &*resume : nullptr);
    std::printf("trained %d episodes, final-100 mean reward %.4f, collisions %d\n",
                cfg.train.episodes, final_window_mean(r.episodes, 100),
                r.collision_episodes);
    return 0;
  }
  std::vector<std::vector<double>> curves;
  for (int i = 0; i < runs; ++i) {
    RunConfig run_cfg = cfg;
    run_cfg.seed = cfg.seed + static_cast<std::uint64_t>(i);
    std::string dir = (fs::path(cfg.out_dir) / ("run_" + std::to_string(i))).string();
    run_cfg.out_dir = dir;
    TrainResult r = run_one_training(run_cfg, dir, audit, resume ? &*resume : nullptr);
    std::vector<double> rewards;
    for (const auto& ep : r.episodes) rewards.push_back(ep.mean_reward);
    curves.push_back(std::move(rewards));
    std::printf("run %d: final-100 mean reward %.4f, collisions %d\n", i,
                final_window_mean(r.episodes, 100), r.collision_episodes);
  }
  CurveSeries curve = learning_curve(curves, 20);
  CsvWriter out((fs::path(cfg.out_dir) / "learning_curve.csv").string());
  out.row({"episode", "mean", "lower", "upper"});
  for (std::size_t i = 0; i < curve.mean.size(); ++i) {
    out.row({format_number(static_cast<long long>(i)), format_number(curve.mean[i]),
             format_number(curve.lower[i]), format_number(curve.upper[i])});
  }
  return 0;
}

PolicyKind parse_policy(const std::string& s) {
  if (s == "ddqn") return PolicyKind::Ddqn;
  if (s == "idm") return PolicyKind::IdmNoLaneChange;
  if (s == "idm-lc") return PolicyKind::IdmWithLaneChange;
  throw std::invalid_argument("policy must be ddqn, idm, or idm-lc");
}

int cmd_evaluate(const CommonArgs& common, const std::optional<std::string>& ckpt_path,
                 const std::string& policy_name, std::optional<int> episodes,
                 std::optional<int> density, bool dump_trajectory) {
  RunConfig cfg = build_config(common, "evaluate");
  if (episodes) cfg.eval.episodes = *episodes;
  if (density) cfg.eval.density = *density;
  PolicyKind policy = parse_policy(policy_name);
  std::optional<Checkpoint> ck;
  if (policy == PolicyKind::Ddqn) {
    if (!ckpt_path) throw std::invalid_argument("evaluate: --checkpoint is required for ddqn");
    ck = load_checkpoint(*ckpt_path);
  }
  prepare_out_dir(cfg);
  std::optional<CsvWriter> trajectory;
  if (dump_trajectory) {
    trajectory.emplace((fs::path(cfg.out_dir) / "trajectory.csv").string());
  }
  EvalMetrics m = evaluate_policy(ck ? &ck->net : nullptr, policy, cfg.eval.density,
                                  cfg.eval.episodes, cfg.seed, cfg,
                                  trajectory ? &*trajectory : nullptr);
  CsvWriter out((fs::path(cfg.out_dir) / "evaluation.csv").string());
  out.row({"episode", "mean_reward", "mean_speed", "shield_triggers", "collided"});
  for (std::size_t i = 0; i < m.episode_rewards.size(); ++i) {
    out.row({format_number(static_cast<long long>(i)), format_number(m.episode_rewards[i]),
             format_number(m.episode_speeds[i]), format_number(m.episode_triggers[i]),
             format_number(m.episode_collided[i])});
  }
  std::printf("policy %s, density %d: %d/%d episodes completed, mean reward %.4f, "
              "mean speed %.2f m/s, %lld shield triggers, %d collisions\n",
              to_string(policy), cfg.eval.density, m.completed_episodes, m.episodes,
              m.mean_reward, m.mean_speed, m.shield_triggers, m.collisions);
  return 0;
}

int cmd_sweep(const CommonArgs& common, const std::string& ckpt_path,
              std::optional<int> episodes_per) {
  RunConfig cfg = build_config(common, "sweep-density");
  if (episodes_per) cfg.eval.episodes_per_density = *episodes_per;
  Checkpoint ck = load_checkpoint(ckpt_path);
  prepare_out_dir(cfg);
  std::vector<SweepRow> rows = density_sweep(ck.net, cfg.eval.densities,
                                             cfg.eval.episodes_per_density, cfg.seed, cfg);
  CsvWriter out((fs::path(cfg.out_dir) / "density_sweep.csv").string());
  out.row({"density", "policy", "mean_speed", "mean_reward", "collisions", "episodes"});
  for (const SweepRow& r : rows) {
    out.row({format_number(r.density), to_string(r.policy), format_number(r.mean_speed),
             format_number(r.mean_reward), format_number(r.collisions),
             format_number(r.episodes)});
    std::printf("density %2d  %-7s mean speed %6.2f m/s  mean reward %8.4f  collisions %d\n",
                r.density, to_string(r.policy), r.mean_speed, r.mean_reward, r.collisions);
  }
  return 0;
}

int cmd_compare_replay(const CommonArgs& common, std::optional<int> episodes,
                       std::optional<int> density) {
  RunConfig cfg = build_config(common, "compare-replay");
  if (episodes) cfg.train.episodes = *episodes;
  if (density) set_fixed_density(cfg, *density);
  prepare_out_dir(cfg);
  CsvWriter out((fs::path(cfg.out_dir) / "replay_comparison.csv").string());
  out.row({"replay_mode", "final_window_mean_reward", "collision_episodes"});
  for (ReplayMode mode : {ReplayMode::DualBuffer, ReplayMode::Prioritized}) {
    RunConfig arm = cfg;
    arm.train.replay_mode = mode;
    std::string dir = (fs::path(cfg.out_dir) / to_string(mode)).string();
    arm.out_dir = dir;
    TrainResult r = run_one_training(arm, dir, false, nullptr);
    double fw = final_window_mean(r.episodes, 100);
    out.row({to_string(mode), format_number(fw), format_number(r.collision_episodes)});
    std::printf("%-4s replay: final-100 mean reward %.4f, collision episodes %d\n",
                to_string(mode), fw, r.collision_episodes);
  }
  return 0;
}

int cmd_adapt(const CommonArgs& common, const std::string& ckpt_path,
              std::optional<int> episodes, std::optional<double> lr,
              std::optional<int> density) {
  RunConfig cfg = build_config(common, "adapt");
  if (episodes) cfg.adapt.episodes = *episodes;
  if (lr) cfg.adapt.learning_rate = *lr;
  if (density) set_fixed_density(cfg, *density);
  Checkpoint ck = load_checkpoint(ckpt_path);
  prepare_out_dir(cfg);
  CsvWriter log((fs::path(cfg.out_dir) / "adaptation_triggers.csv").string());
  AdaptResult r = adapt(ck.net, cfg, &log);
  Checkpoint adapted;
  adapted.net = r.net;
  adapted.episodes_completed = ck.episodes_completed + cfg.adapt.episodes;
  save_checkpoint((fs::path(cfg.out_dir) / "checkpoint.ckpt").string(), adapted);
  double first_avg = r.trigger_moving_avg.empty() ? 0.0 : r.trigger_moving_avg.front();
  double last_avg = r.trigger_moving_avg.empty() ? 0.0 : r.trigger_moving_avg.back();
  std::printf("adaptation over %d episodes (lr %g): %lld total triggers, "
              "moving average %.3f -> %.3f, collisions %d\n",
              cfg.adapt.episodes, cfg.adapt.learning_rate, r.total_triggers, first_avg,
              last_avg, r.collision_episodes);
  return 0;
}

int cmd_inspect(const std::string& ckpt_path) {
  Checkpoint ck = load_checkpoint(ckpt_path);
  std::printf("checkpoint: %s\n", ckpt_path.c_str());
  std::printf("format version: %u\n", kCheckpointVersion);
  std::string arch;
  for (std::size_t i = 0; i < ck.net.arch.size(); ++i) {
    if (i) arch += "x";
    arch += std::to_string(ck.net.arch[i]);
  }
  std::printf("architecture: %s (leak %g, %zu parameters)\n", arch.c_str(), ck.net.leak,
              ck.net.theta.size());
  std::printf("feature-order hash: %016llx\n",
              static_cast<unsigned long long>(affordance_ordering_hash()));
  std::printf("episodes completed: %lld\n", static_cast<long long>(ck.episodes_completed));
  if (ck.adam) {
    std::printf("optimizer: adam lr %g, %lld steps taken\n", ck.adam->lr, ck.adam->step);
  } else {
    std::printf("optimizer: none stored\n");
  }
  std::printf("rng state: %s\n", ck.rng_state ? "stored (resumable)" : "absent");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ring-road driving workbench: shielded double-DQN training and evaluation"};
  app.require_subcommand(1);

  CommonArgs train_args, eval_args, sweep_args, cmp_args, adapt_args;
  int runs = 1;
  std::optional<int> train_episodes, train_density;
  bool no_shield = false, audit = false;
  std::optional<std::string> replay_mode, resume_path;
  CLI::App* train_cmd = app.add_subcommand("train", "train a policy");
  add_common(train_cmd, train_args);
  train_cmd->add_option("--runs", runs, "train this many seeds (seed, seed+1, ...)");
  train_cmd->add_option("--episodes", train_episodes, "training episodes");
  train_cmd->add_option("--density", train_density, "fixed traffic count per episode");
  train_cmd->add_flag("--no-shield", no_shield, "disable the safety shield");
  train_cmd->add_option("--replay", replay_mode, "replay mode: dual or per");
  train_cmd->add_flag("--audit", audit, "write a shield audit log");
  train_cmd->add_option("--resume", resume_path, "resume from a checkpoint");

  std::optional<std::string> eval_ckpt;
  std::string eval_policy = "ddqn";
  std::optional<int> eval_episodes, eval_density;
  bool dump_trajectory = false;
  CLI::App* eval_cmd = app.add_subcommand("evaluate", "greedy rollouts of a policy");
  add_common(eval_cmd, eval_args);
  eval_cmd->add_option("--checkpoint", eval_ckpt, "trained checkpoint path");
  eval_cmd->add_option("--policy", eval_policy, "ddqn, idm, or idm-lc");
  eval_cmd->add_option("--episodes", eval_episodes, "evaluation episodes");
  eval_cmd->add_option("--density", eval_density, "traffic count (0 = empty road)");
  eval_cmd->add_flag("--dump-trajectory", dump_trajectory,
                     "dump the first episode's trajectory CSV");

  std::string sweep_ckpt;
  std::optional<int> episodes_per;
  CLI::App* sweep_cmd = app.add_subcommand("sweep-density",
                                           "compare policies across traffic densities");
  add_common(sweep_cmd, sweep_args);
  sweep_cmd->add_option("--checkpoint", sweep_ckpt, "trained checkpoint path")->required();
  sweep_cmd->add_option("--episodes-per", episodes_per, "episodes per (density, policy)");

  std::optional<int> cmp_episodes, cmp_density;
  CLI::App* cmp_cmd = app.add_subcommand("compare-replay",
                                         "train dual-buffer and prioritized arms");
  add_common(cmp_cmd, cmp_args);
  cmp_cmd->add_option("--episodes", cmp_episodes, "training episodes per arm");
  cmp_cmd->add_option("--density", cmp_density, "fixed traffic count per episode");

  std::string adapt_ckpt;
  std::optional<int> adapt_episodes, adapt_density;
  std::optional<double> adapt_lr;
  CLI::App* adapt_cmd = app.add_subcommand("adapt",
                                           "run the shielded policy and keep learning");
  add_common(adapt_cmd, adapt_args);
  adapt_cmd->add_option("--checkpoint", adapt_ckpt, "trained checkpoint path")->required();
  adapt_cmd->add_option("--episodes", adapt_episodes, "adaptation episodes");
  adapt_cmd->add_option("--lr", adapt_lr, "adaptation learning rate (0 = frozen)");
  adapt_cmd->add_option("--density", adapt_density, "fixed traffic count per episode");

  std::string inspect_ckpt;
  CLI::App* inspect_cmd = app.add_subcommand("inspect-checkpoint",
                                             "print a checkpoint's header");
  inspect_cmd->add_option("--checkpoint", inspect_ckpt, "checkpoint path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*train_cmd) {
      return cmd_train(train_args, runs, train_episodes, train_density, no_shield,
                       replay_mode, audit, resume_path);
    }
    if (*eval_cmd) {
      return cmd_evaluate(eval_args, eval_ckpt, eval_policy, eval_episodes, eval_density,
                          dump_trajectory);
    }
    if (*sweep_cmd) return cmd_sweep(sweep_args, sweep_ckpt, episodes_per);
    if (*cmp_cmd) return cmd_compare_replay(cmp_args, cmp_episodes, cmp_density);
    if (*adapt_cmd) {
      return cmd_adapt(adapt_args, adapt_ckpt, adapt_episodes, adapt_lr, adapt_density);
    }
    if (*inspect_cmd) return cmd_inspect(inspect_ckpt);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
