#include "ringdrive/config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "ringdrive/csv.hpp"

namespace ringdrive {

const char* to_string(ReplayMode m) {
  return m == ReplayMode::DualBuffer ? "dual" : "per";
}

namespace {

double parse_double(const std::string& s) {
  std::size_t pos = 0;
  double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("bad number: " + s);
  return v;
}

long long parse_int(const std::string& s) {
  std::size_t pos = 0;
  long long v = std::stoll(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("bad integer: " + s);
  return v;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "on") return true;
  if (s == "false" || s == "0" || s == "off") return false;
  throw std::invalid_argument("bad boolean: " + s);
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

struct Entry {
  const char* key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

// The registry is spelled out longhand: one line per key, getter and setter
// side by side, so the full config surface is visible in one place.
const std::vector<Entry>& registry() {
  auto D = [](const char* key, auto accessor) {
    return Entry{
        key,
        [accessor](const RunConfig& c) { return format_number(accessor(const_cast<RunConfig&>(c))); },
        [accessor](RunConfig& c, const std::string& v) { accessor(c) = parse_double(v); }};
  };
  auto I = [](const char* key, auto accessor) {
    return Entry{
        key,
        [accessor](const RunConfig& c) { return format_number(static_cast<long long>(accessor(const_cast<RunConfig&>(c)))); },
        [accessor](RunConfig& c, const std::string& v) {
          using Field = std::remove_reference_t<decltype(accessor(c))>;
          accessor(c) = static_cast<Field>(parse_int(v));
        }};
  };
  auto B = [](const char* key, auto accessor) {
    return Entry{
        key,
        [accessor](const RunConfig& c) { return std::string(accessor(const_cast<RunConfig&>(c)) ? "true" : "false"); },
        [accessor](RunConfig& c, const std::string& v) { accessor(c) = parse_bool(v); }};
  };
  static const std::vector<Entry> entries = {
      D("circumference", [](RunConfig& c) -> double& { return c.sim.circumference; }),
      D("lane_width", [](RunConfig& c) -> double& { return c.sim.lane_width; }),
      D("dt", [](RunConfig& c) -> double& { return c.sim.dt; }),
      D("lane_change_duration", [](RunConfig& c) -> double& { return c.sim.lane_change_duration; }),
      D("accel_nominal", [](RunConfig& c) -> double& { return c.sim.accel_nominal; }),
      D("accel_hard", [](RunConfig& c) -> double& { return c.sim.accel_hard; }),
      D("vehicle_length", [](RunConfig& c) -> double& { return c.sim.vehicle_length; }),
      D("vehicle_width", [](RunConfig& c) -> double& { return c.sim.vehicle_width; }),
      D("ego_v_max", [](RunConfig& c) -> double& { return c.sim.ego_v_max; }),
      D("ego_speed_init", [](RunConfig& c) -> double& { return c.sim.ego_speed_init; }),
      D("traffic_v_max_min", [](RunConfig& c) -> double& { return c.sim.traffic_v_max_min; }),
      D("traffic_v_max_max", [](RunConfig& c) -> double& { return c.sim.traffic_v_max_max; }),
      D("traffic_lane_change_prob", [](RunConfig& c) -> double& { return c.sim.traffic_lane_change_prob; }),
      D("spawn_range", [](RunConfig& c) -> double& { return c.sim.spawn_range; }),
      D("spawn_clearance", [](RunConfig& c) -> double& { return c.sim.spawn_clearance; }),
      I("max_traffic", [](RunConfig& c) -> int& { return c.sim.max_traffic; }),
      D("sensor_range", [](RunConfig& c) -> double& { return c.affordance.sensor_range; }),
      D("velocity_scale", [](RunConfig& c) -> double& { return c.affordance.velocity_scale; }),
      D("t_min", [](RunConfig& c) -> double& { return c.safety.t_min; }),
      D("d_tv_min", [](RunConfig& c) -> double& { return c.safety.d_tv_min; }),
      D("t_hard_brake", [](RunConfig& c) -> double& { return c.safety.t_hard_brake; }),
      D("t_brake", [](RunConfig& c) -> double& { return c.safety.t_brake; }),
      D("t_accel", [](RunConfig& c) -> double& { return c.safety.t_accel; }),
      D("v_des", [](RunConfig& c) -> double& { return c.reward.v_des; }),
      D("y_des", [](RunConfig& c) -> double& { return c.reward.y_des; }),
      D("headway_min", [](RunConfig& c) -> double& { return c.reward.headway_min; }),
      D("d_safe_floor", [](RunConfig& c) -> double& { return c.reward.d_safe_floor; }),
      D("r_col", [](RunConfig& c) -> double& { return c.reward.r_col; }),
      D("reward_weight_v", [](RunConfig& c) -> double& { return c.reward.weight_v; }),
      D("reward_weight_y", [](RunConfig& c) -> double& { return c.reward.weight_y; }),
      D("reward_weight_x", [](RunConfig& c) -> double& { return c.reward.weight_x; }),
      D("gamma", [](RunConfig& c) -> double& { return c.train.gamma; }),
      I("episodes", [](RunConfig& c) -> int& { return c.train.episodes; }),
      I("samples_per_episode", [](RunConfig& c) -> int& { return c.train.samples_per_episode; }),
      D("epsilon_start", [](RunConfig& c) -> double& { return c.train.epsilon_start; }),
      D("epsilon_end", [](RunConfig& c) -> double& { return c.train.epsilon_end; }),
      I("epsilon_anneal_episodes", [](RunConfig& c) -> int& { return c.train.epsilon_anneal_episodes; }),
      I("target_sync_episodes", [](RunConfig& c) -> int& { return c.train.target_sync_episodes; }),
      I("minibatch_size", [](RunConfig& c) -> int& { return c.train.minibatch_size; }),
      D("collision_fraction", [](RunConfig& c) -> double& { return c.train.collision_fraction; }),
      I("safe_capacity", [](RunConfig& c) -> std::size_t& { return c.train.safe_capacity; }),
      I("collision_capacity", [](RunConfig& c) -> std::size_t& { return c.train.collision_capacity; }),
      D("learning_rate", [](RunConfig& c) -> double& { return c.train.learning_rate; }),
      B("shield", [](RunConfig& c) -> bool& { return c.train.shield_enabled; }),
      D("per_alpha", [](RunConfig& c) -> double& { return c.train.per_alpha; }),
      D("per_beta", [](RunConfig& c) -> double& { return c.train.per_beta; }),
      D("per_epsilon", [](RunConfig& c) -> double& { return c.train.per_epsilon; }),
      I("eval_period", [](RunConfig& c) -> int& { return c.train.eval_period; }),
      I("eval_episodes", [](RunConfig& c) -> int& { return c.train.eval_episodes; }),
      I("adapt_episodes", [](RunConfig& c) -> int& { return c.adapt.episodes; }),
      D("adapt_learning_rate", [](RunConfig& c) -> double& { return c.adapt.learning_rate; }),
      I("trigger_window", [](RunConfig& c) -> int& { return c.adapt.trigger_window; }),
      I("evaluation_episodes", [](RunConfig& c) -> int& { return c.eval.episodes; }),
      I("density", [](RunConfig& c) -> int& { return c.eval.density; }),
      I("episodes_per_density", [](RunConfig& c) -> int& { return c.eval.episodes_per_density; }),
      I("n_cars_min", [](RunConfig& c) -> int& { return c.n_cars_min; }),
      I("n_cars_max", [](RunConfig& c) -> int& { return c.n_cars_max; }),
      Entry{"replay_mode",
            [](const RunConfig& c) { return std::string(to_string(c.train.replay_mode)); },
            [](RunConfig& c, const std::string& v) {
              if (v == "dual") c.train.replay_mode = ReplayMode::DualBuffer;
              else if (v == "per") c.train.replay_mode = ReplayMode::Prioritized;
              else throw std::invalid_argument("replay_mode must be dual or per");
            }},
      Entry{"densities",
            [](const RunConfig& c) {
              std::string s;
              for (std::size_t i = 0; i < c.eval.densities.size(); ++i) {
                if (i) s += ',';
                s += format_number(c.eval.densities[i]);
              }
              return s;
            },
            [](RunConfig& c, const std::string& v) {
              std::vector<int> out;
              std::stringstream ss(v);
              std::string item;
              while (std::getline(ss, item, ',')) {
                out.push_back(static_cast<int>(parse_int(trim(item))));
              }
              if (out.empty()) throw std::invalid_argument("densities: empty list");
              c.eval.densities = std::move(out);
            }},
      Entry{"seed",
            [](const RunConfig& c) { return format_number(static_cast<long long>(c.seed)); },
            [](RunConfig& c, const std::string& v) {
              c.seed = static_cast<std::uint64_t>(parse_int(v));
            }},
      Entry{"out_dir",
            [](const RunConfig& c) { return c.out_dir; },
            [](RunConfig& c, const std::string& v) { c.out_dir = v; }},
  };
  return entries;
}

}  // namespace

void apply_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const Entry& e : registry()) {
    if (key == e.key) {
      e.set(cfg, value);
      return;
    }
  }
  throw std::invalid_argument("unknown config key: " + key);
}

void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                  ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    try {
      apply_config_value(cfg, key, value);
    } catch (const std::exception& e) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void write_config_snapshot(const RunConfig& cfg, std::ostream& os) {
  for (const Entry& e : registry()) {
    os << e.key << " = " << e.get(cfg) << "\n";
  }
}

void write_config_snapshot(const RunConfig& cfg, const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_config_snapshot(cfg, os);
}

}  // namespace ringdrive
