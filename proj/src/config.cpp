#include "uavsched/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "uavsched/errors.hpp"

namespace uavsched {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(v)) {
    throw ConfigError(key + ": expected a real number, got '" + text + "'");
  }
  return v;
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  Int v{};
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
    throw ConfigError(key + ": expected an integer, got '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1") return true;
  if (t == "false" || t == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct Field {
  const char* key;
  std::function<std::string(const RunConfig&)> get;  // null for input-only aliases
  std::function<void(RunConfig&, const std::string&)> set;
};

#define UAV_INT_FIELD(name, member)                                                       \
  Field {                                                                                 \
    name, [](const RunConfig& c) { return std::to_string(c.member); },                   \
        [](RunConfig& c, const std::string& v) { c.member = parse_int<int>(name, v); }    \
  }
#define UAV_REAL_FIELD(name, member)                                                      \
  Field {                                                                                 \
    name, [](const RunConfig& c) { return format_double(c.member); },                    \
        [](RunConfig& c, const std::string& v) { c.member = parse_double(name, v); }      \
  }
#define UAV_BOOL_FIELD(name, member)                                                      \
  Field {                                                                                 \
    name, [](const RunConfig& c) { return std::string(c.member ? "true" : "false"); },   \
        [](RunConfig& c, const std::string& v) { c.member = parse_bool(name, v); }        \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      UAV_INT_FIELD("num_devices", sim.num_devices),
      UAV_INT_FIELD("num_laps", sim.num_laps),
      UAV_INT_FIELD("battery_levels", sim.battery_levels),
      UAV_REAL_FIELD("battery_capacity", sim.battery_capacity),
      UAV_INT_FIELD("queue_capacity", sim.queue_capacity),
      UAV_INT_FIELD("max_order", sim.max_order),
      UAV_REAL_FIELD("v_min", sim.v_min),
      UAV_REAL_FIELD("v_max", sim.v_max),
      UAV_INT_FIELD("num_velocities", sim.num_velocities),
      UAV_INT_FIELD("num_waypoints", sim.num_waypoints),
      UAV_REAL_FIELD("trajectory_radius", sim.trajectory_radius),
      UAV_REAL_FIELD("altitude", sim.altitude),
      UAV_REAL_FIELD("region_radius", sim.region_radius),
      UAV_REAL_FIELD("bits_per_packet", sim.bits_per_packet),
      UAV_REAL_FIELD("bandwidth", sim.bandwidth),
      UAV_REAL_FIELD("ber_target", sim.ber_target),
      UAV_REAL_FIELD("uav_tx_power", sim.uav_tx_power),
      UAV_REAL_FIELD("arrival_prob", sim.arrival_prob),
      UAV_BOOL_FIELD("arrival_time_scaled", sim.arrival_time_scaled),
      UAV_INT_FIELD("packets_per_uplink", sim.packets_per_uplink),
      UAV_REAL_FIELD("idle_drain", sim.idle_drain),
      UAV_INT_FIELD("nakagami_m", sim.fading.m),
      UAV_REAL_FIELD("mean_gain_1m", sim.fading.mean_gain_1m),
      Field{"mean_gain_1m_db", nullptr,
            [](RunConfig& c, const std::string& v) { c.sim.fading.mean_gain_1m = from_db(parse_double("mean_gain_1m_db", v)); }},
      UAV_REAL_FIELD("pathloss_exp", sim.fading.pathloss_exp),
      UAV_REAL_FIELD("noise_power", sim.fading.noise_power),
      Field{"noise_power_dbm", nullptr,
            [](RunConfig& c, const std::string& v) {
              c.sim.fading.noise_power = from_db(parse_double("noise_power_dbm", v)) * 1e-3;
            }},
      UAV_REAL_FIELD("kappa1", sim.fading.kappa1),
      UAV_REAL_FIELD("kappa2", sim.fading.kappa2),
      UAV_REAL_FIELD("mpt_eta0", sim.mpt.eta0),
      UAV_REAL_FIELD("mpt_d_omega", sim.mpt.d_omega),
      UAV_INT_FIELD("num_gain_bins", sim.num_gain_bins),
      Field{"gain_thresholds_db",
            [](const RunConfig& c) {
              std::string out;
              for (std::size_t i = 0; i < c.sim.gain_thresholds_db.size(); ++i) {
                if (i) out += ",";
                out += format_double(c.sim.gain_thresholds_db[i]);
              }
              return out;
            },
            [](RunConfig& c, const std::string& v) {
              c.sim.gain_thresholds_db.clear();
              for (const auto& item : split_list(v)) {
                c.sim.gain_thresholds_db.push_back(parse_double("gain_thresholds_db", item));
              }
            }},
      Field{"channel_mode", [](const RunConfig& c) { return to_string(c.sim.channel_mode); },
            [](RunConfig& c, const std::string& v) { c.sim.channel_mode = channel_mode_from_string(trim(v)); }},
      UAV_REAL_FIELD("ar_coeff", sim.ar_coeff),
      Field{"seed", [](const RunConfig& c) { return std::to_string(c.sim.seed); },
            [](RunConfig& c, const std::string& v) { c.sim.seed = parse_int<std::uint64_t>("seed", v); }},

      UAV_INT_FIELD("episodes", training.episodes),
      UAV_INT_FIELD("steps", training.steps),
      UAV_REAL_FIELD("discount", training.discount),
      UAV_REAL_FIELD("learning_rate", training.learning_rate),
      UAV_INT_FIELD("replay_capacity", training.replay_capacity),
      UAV_INT_FIELD("batch_size", training.batch_size),
      UAV_INT_FIELD("target_period", training.target_period),
      UAV_INT_FIELD("warmup", training.warmup),
      Field{"hidden_layers",
            [](const RunConfig& c) {
              std::string out;
              for (std::size_t i = 0; i < c.training.hidden_layers.size(); ++i) {
                if (i) out += ",";
                out += std::to_string(c.training.hidden_layers[i]);
              }
              return out;
            },
            [](RunConfig& c, const std::string& v) {
              c.training.hidden_layers.clear();
              for (const auto& item : split_list(v)) {
                c.training.hidden_layers.push_back(parse_int<int>("hidden_layers", item));
              }
            }},
      UAV_REAL_FIELD("grad_clip", training.grad_clip),
      UAV_REAL_FIELD("epsilon_start", training.epsilon_start),
      UAV_REAL_FIELD("epsilon_end", training.epsilon_end),
      UAV_REAL_FIELD("epsilon_decay_fraction", training.epsilon_decay_fraction),
      UAV_REAL_FIELD("cost_scale", training.cost_scale),
      UAV_INT_FIELD("eval_episodes", training.eval_episodes),
      UAV_REAL_FIELD("tabular_learning_rate", training.tabular_learning_rate),
  };
  return table;
}

#undef UAV_INT_FIELD
#undef UAV_REAL_FIELD
#undef UAV_BOOL_FIELD

const Field& find_field(const std::string& key) {
  for (const auto& f : fields()) {
    if (key == f.key) return f;
  }
  throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

std::string to_string(ChannelMode mode) {
  switch (mode) {
    case ChannelMode::kIid: return "iid";
    case ChannelMode::kAr1: return "ar1";
    case ChannelMode::kQuantized: return "quantized";
  }
  return "iid";
}

ChannelMode channel_mode_from_string(const std::string& text) {
  if (text == "iid") return ChannelMode::kIid;
  if (text == "ar1") return ChannelMode::kAr1;
  if (text == "quantized") return ChannelMode::kQuantized;
  throw ConfigError("channel_mode: expected iid, ar1 or quantized, got '" + text + "'");
}

void SimConfig::validate() const {
  if (num_devices < 1) throw ConfigError("num_devices must be >= 1");
  if (num_laps < 1) throw ConfigError("num_laps must be >= 1");
  if (battery_levels < 1) throw ConfigError("battery_levels must be >= 1");
  if (!(battery_capacity > 0.0)) throw ConfigError("battery_capacity must be > 0");
  if (queue_capacity < 1) throw ConfigError("queue_capacity must be >= 1");
  if (max_order < 1) throw ConfigError("max_order must be >= 1");
  if (!(v_min > 0.0)) throw ConfigError("v_min must be > 0");
  if (!(v_min < v_max)) throw ConfigError("v_min must be < v_max");
  if (num_velocities < 1) throw ConfigError("num_velocities must be >= 1");
  if (num_waypoints < 3) throw ConfigError("num_waypoints must be >= 3");
  if (!(trajectory_radius > 0.0)) throw ConfigError("trajectory_radius must be > 0");
  if (!(altitude > 0.0)) throw ConfigError("altitude must be > 0");
  if (!(region_radius > 0.0)) throw ConfigError("region_radius must be > 0");
  if (!(bits_per_packet > 0.0)) throw ConfigError("bits_per_packet must be > 0");
  if (!(bandwidth > 0.0)) throw ConfigError("bandwidth must be > 0");
  if (!(uav_tx_power > 0.0)) throw ConfigError("uav_tx_power must be > 0");
  if (!(arrival_prob >= 0.0 && arrival_prob <= 1.0)) throw ConfigError("arrival_prob must lie in [0, 1]");
  if (packets_per_uplink < 1) throw ConfigError("packets_per_uplink must be >= 1");
  if (!(idle_drain >= 0.0)) throw ConfigError("idle_drain must be >= 0");
  fading.validate();
  if (!(ber_target > 0.0 && ber_target < fading.kappa1)) throw ConfigError("ber_target must lie in (0, kappa1)");
  if (!(mpt.eta0 >= 0.0 && mpt.eta0 <= 1.0)) throw ConfigError("mpt_eta0 must lie in [0, 1]");
  if (!(mpt.d_omega > 0.0)) throw ConfigError("mpt_d_omega must be > 0");
  if (num_gain_bins < 1) throw ConfigError("num_gain_bins must be >= 1");
  if (!gain_thresholds_db.empty() && static_cast<int>(gain_thresholds_db.size()) != num_gain_bins - 1) {
    throw ConfigError("gain_thresholds_db must hold num_gain_bins - 1 values");
  }
  for (std::size_t i = 1; i < gain_thresholds_db.size(); ++i) {
    if (!(gain_thresholds_db[i - 1] < gain_thresholds_db[i])) throw ConfigError("gain_thresholds_db must be ascending");
  }
  if (channel_mode == ChannelMode::kAr1 && fading.m != 1) {
    throw ConfigError("channel_mode: ar1 requires nakagami_m = 1");
  }
  if (!(ar_coeff >= 0.0 && ar_coeff < 1.0)) throw ConfigError("ar_coeff must lie in [0, 1)");
}

std::vector<double> SimConfig::velocity_grid() const {
  if (num_velocities == 1) return {0.5 * (v_min + v_max)};
  std::vector<double> grid(num_velocities);
  for (int k = 0; k < num_velocities; ++k) {
    grid[k] = v_min + (v_max - v_min) * k / (num_velocities - 1);
  }
  return grid;
}

double SimConfig::segment_length() const { return 2.0 * std::numbers::pi * trajectory_radius / num_waypoints; }

void TrainingConfig::validate() const {
  if (episodes < 1) throw ConfigError("episodes must be >= 1");
  if (steps < 1) throw ConfigError("steps must be >= 1");
  if (!(discount >= 0.0 && discount <= 1.0)) throw ConfigError("discount must lie in [0, 1]");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (replay_capacity < 1) throw ConfigError("replay_capacity must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (batch_size > replay_capacity) throw ConfigError("batch_size must not exceed replay_capacity");
  if (target_period < 1) throw ConfigError("target_period must be >= 1");
  if (warmup < batch_size) throw ConfigError("warmup must be >= batch_size");
  if (hidden_layers.empty()) throw ConfigError("hidden_layers must list at least one width");
  for (int h : hidden_layers) {
    if (h < 1) throw ConfigError("hidden_layers widths must be >= 1");
  }
  if (!(grad_clip > 0.0)) throw ConfigError("grad_clip must be > 0");
  if (!(epsilon_end >= 0.0 && epsilon_end <= epsilon_start && epsilon_start <= 1.0)) {
    throw ConfigError("epsilon_start/epsilon_end must satisfy 0 <= end <= start <= 1");
  }
  if (!(epsilon_decay_fraction > 0.0 && epsilon_decay_fraction <= 1.0)) {
    throw ConfigError("epsilon_decay_fraction must lie in (0, 1]");
  }
  if (!(cost_scale > 0.0)) throw ConfigError("cost_scale must be > 0");
  if (eval_episodes < 1) throw ConfigError("eval_episodes must be >= 1");
  if (!(tabular_learning_rate > 0.0 && tabular_learning_rate <= 1.0)) {
    throw ConfigError("tabular_learning_rate must lie in (0, 1]");
  }
}

void set_config_value(RunConfig& config, const std::string& key, const std::string& value) {
  find_field(key).set(config, value);
}

std::string get_config_value(const RunConfig& config, const std::string& key) {
  const auto& f = find_field(key);
  if (!f.get) throw ConfigError("config key '" + key + "' is input-only");
  return f.get(config);
}

RunConfig parse_config(const std::string& text) {
  RunConfig config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    set_config_value(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  config.validate();
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string format_config(const RunConfig& config) {
  std::string out = "# fully resolved configuration\n";
  for (const auto& f : fields()) {
    if (!f.get) continue;
    out += f.key;
    out += " = ";
    out += f.get(config);
    out += "\n";
  }
  return out;
}

void save_config(const RunConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  out << format_config(config);
}

}  // namespace uavsched
