#include "uavsched/env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <nlohmann/json.hpp>

#include "uavsched/errors.hpp"

namespace uavsched {

namespace {

constexpr int kQuadratureNodes = 64;
constexpr double kGainClampDb = 60.0;

// E[G 1{G < x}] for a unit-mean Gamma(m, 1/m) variate.
double unit_gamma_partial_mean(int m, double x) {
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return unit_gamma_cdf(m + 1, m * x / (m + 1));
}

double unit_gamma_cdf_ext(int m, double x) {
  if (std::isinf(x)) return 1.0;
  return unit_gamma_cdf(m, x);
}

}  // namespace

std::int64_t EnvState::queued() const {
  std::int64_t total = 0;
  for (const auto& d : devices) total += d.queue;
  return total;
}

Environment::Environment(SimConfig config) : config_(std::move(config)) {
  config_.validate();
  velocity_grid_ = config_.velocity_grid();
  packet_success_ = std::pow(1.0 - config_.ber_target, config_.bits_per_packet);

  // Equal-probability rings for the device radius and uniform phase offsets.
  geometry_mean_gains_.reserve(kQuadratureNodes * kQuadratureNodes);
  for (int i = 0; i < kQuadratureNodes; ++i) {
    const double rho = config_.region_radius * std::sqrt((i + 0.5) / kQuadratureNodes);
    for (int j = 0; j < kQuadratureNodes; ++j) {
      const double phase = 2.0 * std::numbers::pi * (j + 0.5) / kQuadratureNodes;
      const double horizontal2 = rho * rho + config_.trajectory_radius * config_.trajectory_radius -
                                 2.0 * rho * config_.trajectory_radius * std::cos(phase);
      const double d = std::sqrt(std::max(0.0, horizontal2) + config_.altitude * config_.altitude);
      geometry_mean_gains_.push_back(mean_gain(config_.fading, d));
    }
  }

  median_gain_db_ = to_db(gain_quantile(0.5));
  if (!config_.gain_thresholds_db.empty()) {
    quantizer_ = GainQuantizer(config_.gain_thresholds_db);
  } else {
    const double lo = to_db(gain_quantile(0.05));
    const double hi = to_db(gain_quantile(0.95));
    std::vector<double> thresholds;
    for (int j = 1; j < config_.num_gain_bins; ++j) {
      thresholds.push_back(lo + (hi - lo) * j / config_.num_gain_bins);
    }
    quantizer_ = GainQuantizer(std::move(thresholds));
  }
}

double Environment::gain_cdf(double power_gain) const {
  double total = 0.0;
  for (double mean : geometry_mean_gains_) total += unit_gamma_cdf(config_.fading.m, power_gain / mean);
  return total / static_cast<double>(geometry_mean_gains_.size());
}

double Environment::gain_quantile(double probability) const {
  const auto [min_it, max_it] = std::minmax_element(geometry_mean_gains_.begin(), geometry_mean_gains_.end());
  double lo = to_db(*min_it) - 100.0;
  double hi = to_db(*max_it) + 40.0;
  for (int iter = 0; iter < 200 && hi - lo > 1e-10; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (gain_cdf(from_db(mid)) < probability) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return from_db(0.5 * (lo + hi));
}

std::vector<double> Environment::bin_probabilities(double distance) const {
  const double mean = mean_gain(config_.fading, distance);
  const auto& thresholds = quantizer_.thresholds_db();
  std::vector<double> probs(quantizer_.num_bins());
  double previous = 0.0;
  for (int h = 0; h < quantizer_.num_bins(); ++h) {
    const double upper = h < static_cast<int>(thresholds.size())
                             ? unit_gamma_cdf(config_.fading.m, from_db(thresholds[h]) / mean)
                             : 1.0;
    probs[h] = std::max(0.0, upper - previous);
    previous = upper;
  }
  return probs;
}

double Environment::bin_representative_gain(double distance, int bin) const {
  const double mean = mean_gain(config_.fading, distance);
  const auto& thresholds = quantizer_.thresholds_db();
  const int m = config_.fading.m;
  const double lo = bin > 0 ? from_db(thresholds[bin - 1]) / mean : 0.0;
  const double hi = bin < static_cast<int>(thresholds.size()) ? from_db(thresholds[bin]) / mean
                                                              : std::numeric_limits<double>::infinity();
  const double mass = unit_gamma_cdf_ext(m, hi) - unit_gamma_cdf_ext(m, lo);
  if (mass > 1e-300) {
    const double conditional = (unit_gamma_partial_mean(m, hi) - unit_gamma_partial_mean(m, lo)) / mass;
    if (conditional >= lo && conditional <= hi && conditional > 0.0) return mean * conditional;
  }
  // Negligible-probability bin: fall back to a finite edge.
  if (std::isinf(hi)) return mean * std::max(lo, 1.0);
  if (lo <= 0.0) return mean * std::min(hi, 1.0) * 0.5;
  return mean * std::sqrt(lo * hi);
}

void Environment::waypoint_position(int waypoint, double& x, double& y) const {
  const double angle = 2.0 * std::numbers::pi * waypoint / config_.num_waypoints;
  x = config_.trajectory_radius * std::cos(angle);
  y = config_.trajectory_radius * std::sin(angle);
}

LinkGeometry Environment::geometry(const EnvState& state, int device) const {
  const auto& d = state.devices[device];
  return LinkGeometry::between(state.uav.x, state.uav.y, state.uav.z, d.x, d.y);
}

double Environment::frame_time(int velocity_index) const {
  return config_.segment_length() / velocity_grid_[velocity_index];
}

double Environment::arrival_probability(int velocity_index) const {
  const double p = config_.arrival_prob;
  if (!config_.arrival_time_scaled || p <= 0.0 || p >= 1.0) return p;
  const double ratio = frame_time(velocity_index) / frame_time(config_.midpoint_velocity_index());
  return -std::expm1(ratio * std::log1p(-p));
}

int Environment::idle_drain_levels(int velocity_index) const {
  if (config_.idle_drain <= 0.0) return 0;
  return static_cast<int>(std::ceil(config_.idle_drain * frame_time(velocity_index) / config_.level_energy()));
}

double Environment::packet_success_probability() const { return packet_success_; }

double Environment::contact_window(const LinkGeometry& geom, int velocity_index) const {
  return std::min(contact_time(geom, velocity_grid_[velocity_index]), frame_time(velocity_index));
}

ModulationProblem Environment::modulation_problem(const EnvState& state, int device, int velocity_index) const {
  const LinkGeometry geom = geometry(state, device);
  ModulationProblem p;
  p.contact_time = contact_window(geom, velocity_index);
  p.bits_per_packet = config_.bits_per_packet;
  p.bandwidth = config_.bandwidth;
  p.power_gain = state.devices[device].channel.power_gain;
  p.uav_tx_power = config_.uav_tx_power;
  p.efficiency = config_.mpt(geom);
  p.ber_target = config_.ber_target;
  p.kappa1 = config_.fading.kappa1;
  p.kappa2 = config_.fading.kappa2;
  p.noise_power = config_.fading.noise_power;
  p.max_order = config_.max_order;
  return p;
}

void Environment::draw_channel(DeviceState& device, const LinkGeometry& geom, Rng& rng) const {
  switch (config_.channel_mode) {
    case ChannelMode::kIid:
      device.channel = power_gain_from_variate(geom, config_.fading, quantizer_, rng.unit_gamma(config_.fading.m));
      break;
    case ChannelMode::kAr1: {
      const double rho = config_.ar_coeff;
      const double innovation = std::sqrt((1.0 - rho * rho) / 2.0);
      device.h_re = rho * device.h_re + innovation * rng.normal();
      device.h_im = rho * device.h_im + innovation * rng.normal();
      const double variate = std::max(device.h_re * device.h_re + device.h_im * device.h_im, 1e-300);
      device.channel = power_gain_from_variate(geom, config_.fading, quantizer_, variate);
      break;
    }
    case ChannelMode::kQuantized: {
      const ChannelDraw raw =
          power_gain_from_variate(geom, config_.fading, quantizer_, rng.unit_gamma(config_.fading.m));
      device.channel.gain_bin = raw.gain_bin;
      device.channel.power_gain = bin_representative_gain(geom.distance, raw.gain_bin);
      break;
    }
  }
}

UplinkPlan Environment::plan_uplink(const EnvState& state, int device, int velocity_index) const {
  const auto& dev = state.devices[device];
  const ModulationProblem problem = modulation_problem(state, device, velocity_index);
  UplinkPlan plan;
  plan.contact_window = problem.contact_time;
  plan.phi_star = optimal_modulation(problem);

  const double level = config_.level_energy();
  double spent = 0.0;
  double airtime = 0.0;
  if (plan.phi_star) {
    const int phi = *plan.phi_star;
    const double packet_airtime = problem.airtime(phi);
    const double packet_energy =
        required_tx_power(phi, problem.power_gain, config_.fading, config_.ber_target) * packet_airtime;
    const int fit = static_cast<int>(std::floor(problem.contact_time / packet_airtime));
    const int max_packets = std::min({dev.queue, config_.packets_per_uplink, fit});
    const double available = dev.battery * level;
    for (int k = 0; k < max_packets; ++k) {
      if (available - spent < packet_energy) {
        plan.energy_failure = true;
        break;
      }
      spent += packet_energy;
      airtime += packet_airtime;
      ++plan.attempts;
    }
  }
  plan.battery_after_spend =
      spent > 0.0 ? std::max(0, static_cast<int>(std::floor(dev.battery - spent / level))) : dev.battery;

  const double harvested =
      mpt_received_power(geometry(state, device), problem.power_gain, config_.uav_tx_power, config_.mpt) *
      std::max(0.0, problem.contact_time - airtime);
  const int gained = static_cast<int>(std::floor(harvested / level));
  plan.battery_after = std::min(config_.battery_levels, plan.battery_after_spend + gained);
  return plan;
}

EnvState Environment::reset(Rng& rng) const {
  EnvState layout;
  layout.devices.resize(config_.num_devices);
  for (auto& d : layout.devices) {
    const double radius = config_.region_radius * std::sqrt(rng.uniform());
    const double angle = 2.0 * std::numbers::pi * rng.uniform();
    d.x = radius * std::cos(angle);
    d.y = radius * std::sin(angle);
  }
  return restart(layout, rng);
}

EnvState Environment::restart(const EnvState& deployment, Rng& rng) const {
  EnvState state;
  state.devices.resize(config_.num_devices);
  for (int i = 0; i < config_.num_devices; ++i) {
    auto& d = state.devices[i];
    d.x = deployment.devices.at(i).x;
    d.y = deployment.devices.at(i).y;
    d.queue = 0;
    d.battery = config_.battery_levels / 2;
  }
  state.uav.lap = 1;
  state.uav.waypoint = 0;
  state.uav.velocity_index = config_.midpoint_velocity_index();
  state.uav.velocity = velocity_grid_[state.uav.velocity_index];
  waypoint_position(0, state.uav.x, state.uav.y);
  state.uav.z = config_.altitude;

  for (int i = 0; i < config_.num_devices; ++i) {
    auto& d = state.devices[i];
    if (config_.channel_mode == ChannelMode::kAr1) {
      // Stationary start: h ~ CN(0, 1).
      d.h_re = rng.normal() / std::numbers::sqrt2;
      d.h_im = rng.normal() / std::numbers::sqrt2;
      const double variate = std::max(d.h_re * d.h_re + d.h_im * d.h_im, 1e-300);
      d.channel = power_gain_from_variate(geometry(state, i), config_.fading, quantizer_, variate);
    } else {
      draw_channel(d, geometry(state, i), rng);
    }
  }
  return state;
}

StepOutcome Environment::step(EnvState& state, Action action, Rng& rng) const {
  if (state.terminal) throw RuntimeFailure("step called on a terminal state");
  if (action.device < 0 || action.device >= config_.num_devices || action.velocity_index < 0 ||
      action.velocity_index >= config_.num_velocities) {
    throw RuntimeFailure("action out of range");
  }

  StepOutcome out;

  // (1) Fly one segment at the chosen velocity.
  auto& uav = state.uav;
  uav.velocity_index = action.velocity_index;
  uav.velocity = velocity_grid_[action.velocity_index];
  out.velocity = uav.velocity;
  out.frame_time = frame_time(action.velocity_index);
  if (++uav.waypoint == config_.num_waypoints) {
    uav.waypoint = 0;
    ++uav.lap;
  }
  waypoint_position(uav.waypoint, uav.x, uav.y);
  state.terminal = uav.lap > config_.num_laps;
  out.terminal = state.terminal;

  // (2) Channels refresh for every device.
  for (int i = 0; i < config_.num_devices; ++i) draw_channel(state.devices[i], geometry(state, i), rng);

  // (3) Uplink from the scheduled device, then (4) harvest over the rest of
  // the window. The success draws are always consumed so the stream advances
  // identically whatever is scheduled.
  auto& dev = state.devices[action.device];
  const UplinkPlan plan = plan_uplink(state, action.device, action.velocity_index);
  out.phi_star = plan.phi_star;
  out.contact_window = plan.contact_window;
  for (int k = 0; k < config_.packets_per_uplink; ++k) {
    const double u = rng.uniform();
    if (k >= plan.attempts) continue;
    if (u < packet_success_) {
      ++out.delivered;
    } else {
      ++out.failed_tx;
    }
  }
  if (plan.energy_failure) {
    ++out.failed_tx;
    ++out.energy_failures;
  }
  dev.queue -= plan.attempts + (plan.energy_failure ? 1 : 0);
  dev.battery = plan.battery_after;
  out.harvested_levels = plan.battery_after - plan.battery_after_spend;

  if (const int drain = idle_drain_levels(action.velocity_index); drain > 0) {
    for (int i = 0; i < config_.num_devices; ++i) {
      if (i != action.device) state.devices[i].battery = std::max(0, state.devices[i].battery - drain);
    }
  }

  // (5) Arrivals; a full queue drops the new packet.
  const double p_arrival = arrival_probability(action.velocity_index);
  for (auto& d : state.devices) {
    if (rng.uniform() >= p_arrival) continue;
    ++out.arrivals;
    if (d.queue == config_.queue_capacity) {
      ++out.overflow;
    } else {
      ++d.queue;
    }
  }

  out.cost = out.overflow + out.failed_tx;
  state.ledger.generated += out.arrivals;
  state.ledger.delivered += out.delivered;
  state.ledger.dropped_overflow += out.overflow;
  state.ledger.dropped_tx += out.failed_tx;
  return out;
}

std::vector<double> Environment::encode(const EnvState& state) const {
  std::vector<double> out(state_dim());
  encode_into(state, out);
  return out;
}

void Environment::encode_into(const EnvState& state, std::span<double> out) const {
  const double inv_d = 1.0 / config_.queue_capacity;
  const double inv_k = 1.0 / config_.battery_levels;
  std::size_t k = 0;
  for (const auto& d : state.devices) {
    out[k++] = d.queue * inv_d;
    out[k++] = d.battery * inv_k;
    out[k++] = std::clamp((to_db(d.channel.power_gain) - median_gain_db_) / kGainClampDb, -1.0, 1.0);
  }
  const double phase = 2.0 * std::numbers::pi * state.uav.waypoint / config_.num_waypoints;
  out[k++] = std::sin(phase);
  out[k++] = std::cos(phase);
  out[k++] = std::min(1.0, static_cast<double>(state.uav.lap) / config_.num_laps);
}

std::string snapshot_json(const EnvState& state, std::uint64_t rng_position) {
  nlohmann::json j;
  j["devices"] = nlohmann::json::array();
  for (const auto& d : state.devices) {
    j["devices"].push_back({{"queue", d.queue}, {"battery", d.battery}, {"x", d.x}, {"y", d.y}});
  }
  j["uav"] = {{"lap", state.uav.lap}, {"waypoint", state.uav.waypoint}, {"velocity", state.uav.velocity}};
  j["rng_position"] = rng_position;
  return j.dump();
}

Snapshot parse_snapshot_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  Snapshot snap;
  for (const auto& d : j.at("devices")) {
    DeviceState dev;
    dev.queue = d.at("queue").get<int>();
    dev.battery = d.at("battery").get<int>();
    dev.x = d.at("x").get<double>();
    dev.y = d.at("y").get<double>();
    snap.devices.push_back(dev);
  }
  snap.uav.lap = j.at("uav").at("lap").get<int>();
  snap.uav.waypoint = j.at("uav").at("waypoint").get<int>();
  snap.uav.velocity = j.at("uav").at("velocity").get<double>();
  snap.rng_position = j.at("rng_position").get<std::uint64_t>();
  return snap;
}

}  // namespace uavsched
