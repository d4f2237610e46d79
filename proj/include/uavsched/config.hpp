#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "uavsched/core_model.hpp"

namespace uavsched {

enum class ChannelMode {
  kIid,        // fresh fading draw every frame
  kAr1,        // first-order autoregressive complex gain (Rayleigh only)
  kQuantized,  // gain replaced by its bin's conditional mean; matches the exact MDP
};

std::string to_string(ChannelMode mode);
ChannelMode channel_mode_from_string(const std::string& text);

// Physical, MDP and scenario constants.
struct SimConfig {
  int num_devices = 50;          // I
  int num_laps = 10;             // Z
  int battery_levels = 50;       // K
  double battery_capacity = 0.1; // E (J)
  int queue_capacity = 20;       // D (packets)
  int max_order = 8;             // Phi
  double v_min = 5.0;            // m/s
  double v_max = 20.0;
  int num_velocities = 5;        // N_v
  int num_waypoints = 100;       // V
  double trajectory_radius = 500.0;
  double altitude = 100.0;
  double region_radius = 600.0;
  double bits_per_packet = 1024.0;  // 128-byte packets
  double bandwidth = 1e6;           // W (Hz)
  double ber_target = 5e-4;         // 0.05 %
  double uav_tx_power = 0.1;        // 100 mW
  double arrival_prob = 0.3;        // per device per reference-length frame
  bool arrival_time_scaled = true;  // scale arrivals with frame duration
  int packets_per_uplink = 1;
  double idle_drain = 0.0;          // W drawn by unscheduled devices
  FadingParams fading{};
  MptEfficiency mpt{};
  int num_gain_bins = 4;            // H
  std::vector<double> gain_thresholds_db;  // explicit override; empty = percentile rule
  ChannelMode channel_mode = ChannelMode::kIid;
  double ar_coeff = 0.9;
  std::uint64_t seed = 1;

  void validate() const;

  std::vector<double> velocity_grid() const;
  // Velocity index used by the non-learning baselines.
  int midpoint_velocity_index() const { return (num_velocities - 1) / 2; }
  int num_actions() const { return num_devices * num_velocities; }
  double level_energy() const { return battery_capacity / battery_levels; }
  double segment_length() const;

  bool operator==(const SimConfig&) const = default;
};

// Learning and experiment hyperparameters.
struct TrainingConfig {
  int episodes = 500;            // M
  int steps = 1000;              // t_learning
  double discount = 0.99;        // delta
  double learning_rate = 1e-4;
  int replay_capacity = 5000;
  int batch_size = 32;
  int target_period = 200;       // U
  int warmup = 500;
  std::vector<int> hidden_layers{256, 128, 64};
  double grad_clip = 10.0;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_decay_fraction = 0.6;
  double cost_scale = 1.0;       // costs are divided by this before entering the loss
  int eval_episodes = 5;
  double tabular_learning_rate = 0.1;

  void validate() const;

  bool operator==(const TrainingConfig&) const = default;
};

struct RunConfig {
  SimConfig sim;
  TrainingConfig training;

  void validate() const {
    sim.validate();
    training.validate();
  }

  bool operator==(const RunConfig&) const = default;
};

// Parses flat "key = value" text with '#' comments. Unset keys keep their
// defaults; unknown keys and invariant violations raise ConfigError naming the key.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

// Applies one key=value override (used for CLI and sweep variables).
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);
std::string get_config_value(const RunConfig& config, const std::string& key);

// Every key with its fully resolved value, round-trippable through parse_config.
std::string format_config(const RunConfig& config);
void save_config(const RunConfig& config, const std::filesystem::path& path);

}  // namespace uavsched
