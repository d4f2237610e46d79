#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "uavsched/config.hpp"
#include "uavsched/dqn.hpp"
#include "uavsched/env.hpp"
#include "uavsched/schedulers.hpp"
#include "uavsched/tabular.hpp"

namespace uavsched {

// Per-frame record; loss and epsilon are absent for non-learning policies.
struct FrameRecord {
  std::string run_id;
  std::string policy;
  std::uint64_t seed = 0;
  int episode = 0;  // 1-based
  int step = 0;     // 1-based within the episode
  int cost = 0;
  std::int64_t cumulative_cost = 0;  // within the episode
  double velocity = 0.0;
  int scheduled_device = 0;
  std::optional<int> phi_star;
  std::optional<double> epsilon;
  std::optional<double> loss;
};

struct EpisodeSummary {
  int episode = 0;
  double total_cost = 0.0;
  double mean_velocity = 0.0;
  double mean_epsilon = 0.0;  // NaN when the policy does not explore
  double mean_loss = 0.0;     // NaN when no training step ran
  std::int64_t generated = 0;
  std::int64_t overflow = 0;
  std::int64_t failed_tx = 0;
};

struct RunOptions {
  Policy policy = Policy::kRsa;
  std::uint64_t seed = 1;
  std::optional<int> episodes;  // overrides the config
  std::optional<int> steps;
  std::filesystem::path out_dir;  // empty: nothing is written
  std::string run_id;             // empty: "<policy>_s<seed>"
  bool write_frames = true;
};

struct RunResult {
  std::string run_id;
  RunConfig config;  // resolved, with overrides applied
  std::vector<EpisodeSummary> episodes;
  EnvState deployment;
  std::optional<MlpParams> network;  // drlsa
  std::optional<QTable> table;       // tabular-q
  std::int64_t adam_step = 0;
};

// Device layout of a run: drawn once per seed and kept for every episode.
EnvState make_deployment(const Environment& env, std::uint64_t seed);

// Trains (or just runs, for the baselines) episodes x steps frames on one
// deployment. With an output directory, writes frames_<id>.csv,
// summary_<id>.csv, config_<id>.cfg and, for learning policies, the network
// checkpoint or Q-table. Reproducible from (config, seed).
RunResult run_training(const RunConfig& config, const RunOptions& options);

struct EvalSummary {
  std::vector<EpisodeSummary> episodes;
  double mean_cost = 0.0;
  double std_cost = 0.0;
  double mean_loss_rate = 0.0;  // cost / generated
  double std_loss_rate = 0.0;
  double mean_velocity = 0.0;
  double std_velocity = 0.0;
};

// Frozen-policy evaluation (epsilon = 0) on the trained run's deployment,
// with an evaluation stream independent of training.
EvalSummary evaluate(const RunResult& trained, Policy policy, int episodes, std::ostream* frames = nullptr);

struct SweepSpec {
  std::string variable;              // num_devices, queue_capacity or discount
  std::vector<std::string> values;
  std::vector<Policy> policies;
  int episodes = 200;
  int steps = 300;
  int repetitions = 1;
  std::uint64_t base_seed = 1;
  bool write_frames = false;  // per-cell frame CSVs

  void validate() const;
};

struct SweepCell {
  std::string value;
  Policy policy = Policy::kRsa;
  std::uint64_t seed = 0;
  EvalSummary eval;
  std::vector<double> training_costs;  // per training episode
  std::optional<int> stabilization_episode;
};

// Every value x policy x seed cell, trained then evaluated, in parallel over
// cells. With an output directory, writes sweep_<variable>.csv (one row per
// cell, evaluation-episode mean and std), sweep_<variable>_seeds.csv (seed
// means with the across-seed std), and each cell's summary CSV.
std::vector<SweepCell> run_sweep(const SweepSpec& spec, const RunConfig& base, const std::filesystem::path& out_dir,
                                 int threads = 0);

// First 1-based episode from which the window-episode trailing average stays
// within tol (relative) of the last window's average. nullopt if fewer than
// window episodes.
std::optional<int> episodes_to_stabilization(const std::vector<double>& totals, int window = 20, double tol = 0.1);

struct OracleReport {
  int num_states = 0;
  int reachable = 0;
  double optimal_value = 0.0;  // mean over reachable states
  double tabular_value = 0.0;  // greedy policy of the learned table, exact evaluation
  double tabular_gap = 0.0;    // relative
  double tabular_agreement = 0.0;
  double dqn_agreement = 0.0;  // fraction of reachable states with the optimal argmin
  double dqn_value = 0.0;
};

struct OracleSettings {
  TabularSettings tabular;
  int dqn_episodes = 300;
  bool run_dqn = true;
};

// Value iteration vs tabular Q-learning vs DQN on an enumerable instance.
OracleReport run_oracle(const RunConfig& config, std::uint64_t seed, const OracleSettings& settings);

// RFC-4180 field quoting.
std::string csv_field(const std::string& text);
std::string format_double(double value);

QTable read_qtable_csv(const std::filesystem::path& path, double learning_rate, double discount);

}  // namespace uavsched
