#include "uavsched/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "uavsched/epsilon.hpp"
#include "uavsched/errors.hpp"
#include "uavsched/exact_mdp.hpp"

namespace uavsched {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Independent streams of one run.
struct Streams {
  Rng env;
  Rng policy;
  Rng replay;
  Rng init;
  Rng eval_env;
  Rng eval_policy;
};

Streams make_streams(std::uint64_t seed) {
  const Rng root(seed);
  return {root.derive(2), root.derive(3), root.derive(4), root.derive(5), root.derive(6), root.derive(7)};
}

const char* kFrameHeader =
    "run_id,policy,seed,episode,step,cost,cumulative_cost,velocity,scheduled_device,phi_star,epsilon,loss\n";
const char* kSummaryHeader = "episode,total_cost,mean_velocity,mean_epsilon,mean_loss\n";

std::string optional_double(double v) { return std::isnan(v) ? std::string() : format_double(v); }

void write_frame(std::ostream& out, const FrameRecord& r) {
  out << csv_field(r.run_id) << ',' << csv_field(r.policy) << ',' << r.seed << ',' << r.episode << ',' << r.step
      << ',' << r.cost << ',' << r.cumulative_cost << ',' << format_double(r.velocity) << ',' << r.scheduled_device
      << ',';
  if (r.phi_star) out << *r.phi_star;
  out << ',';
  if (r.epsilon) out << format_double(*r.epsilon);
  out << ',';
  if (r.loss) out << format_double(*r.loss);
  out << '\n';
}

void write_summary(std::ostream& out, const EpisodeSummary& s) {
  out << s.episode << ',' << format_double(s.total_cost) << ',' << format_double(s.mean_velocity) << ','
      << optional_double(s.mean_epsilon) << ',' << optional_double(s.mean_loss) << '\n';
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  return out;
}

struct Accumulator {
  double cost = 0.0;
  double velocity = 0.0;
  double epsilon = 0.0;
  int epsilon_count = 0;
  double loss = 0.0;
  int loss_count = 0;
  int frames = 0;
  std::int64_t generated = 0;
  std::int64_t overflow = 0;
  std::int64_t failed_tx = 0;

  void add(const StepOutcome& out, std::optional<double> eps, std::optional<double> l) {
    cost += out.cost;
    velocity += out.velocity;
    generated += out.arrivals;
    overflow += out.overflow;
    failed_tx += out.failed_tx;
    ++frames;
    if (eps) {
      epsilon += *eps;
      ++epsilon_count;
    }
    if (l) {
      loss += *l;
      ++loss_count;
    }
  }

  EpisodeSummary finish(int episode) const {
    EpisodeSummary s;
    s.episode = episode;
    s.total_cost = cost;
    s.mean_velocity = frames ? velocity / frames : 0.0;
    s.mean_epsilon = epsilon_count ? epsilon / epsilon_count : kNaN;
    s.mean_loss = loss_count ? loss / loss_count : kNaN;
    s.generated = generated;
    s.overflow = overflow;
    s.failed_tx = failed_tx;
    return s;
  }
};

std::pair<double, double> mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {kNaN, kNaN};
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

std::vector<int> network_sizes(const RunConfig& cfg, const Environment& env) {
  std::vector<int> sizes{env.state_dim()};
  sizes.insert(sizes.end(), cfg.training.hidden_layers.begin(), cfg.training.hidden_layers.end());
  sizes.push_back(env.num_actions());
  return sizes;
}

}  // namespace

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

EnvState make_deployment(const Environment& env, std::uint64_t seed) {
  Rng layout = Rng(seed).derive(1);
  return env.reset(layout);
}

RunResult run_training(const RunConfig& config, const RunOptions& options) {
  RunResult result;
  RunConfig cfg = config;
  if (options.episodes) cfg.training.episodes = *options.episodes;
  if (options.steps) cfg.training.steps = *options.steps;
  cfg.sim.seed = options.seed;
  cfg.validate();
  const int episodes = cfg.training.episodes;
  const int steps = cfg.training.steps;
  if (steps > cfg.sim.num_laps * cfg.sim.num_waypoints) {
    throw ConfigError("steps: " + std::to_string(steps) + " exceeds num_laps * num_waypoints = " +
                      std::to_string(cfg.sim.num_laps * cfg.sim.num_waypoints));
  }
  result.config = cfg;
  const std::string policy_name = to_string(options.policy);
  result.run_id = options.run_id.empty() ? policy_name + "_s" + std::to_string(options.seed) : options.run_id;

  const Environment env(cfg.sim);
  Streams rng = make_streams(options.seed);
  result.deployment = make_deployment(env, options.seed);

  std::ofstream frames;
  std::ofstream summary;
  const bool files = !options.out_dir.empty();
  if (files) {
    std::filesystem::create_directories(options.out_dir);
    save_config(cfg, options.out_dir / ("config_" + result.run_id + ".cfg"));
    if (options.write_frames) {
      frames = open_output(options.out_dir / ("frames_" + result.run_id + ".csv"));
      frames << kFrameHeader;
    }
    summary = open_output(options.out_dir / ("summary_" + result.run_id + ".csv"));
    summary << kSummaryHeader;
  }

  const bool drl = options.policy == Policy::kDrlsa;
  const bool tabular = options.policy == Policy::kTabularQ;
  const std::int64_t total_frames = static_cast<std::int64_t>(episodes) * steps;

  // DRL-SA learner.
  std::optional<MlpParams> online;
  std::optional<MlpParams> target;
  std::optional<AdamState> adam;
  std::optional<ReplayMemory> memory;
  std::int64_t updates = 0;
  const EpsilonSchedule drl_epsilon{
      cfg.training.epsilon_start, cfg.training.epsilon_end,
      static_cast<std::int64_t>(std::ceil(cfg.training.epsilon_decay_fraction * static_cast<double>(total_frames)))};
  const TrainStepSettings train_settings{cfg.training.batch_size, cfg.training.discount, cfg.training.grad_clip,
                                         cfg.training.cost_scale};
  const std::size_t warmup =
      static_cast<std::size_t>(std::max(cfg.training.warmup, cfg.training.batch_size));
  if (drl) {
    online = MlpParams::initialized(network_sizes(cfg, env), rng.init);
    target = *online;
    adam.emplace(*online, cfg.training.learning_rate);
    memory.emplace(static_cast<std::size_t>(cfg.training.replay_capacity));
  }

  // Tabular learner on the quantized state.
  std::optional<StateIndexer> indexer;
  if (tabular) {
    indexer.emplace(cfg.sim);
    if (indexer->count() > kExactStateCap) {
      throw ConfigError("tabular-q: " + std::to_string(indexer->count()) + " quantized states exceed the cap of " +
                        std::to_string(kExactStateCap));
    }
    result.table.emplace(static_cast<int>(indexer->count()), env.num_actions(), cfg.training.tabular_learning_rate,
                         cfg.training.discount);
  }
  const EpsilonSchedule tabular_epsilon{1.0, 0.01, static_cast<std::int64_t>(std::ceil(0.8 * episodes))};

  std::vector<double> encoded(env.state_dim());
  std::vector<double> next_encoded(env.state_dim());
  std::int64_t frame = 0;
  for (int episode = 1; episode <= episodes; ++episode) {
    EnvState state = env.restart(result.deployment, rng.env);
    Accumulator acc;
    std::int64_t cumulative = 0;
    for (int step = 1; step <= steps; ++step, ++frame) {
      std::optional<double> eps;
      std::optional<double> loss;
      Action action;
      int state_id = 0;
      switch (options.policy) {
        case Policy::kDrlsa:
          eps = drl_epsilon(frame);
          env.encode_into(state, encoded);
          action = drlsa_select(encoded, *online, *eps, cfg.sim.num_velocities, rng.policy);
          break;
        case Policy::kTabularQ:
          eps = tabular_epsilon(episode - 1);
          state_id = indexer->state_id(state);
          if (rng.policy.uniform() < *eps) {
            action = Action::from_flat(static_cast<int>(rng.policy.uniform_index(env.num_actions())),
                                       cfg.sim.num_velocities);
          } else {
            action = Action::from_flat(result.table->greedy(state_id), cfg.sim.num_velocities);
          }
          break;
        case Policy::kRsa:
          action = rsa_select(state, cfg.sim, rng.policy);
          break;
        case Policy::kLqsa:
          action = lqsa_select(state, cfg.sim);
          break;
      }

      const StepOutcome out = env.step(state, action, rng.env);

      if (drl) {
        env.encode_into(state, next_encoded);
        memory->push({encoded, action.flat(cfg.sim.num_velocities), static_cast<double>(out.cost), next_encoded,
                      out.terminal});
        if (memory->size() >= warmup) {
          loss = train_step(*online, *target, *memory, *adam, train_settings, rng.replay);
          sync_target(*online, *target, updates, cfg.training.target_period);
        }
      } else if (tabular) {
        q_update(*result.table, state_id, action.flat(cfg.sim.num_velocities), out.cost, indexer->state_id(state),
                 out.terminal);
      }

      cumulative += out.cost;
      acc.add(out, eps, loss);
      if (frames.is_open()) {
        FrameRecord r;
        r.run_id = result.run_id;
        r.policy = policy_name;
        r.seed = options.seed;
        r.episode = episode;
        r.step = step;
        r.cost = out.cost;
        r.cumulative_cost = cumulative;
        r.velocity = out.velocity;
        r.scheduled_device = action.device;
        r.phi_star = out.phi_star;
        r.epsilon = eps;
        r.loss = loss;
        write_frame(frames, r);
      }
    }
    result.episodes.push_back(acc.finish(episode));
    if (summary.is_open()) write_summary(summary, result.episodes.back());
  }

  if (drl) {
    result.network = std::move(*online);
    result.adam_step = adam->step;
    if (files) save_checkpoint(options.out_dir / ("checkpoint_" + result.run_id + ".json"), *result.network,
                               result.adam_step);
  }
  if (tabular && files) {
    auto out = open_output(options.out_dir / ("qtable_" + result.run_id + ".csv"));
    result.table->write_csv(out);
  }
  return result;
}

EvalSummary evaluate(const RunResult& trained, Policy policy, int episodes, std::ostream* frames) {
  const RunConfig& cfg = trained.config;
  const Environment env(cfg.sim);
  Streams rng = make_streams(cfg.sim.seed);
  if (policy == Policy::kDrlsa && !trained.network) throw RuntimeFailure("evaluate: drlsa needs a trained network");
  if (policy == Policy::kTabularQ && !trained.table) throw RuntimeFailure("evaluate: tabular-q needs a Q-table");
  std::optional<StateIndexer> indexer;
  if (policy == Policy::kTabularQ) indexer.emplace(cfg.sim);

  EvalSummary summary;
  std::vector<double> costs;
  std::vector<double> rates;
  std::vector<double> velocities;
  std::vector<double> encoded(env.state_dim());
  const std::string policy_name = to_string(policy);
  if (frames) *frames << kFrameHeader;
  for (int episode = 1; episode <= episodes; ++episode) {
    EnvState state = env.restart(trained.deployment, rng.eval_env);
    Accumulator acc;
    std::int64_t cumulative = 0;
    for (int step = 1; step <= cfg.training.steps; ++step) {
      Action action;
      switch (policy) {
        case Policy::kDrlsa:
          env.encode_into(state, encoded);
          action = Action::from_flat(argmin_action(forward(*trained.network, encoded)), cfg.sim.num_velocities);
          break;
        case Policy::kTabularQ:
          action = Action::from_flat(trained.table->greedy(indexer->state_id(state)), cfg.sim.num_velocities);
          break;
        case Policy::kRsa:
          action = rsa_select(state, cfg.sim, rng.eval_policy);
          break;
        case Policy::kLqsa:
          action = lqsa_select(state, cfg.sim);
          break;
      }
      const StepOutcome out = env.step(state, action, rng.eval_env);
      cumulative += out.cost;
      acc.add(out, std::nullopt, std::nullopt);
      if (frames) {
        FrameRecord r;
        r.run_id = trained.run_id + "_eval";
        r.policy = policy_name;
        r.seed = cfg.sim.seed;
        r.episode = episode;
        r.step = step;
        r.cost = out.cost;
        r.cumulative_cost = cumulative;
        r.velocity = out.velocity;
        r.scheduled_device = action.device;
        r.phi_star = out.phi_star;
        if (policy == Policy::kDrlsa || policy == Policy::kTabularQ) r.epsilon = 0.0;
        write_frame(*frames, r);
      }
    }
    const EpisodeSummary s = acc.finish(episode);
    summary.episodes.push_back(s);
    costs.push_back(s.total_cost);
    rates.push_back(s.generated > 0 ? s.total_cost / static_cast<double>(s.generated) : 0.0);
    velocities.push_back(s.mean_velocity);
  }
  std::tie(summary.mean_cost, summary.std_cost) = mean_std(costs);
  std::tie(summary.mean_loss_rate, summary.std_loss_rate) = mean_std(rates);
  std::tie(summary.mean_velocity, summary.std_velocity) = mean_std(velocities);
  return summary;
}

void SweepSpec::validate() const {
  if (variable != "num_devices" && variable != "queue_capacity" && variable != "discount") {
    throw ConfigError("sweep variable: expected num_devices, queue_capacity or discount, got '" + variable + "'");
  }
  if (values.empty()) throw ConfigError("sweep values: must not be empty");
  if (policies.empty()) throw ConfigError("sweep policies: must not be empty");
  if (repetitions < 1) throw ConfigError("repetitions: must be at least 1");
  if (episodes < 1 || steps < 1) throw ConfigError("episodes and steps: must be positive");
}

std::optional<int> episodes_to_stabilization(const std::vector<double>& totals, int window, double tol) {
  const int n = static_cast<int>(totals.size());
  if (window < 1 || n < window) return std::nullopt;
  std::vector<double> avg(n, kNaN);
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    sum += totals[k];
    if (k >= window) sum -= totals[k - window];
    if (k >= window - 1) avg[k] = sum / window;
  }
  const double final_avg = avg[n - 1];
  const double band = tol * std::abs(final_avg);
  int first = n - 1;
  for (int k = n - 1; k >= window - 1; --k) {
    if (std::abs(avg[k] - final_avg) > band) break;
    first = k;
  }
  return first + 1;
}

std::vector<SweepCell> run_sweep(const SweepSpec& spec, const RunConfig& base, const std::filesystem::path& out_dir,
                                 int threads) {
  spec.validate();
  std::vector<SweepCell> cells;
  for (const auto& value : spec.values) {
    for (Policy policy : spec.policies) {
      for (int rep = 0; rep < spec.repetitions; ++rep) {
        SweepCell cell;
        cell.value = value;
        cell.policy = policy;
        cell.seed = spec.base_seed + static_cast<std::uint64_t>(rep);
        cells.push_back(cell);
      }
    }
  }
  // Surface config errors before any work starts.
  for (const auto& value : spec.values) {
    RunConfig cfg = base;
    set_config_value(cfg, spec.variable, value);
    cfg.validate();
  }

  const std::filesystem::path cell_dir = out_dir.empty() ? out_dir : out_dir / "cells";
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        SweepCell& cell = cells[i];
        RunConfig cfg = base;
        set_config_value(cfg, spec.variable, cell.value);
        RunOptions options;
        options.policy = cell.policy;
        options.seed = cell.seed;
        options.episodes = spec.episodes;
        options.steps = spec.steps;
        options.out_dir = cell_dir;
        options.write_frames = spec.write_frames;
        options.run_id = spec.variable + "-" + cell.value + "_" + to_string(cell.policy) + "_s" +
                         std::to_string(cell.seed);
        const RunResult trained = run_training(cfg, options);
        for (const auto& s : trained.episodes) cell.training_costs.push_back(s.total_cost);
        cell.stabilization_episode = episodes_to_stabilization(cell.training_costs);
        cell.eval = evaluate(trained, cell.policy, trained.config.training.eval_episodes);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int n_threads =
      std::max(1, std::min<int>(threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency()),
                                static_cast<int>(cells.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    auto rows = open_output(out_dir / ("sweep_" + spec.variable + ".csv"));
    rows << "variable,value,policy,seed,eval_episodes,cost_mean,cost_std,loss_rate_mean,loss_rate_std,"
            "velocity_mean,velocity_std,stabilization_episode\n";
    for (const auto& c : cells) {
      rows << csv_field(spec.variable) << ',' << csv_field(c.value) << ',' << to_string(c.policy) << ',' << c.seed
           << ',' << c.eval.episodes.size() << ',' << format_double(c.eval.mean_cost) << ','
           << format_double(c.eval.std_cost) << ',' << format_double(c.eval.mean_loss_rate) << ','
           << format_double(c.eval.std_loss_rate) << ',' << format_double(c.eval.mean_velocity) << ','
           << format_double(c.eval.std_velocity) << ',';
      if (c.stabilization_episode) rows << *c.stabilization_episode;
      rows << '\n';
    }

    // Across seeds: the std of per-seed means is the training variance; the
    // mean of per-seed evaluation stds is the evaluation variance.
    auto seeds = open_output(out_dir / ("sweep_" + spec.variable + "_seeds.csv"));
    seeds << "variable,value,policy,repetitions,cost_mean,cost_std_training,cost_std_evaluation,loss_rate_mean,"
             "loss_rate_std_training,loss_rate_std_evaluation,velocity_mean,velocity_std_training,"
             "velocity_std_evaluation,stabilization_episode_mean\n";
    for (const auto& value : spec.values) {
      for (Policy policy : spec.policies) {
        std::vector<double> cost, cost_sd, rate, rate_sd, vel, vel_sd, stab;
        for (const auto& c : cells) {
          if (c.value != value || c.policy != policy) continue;
          cost.push_back(c.eval.mean_cost);
          cost_sd.push_back(c.eval.std_cost);
          rate.push_back(c.eval.mean_loss_rate);
          rate_sd.push_back(c.eval.std_loss_rate);
          vel.push_back(c.eval.mean_velocity);
          vel_sd.push_back(c.eval.std_velocity);
          if (c.stabilization_episode) stab.push_back(*c.stabilization_episode);
        }
        const auto [cm, cs] = mean_std(cost);
        const auto [rm, rs] = mean_std(rate);
        const auto [vm, vs] = mean_std(vel);
        seeds << csv_field(spec.variable) << ',' << csv_field(value) << ',' << to_string(policy) << ','
              << cost.size() << ',' << format_double(cm) << ',' << format_double(cs) << ','
              << format_double(mean_std(cost_sd).first) << ',' << format_double(rm) << ',' << format_double(rs)
              << ',' << format_double(mean_std(rate_sd).first) << ',' << format_double(vm) << ','
              << format_double(vs) << ',' << format_double(mean_std(vel_sd).first) << ','
              << optional_double(mean_std(stab).first) << '\n';
      }
    }
  }
  return cells;
}

OracleReport run_oracle(const RunConfig& config, std::uint64_t seed, const OracleSettings& settings) {
  RunConfig cfg = config;
  cfg.sim.channel_mode = ChannelMode::kQuantized;
  cfg.sim.seed = seed;
  cfg.validate();
  const Environment env(cfg.sim);
  const EnvState deployment = make_deployment(env, seed);
  const TransitionTable mdp = enumerate_exact_mdp(env, deployment);
  const std::vector<double> start = start_distribution(env, deployment);
  const std::vector<bool> reachable = reachable_states(mdp, start);
  const double discount = cfg.training.discount;
  const ValueIterationResult vi = value_iteration(mdp, discount, 1e-12);
  const std::vector<double> q_star = lookahead_q(mdp, vi.values, discount);
  const int num_actions = mdp.num_actions();

  OracleReport report;
  report.num_states = mdp.num_states();
  auto reachable_mean = [&](const std::vector<double>& v) {
    double sum = 0.0;
    for (int s = 0; s < mdp.num_states(); ++s) {
      if (reachable[s]) sum += v[s];
    }
    return sum / report.reachable;
  };
  for (bool r : reachable) report.reachable += r ? 1 : 0;
  report.optimal_value = reachable_mean(vi.values);

  // An action agrees with the optimum when it attains the optimal Q value.
  auto optimal_action = [&](int s, int a) {
    const double best = q_star[static_cast<std::size_t>(s) * num_actions + vi.policy[s]];
    const double q = q_star[static_cast<std::size_t>(s) * num_actions + a];
    return q - best <= 1e-9 * (1.0 + std::abs(best));
  };
  auto relative_gap = [&](double value) {
    return (value - report.optimal_value) / std::max(std::abs(report.optimal_value), 1e-12);
  };

  TabularSettings tab = settings.tabular;
  tab.discount = discount;
  tab.learning_rate = cfg.training.tabular_learning_rate;
  Rng tab_rng = Rng(seed).derive(9);
  const QTable table = train_tabular(mdp, start, tab, tab_rng);
  const std::vector<int> tab_policy = table.greedy_policy();
  report.tabular_value = reachable_mean(evaluate_policy(mdp, tab_policy, discount));
  report.tabular_gap = relative_gap(report.tabular_value);
  int agree = 0;
  for (int s = 0; s < mdp.num_states(); ++s) agree += reachable[s] && optimal_action(s, tab_policy[s]) ? 1 : 0;
  report.tabular_agreement = static_cast<double>(agree) / report.reachable;

  if (settings.run_dqn) {
    RunOptions options;
    options.policy = Policy::kDrlsa;
    options.seed = seed;
    options.episodes = settings.dqn_episodes;
    const RunResult trained = run_training(cfg, options);
    const StateIndexer indexer(cfg.sim);
    std::vector<int> dqn_policy = vi.policy;
    agree = 0;
    for (int s = 0; s < mdp.num_states(); ++s) {
      if (!reachable[s]) continue;
      const EnvState state = indexer.decode(s, env, deployment);
      dqn_policy[s] = argmin_action(forward(*trained.network, env.encode(state)));
      agree += optimal_action(s, dqn_policy[s]) ? 1 : 0;
    }
    report.dqn_agreement = static_cast<double>(agree) / report.reachable;
    report.dqn_value = reachable_mean(evaluate_policy(mdp, dqn_policy, discount));
  }
  return report;
}

QTable read_qtable_csv(const std::filesystem::path& path, double learning_rate, double discount) {
  std::ifstream in(path);
  if (!in) throw RuntimeFailure("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<std::tuple<int, int, double>> entries;
  int max_s = -1;
  int max_a = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int s = 0;
    int a = 0;
    double v = 0.0;
    if (std::sscanf(line.c_str(), "%d,%d,%lf", &s, &a, &v) != 3) throw RuntimeFailure("qtable: malformed row");
    entries.emplace_back(s, a, v);
    max_s = std::max(max_s, s);
    max_a = std::max(max_a, a);
  }
  if (entries.empty()) throw RuntimeFailure("qtable: no rows");
  QTable table(max_s + 1, max_a + 1, learning_rate, discount);
  for (const auto& [s, a, v] : entries) table.at(s, a) = v;
  return table;
}

}  // namespace uavsched
