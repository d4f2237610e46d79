// Command-line front end: train, sweep, oracle, eval.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "uavsched/config.hpp"
#include "uavsched/errors.hpp"
#include "uavsched/harness.hpp"

using namespace uavsched;

namespace {

constexpr int kConfigExit = 2;
constexpr int kRuntimeExit = 3;

struct Common {
  std::string config;
  std::string policy = "drlsa";
  std::uint64_t seed = 1;
  std::string out = "out";
  std::optional<int> episodes;
  std::optional<int> steps;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c, bool with_policy = true) {
  cmd->add_option("--config", c.config, "Config file (key = value); defaults apply when omitted");
  if (with_policy) cmd->add_option("--policy", c.policy, "drlsa, rsa, lqsa or tabular-q");
  cmd->add_option("--seed", c.seed, "Run seed");
  cmd->add_option("--out", c.out, "Output directory");
  cmd->add_option("--episodes", c.episodes, "Episodes (overrides the config)");
  cmd->add_option("--steps", c.steps, "Steps per episode (overrides the config)");
  cmd->add_option("--set", c.overrides, "Extra key=value override, repeatable");
}

RunConfig resolve(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : load_config(c.config);
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set: expected key=value, got '" + kv + "'");
    set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (c.episodes) cfg.training.episodes = *c.episodes;
  if (c.steps) cfg.training.steps = *c.steps;
  cfg.validate();
  return cfg;
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void print_eval(const std::string& label, const EvalSummary& e) {
  std::printf("%s: cost %.3f +- %.3f, loss rate %.4f +- %.4f, velocity %.3f m/s\n", label.c_str(), e.mean_cost,
              e.std_cost, e.mean_loss_rate, e.std_loss_rate, e.mean_velocity);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UAV data-collection scheduling: training, sweeps and oracles"};
  app.require_subcommand(1);

  Common train;
  bool no_frames = false;
  bool train_eval = false;
  auto* train_cmd = app.add_subcommand("train", "Train or run one policy and write frame and summary CSVs");
  add_common(train_cmd, train);
  train_cmd->add_flag("--no-frames", no_frames, "Skip the per-frame CSV");
  train_cmd->add_flag("--eval", train_eval, "Evaluate the frozen policy afterwards");

  Common sweep;
  std::string variable = "num_devices";
  std::string values;
  std::string policies = "drlsa,lqsa,rsa";
  int repetitions = 1;
  int threads = 0;
  bool sweep_frames = false;
  auto* sweep_cmd = app.add_subcommand("sweep", "Train and evaluate over a parameter grid");
  add_common(sweep_cmd, sweep, false);
  sweep_cmd->add_option("--variable", variable, "num_devices, queue_capacity or discount");
  sweep_cmd->add_option("--values", values, "Comma-separated values")->required();
  sweep_cmd->add_option("--policies", policies, "Comma-separated policy names");
  sweep_cmd->add_option("--repetitions", repetitions, "Seeds per cell, starting at --seed");
  sweep_cmd->add_option("--threads", threads, "Worker threads (0: hardware concurrency)");
  sweep_cmd->add_flag("--frames", sweep_frames, "Write per-cell frame CSVs");

  Common oracle;
  int tabular_episodes = 50000;
  int tabular_steps = 40;
  auto* oracle_cmd = app.add_subcommand("oracle", "Value iteration vs Q-learning vs DQN on an enumerable instance");
  add_common(oracle_cmd, oracle, false);
  oracle_cmd->add_option("--tabular-episodes", tabular_episodes, "Q-learning episodes on the exact model");
  oracle_cmd->add_option("--tabular-steps", tabular_steps, "Q-learning steps per episode");

  Common eval;
  std::string checkpoint;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a frozen policy (epsilon = 0)");
  add_common(eval_cmd, eval);
  eval_cmd->add_option("--checkpoint", checkpoint, "Network checkpoint (drlsa) or Q-table CSV (tabular-q)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigExit;
  }

  try {
    if (*train_cmd) {
      const RunConfig cfg = resolve(train);
      RunOptions options;
      options.policy = policy_from_string(train.policy);
      options.seed = train.seed;
      options.out_dir = train.out;
      options.write_frames = !no_frames;
      const RunResult result = run_training(cfg, options);
      const auto& last = result.episodes.back();
      std::printf("%s: %zu episodes, last episode cost %.0f, mean velocity %.3f m/s\n", result.run_id.c_str(),
                  result.episodes.size(), last.total_cost, last.mean_velocity);
      if (train_eval) {
        std::ofstream frames(std::filesystem::path(train.out) / ("eval_" + result.run_id + ".csv"));
        print_eval("eval", evaluate(result, options.policy, result.config.training.eval_episodes, &frames));
      }
    } else if (*sweep_cmd) {
      const RunConfig cfg = resolve(sweep);
      SweepSpec spec;
      spec.variable = variable;
      spec.values = split(values);
      for (const auto& p : split(policies)) spec.policies.push_back(policy_from_string(p));
      spec.episodes = cfg.training.episodes;
      spec.steps = cfg.training.steps;
      spec.repetitions = repetitions;
      spec.base_seed = sweep.seed;
      spec.write_frames = sweep_frames;
      const auto cells = run_sweep(spec, cfg, sweep.out, threads);
      for (const auto& c : cells) {
        print_eval(variable + "=" + c.value + " " + to_string(c.policy) + " seed " + std::to_string(c.seed), c.eval);
      }
    } else if (*oracle_cmd) {
      const RunConfig cfg = resolve(oracle);
      OracleSettings settings;
      settings.tabular.episodes = tabular_episodes;
      settings.tabular.steps = tabular_steps;
      settings.dqn_episodes = cfg.training.episodes;
      const OracleReport r = run_oracle(cfg, oracle.seed, settings);
      std::printf("states %d, reachable %d\n", r.num_states, r.reachable);
      std::printf("value iteration: mean optimal value %.9g\n", r.optimal_value);
      std::printf("tabular-q: value %.9g, gap %.4f%%, argmin agreement %.2f%%\n", r.tabular_value,
                  100.0 * r.tabular_gap, 100.0 * r.tabular_agreement);
      std::printf("dqn: value %.9g, argmin agreement %.2f%%\n", r.dqn_value, 100.0 * r.dqn_agreement);
    } else if (*eval_cmd) {
      RunConfig cfg = resolve(eval);
      cfg.sim.seed = eval.seed;
      const Policy policy = policy_from_string(eval.policy);
      RunResult trained;
      trained.config = cfg;
      trained.run_id = eval.policy + "_s" + std::to_string(eval.seed);
      const Environment env(cfg.sim);
      trained.deployment = make_deployment(env, eval.seed);
      if (policy == Policy::kDrlsa || policy == Policy::kTabularQ) {
        if (checkpoint.empty()) throw ConfigError("--checkpoint: required for " + eval.policy);
        if (policy == Policy::kDrlsa) {
          trained.network = load_checkpoint(checkpoint, &trained.adam_step);
          if (trained.network->input_dim() != env.state_dim() || trained.network->output_dim() != env.num_actions()) {
            throw ConfigError("--checkpoint: network shape does not match the config");
          }
        } else {
          trained.table = read_qtable_csv(checkpoint, cfg.training.tabular_learning_rate, cfg.training.discount);
        }
      }
      std::filesystem::create_directories(eval.out);
      std::ofstream frames(std::filesystem::path(eval.out) / ("eval_" + trained.run_id + ".csv"));
      const int episodes = eval.episodes.value_or(cfg.training.eval_episodes);
      print_eval(trained.run_id, evaluate(trained, policy, episodes, &frames));
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigExit;
  } catch (const UnsupportedConfiguration& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigExit;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntimeExit;
  }
  return 0;
}
