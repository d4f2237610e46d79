#include "uavsched/schedulers.hpp"

#include "uavsched/errors.hpp"
#include "uavsched/modulation.hpp"

namespace uavsched {

std::string to_string(Policy policy) {
  switch (policy) {
    case Policy::kDrlsa: return "drlsa";
    case Policy::kRsa: return "rsa";
    case Policy::kLqsa: return "lqsa";
    case Policy::kTabularQ: return "tabular-q";
  }
  return "unknown";
}

Policy policy_from_string(const std::string& name) {
  if (name == "drlsa") return Policy::kDrlsa;
  if (name == "rsa") return Policy::kRsa;
  if (name == "lqsa") return Policy::kLqsa;
  if (name == "tabular-q") return Policy::kTabularQ;
  throw ConfigError("policy: unknown name '" + name + "' (expected drlsa, rsa, lqsa or tabular-q)");
}

Action drlsa_select(std::span<const double> state, const MlpParams& online, double epsilon, int num_velocities,
                    Rng& rng) {
  if (online.output_dim() % num_velocities != 0) throw ConfigError("network output does not match I*N_v");
  if (rng.uniform() < epsilon) {
    const auto flat = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(online.output_dim())));
    return Action::from_flat(flat, num_velocities);
  }
  return Action::from_flat(argmin_action(forward(online, state)), num_velocities);
}

Action rsa_select(const EnvState& state, const SimConfig& config, Rng& rng) {
  const auto device = static_cast<int>(rng.uniform_index(state.devices.size()));
  return {device, config.midpoint_velocity_index()};
}

Action lqsa_select(const EnvState& state, const SimConfig& config) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(state.devices.size()); ++i) {
    if (state.devices[i].queue > state.devices[best].queue) best = i;
  }
  return {best, config.midpoint_velocity_index()};
}

std::pair<Action, std::optional<int>> finalize_action(Action action, const EnvState& state, const Environment& env) {
  const ModulationProblem problem = env.modulation_problem(state, action.device, action.velocity_index);
  return {action, optimal_modulation(problem)};
}

}  // namespace uavsched
