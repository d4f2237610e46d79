#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>

#include "uavsched/dqn.hpp"
#include "uavsched/env.hpp"
#include "uavsched/rng.hpp"

namespace uavsched {

enum class Policy { kDrlsa, kRsa, kLqsa, kTabularQ };

std::string to_string(Policy policy);
// Accepts "drlsa", "rsa", "lqsa" and "tabular-q"; throws ConfigError otherwise.
Policy policy_from_string(const std::string& name);

// Epsilon-greedy over the online network: a uniform flat action with
// probability epsilon, otherwise the argmin (ties to the smaller index).
// Consumes one uniform draw, plus one index draw when exploring.
Action drlsa_select(std::span<const double> state, const MlpParams& online, double epsilon, int num_velocities,
                    Rng& rng);

// Uniform device at the midpoint velocity.
Action rsa_select(const EnvState& state, const SimConfig& config, Rng& rng);

// Longest queue first (ties to the smaller index) at the midpoint velocity.
Action lqsa_select(const EnvState& state, const SimConfig& config);

// Attaches the modulation order for the scheduled device on the post-move
// pose and refreshed channel. Reads geometry and channel only.
std::pair<Action, std::optional<int>> finalize_action(Action action, const EnvState& state, const Environment& env);

}  // namespace uavsched
