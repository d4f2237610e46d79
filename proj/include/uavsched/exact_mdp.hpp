#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "uavsched/env.hpp"

// Exact transition model of small instances. The state is the quantized tuple
// (queue, battery, gain bin) per device plus the waypoint; the lap counter is
// dropped so the model is a continuing, discounted MDP.
namespace uavsched {

inline constexpr std::size_t kExactStateCap = 50'000;

struct Transition {
  int next_state = 0;
  double probability = 0.0;
  double expected_cost = 0.0;  // E[cost | state, action, next_state]
};

class TransitionTable {
 public:
  TransitionTable() = default;
  TransitionTable(int num_states, int num_actions);

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }

  // Transitions of one (state, action) row; probabilities sum to 1.
  std::span<const Transition> row(int state, int action) const;
  // Sum over the row of probability * expected_cost.
  double expected_cost(int state, int action) const { return row_cost_[index(state, action)]; }

  // Rows must be appended in (state, action) order.
  void append_row(std::vector<Transition> transitions);
  bool complete() const { return static_cast<int>(row_cost_.size()) == num_states_ * num_actions_; }

 private:
  std::size_t index(int state, int action) const {
    return static_cast<std::size_t>(state) * num_actions_ + action;
  }

  int num_states_ = 0;
  int num_actions_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<Transition> transitions_;
  std::vector<double> row_cost_;
};

// Mixed-radix numbering of quantized states.
class StateIndexer {
 public:
  explicit StateIndexer(const SimConfig& config);

  // Number of quantized states (saturates at 1e18).
  std::uint64_t count() const { return count_; }
  int state_id(const EnvState& state) const;

  struct DeviceTuple {
    int queue = 0;
    int battery = 0;
    int gain_bin = 0;
  };
  int compose(int waypoint, std::span<const DeviceTuple> devices) const;
  int waypoint(int state_id) const { return state_id % num_waypoints_; }
  std::vector<DeviceTuple> devices(int state_id) const;

  // Builds a representative EnvState for a state id: deployment positions,
  // UAV at the waypoint on lap 1, each channel set to its bin's conditional mean.
  EnvState decode(int state_id, const Environment& env, const EnvState& deployment) const;

 private:
  int num_devices_;
  int num_waypoints_;
  int queue_radix_;
  int battery_radix_;
  int bin_radix_;
  int device_radix_;
  std::uint64_t count_ = 0;
};

// Enumerates every (state, action) row. The channel of each device is an i.i.d.
// H-bin chain whose bin probabilities follow from the fading distribution at
// the device's distance; gains within a bin take the bin's conditional mean,
// which is what Environment::step does in quantized channel mode. Throws
// ConfigError (with the state count) above the cap or in ar1 channel mode.
TransitionTable enumerate_exact_mdp(const Environment& env, const EnvState& deployment,
                                    std::size_t cap = kExactStateCap);

// Probability of each quantized start state under Environment::restart.
std::vector<double> start_distribution(const Environment& env, const EnvState& deployment);

// States reachable from the start distribution under some action sequence.
std::vector<bool> reachable_states(const TransitionTable& table, const std::vector<double>& start);

}  // namespace uavsched
