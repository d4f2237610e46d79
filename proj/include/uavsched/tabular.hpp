#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "uavsched/exact_mdp.hpp"
#include "uavsched/rng.hpp"

namespace uavsched {

// Dense table of expected discounted costs, zero-initialized.
class QTable {
 public:
  QTable(int num_states, int num_actions, double learning_rate, double discount);

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  double learning_rate() const { return learning_rate_; }
  double discount() const { return discount_; }

  double& at(int state, int action) { return values_[index(state, action)]; }
  double at(int state, int action) const { return values_[index(state, action)]; }
  double min_value(int state) const;
  // Argmin action, ties to the smallest id.
  int greedy(int state) const;
  std::vector<int> greedy_policy() const;

  // CSV rows (state_id, action_id, value).
  void write_csv(std::ostream& out) const;

  bool operator==(const QTable&) const = default;

 private:
  std::size_t index(int state, int action) const {
    return static_cast<std::size_t>(state) * num_actions_ + action;
  }

  int num_states_;
  int num_actions_;
  double learning_rate_;
  double discount_;
  std::vector<double> values_;
};

// Q(s,a) <- (1-lr) Q(s,a) + lr (cost + discount * min Q(s',.)); terminal drops
// the bootstrap term. Returns the new entry.
double q_update(QTable& table, int state, int action, double cost, int next_state, bool terminal);

struct ValueIterationResult {
  std::vector<double> values;
  std::vector<int> policy;  // argmin, ties to the smallest action id
  int sweeps = 0;
};

// Gauss-Jacobi Bellman sweeps until the largest change drops below tol.
// discount = 1 is accepted only if some state is absorbing at zero cost.
ValueIterationResult value_iteration(const TransitionTable& mdp, double discount, double tol = 1e-12,
                                     int max_sweeps = 1'000'000);

// One-step lookahead Q(s,a) = c(s,a) + discount * E[v(s')].
std::vector<double> lookahead_q(const TransitionTable& mdp, const std::vector<double>& values, double discount);

// Exact value of a deterministic policy by solving (I - discount P) v = c.
std::vector<double> evaluate_policy(const TransitionTable& mdp, const std::vector<int>& policy, double discount);

struct TabularSettings {
  int episodes = 2000;
  int steps = 200;
  double learning_rate = 0.1;
  double discount = 0.9;
  double epsilon_start = 1.0;
  double epsilon_end = 0.01;
  double decay_fraction = 0.8;  // of episodes
  bool exploring_starts = true; // episode starts uniform over states instead of the start distribution
};

// Q-learning on transitions sampled from the enumerated model. action_counts,
// when given, receives how often each behaviour action was taken.
QTable train_tabular(const TransitionTable& mdp, const std::vector<double>& start, const TabularSettings& settings,
                     Rng& rng, std::vector<std::int64_t>* action_counts = nullptr);

// Samples a successor from a row.
const Transition& sample_transition(const TransitionTable& mdp, int state, int action, Rng& rng);

}  // namespace uavsched
