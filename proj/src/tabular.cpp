#include "uavsched/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "uavsched/epsilon.hpp"
#include "uavsched/errors.hpp"

namespace uavsched {

QTable::QTable(int num_states, int num_actions, double learning_rate, double discount)
    : num_states_(num_states),
      num_actions_(num_actions),
      learning_rate_(learning_rate),
      discount_(discount),
      values_(static_cast<std::size_t>(num_states) * num_actions, 0.0) {
  if (num_states <= 0 || num_actions <= 0) throw ConfigError("QTable: empty state or action set");
  if (!(learning_rate >= 0.0 && learning_rate <= 1.0)) throw ConfigError("learning_rate: must lie in [0, 1]");
  if (!(discount >= 0.0 && discount <= 1.0)) throw ConfigError("discount: must lie in [0, 1]");
}

double QTable::min_value(int state) const { return at(state, greedy(state)); }

int QTable::greedy(int state) const {
  int best = 0;
  for (int a = 1; a < num_actions_; ++a) {
    if (at(state, a) < at(state, best)) best = a;
  }
  return best;
}

std::vector<int> QTable::greedy_policy() const {
  std::vector<int> policy(num_states_);
  for (int s = 0; s < num_states_; ++s) policy[s] = greedy(s);
  return policy;
}

void QTable::write_csv(std::ostream& out) const {
  out << "state_id,action_id,value\n";
  char buf[64];
  for (int s = 0; s < num_states_; ++s) {
    for (int a = 0; a < num_actions_; ++a) {
      std::snprintf(buf, sizeof buf, "%.17g", at(s, a));
      out << s << ',' << a << ',' << buf << '\n';
    }
  }
}

double q_update(QTable& table, int state, int action, double cost, int next_state, bool terminal) {
  const double target = terminal ? cost : cost + table.discount() * table.min_value(next_state);
  double& q = table.at(state, action);
  q = (1.0 - table.learning_rate()) * q + table.learning_rate() * target;
  return q;
}

namespace {

bool has_absorbing_zero_cost_state(const TransitionTable& mdp) {
  for (int s = 0; s < mdp.num_states(); ++s) {
    bool absorbing = true;
    for (int a = 0; a < mdp.num_actions() && absorbing; ++a) {
      const auto row = mdp.row(s, a);
      absorbing = mdp.expected_cost(s, a) == 0.0 && row.size() == 1 && row[0].next_state == s;
    }
    if (absorbing) return true;
  }
  return false;
}

double row_value(const TransitionTable& mdp, const std::vector<double>& values, int s, int a, double discount) {
  double next = 0.0;
  for (const auto& t : mdp.row(s, a)) next += t.probability * values[t.next_state];
  return mdp.expected_cost(s, a) + discount * next;
}

}  // namespace

std::vector<double> lookahead_q(const TransitionTable& mdp, const std::vector<double>& values, double discount) {
  std::vector<double> q(static_cast<std::size_t>(mdp.num_states()) * mdp.num_actions());
  for (int s = 0; s < mdp.num_states(); ++s) {
    for (int a = 0; a < mdp.num_actions(); ++a) {
      q[static_cast<std::size_t>(s) * mdp.num_actions() + a] = row_value(mdp, values, s, a, discount);
    }
  }
  return q;
}

ValueIterationResult value_iteration(const TransitionTable& mdp, double discount, double tol, int max_sweeps) {
  if (!(discount >= 0.0 && discount <= 1.0)) throw ConfigError("discount: must lie in [0, 1)");
  if (!(tol > 0.0)) throw ConfigError("tol: must be positive");
  if (discount >= 1.0 && !has_absorbing_zero_cost_state(mdp)) {
    throw ConfigError("discount: 1 diverges without a terminal (absorbing, zero-cost) state");
  }
  ValueIterationResult result;
  result.values.assign(mdp.num_states(), 0.0);
  std::vector<double> next(mdp.num_states());
  for (result.sweeps = 1; result.sweeps <= max_sweeps; ++result.sweeps) {
    double change = 0.0;
    for (int s = 0; s < mdp.num_states(); ++s) {
      double best = std::numeric_limits<double>::infinity();
      for (int a = 0; a < mdp.num_actions(); ++a) best = std::min(best, row_value(mdp, result.values, s, a, discount));
      next[s] = best;
      change = std::max(change, std::abs(best - result.values[s]));
    }
    result.values.swap(next);
    if (change < tol) break;
  }
  result.policy.assign(mdp.num_states(), 0);
  for (int s = 0; s < mdp.num_states(); ++s) {
    double best = row_value(mdp, result.values, s, 0, discount);
    for (int a = 1; a < mdp.num_actions(); ++a) {
      const double q = row_value(mdp, result.values, s, a, discount);
      if (q < best) {
        best = q;
        result.policy[s] = a;
      }
    }
  }
  return result;
}

std::vector<double> evaluate_policy(const TransitionTable& mdp, const std::vector<int>& policy, double discount) {
  const int n = mdp.num_states();
  if (static_cast<int>(policy.size()) != n) throw ConfigError("policy: one action per state required");
  std::vector<Eigen::Triplet<double>> entries;
  Eigen::VectorXd cost(n);
  for (int s = 0; s < n; ++s) {
    entries.emplace_back(s, s, 1.0);
    for (const auto& t : mdp.row(s, policy[s])) entries.emplace_back(s, t.next_state, -discount * t.probability);
    cost[s] = mdp.expected_cost(s, policy[s]);
  }
  Eigen::SparseMatrix<double> system(n, n);
  system.setFromTriplets(entries.begin(), entries.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(system);
  if (lu.info() != Eigen::Success) throw RuntimeFailure("policy evaluation: singular system");
  const Eigen::VectorXd v = lu.solve(cost);
  return {v.data(), v.data() + n};
}

const Transition& sample_transition(const TransitionTable& mdp, int state, int action, Rng& rng) {
  const auto row = mdp.row(state, action);
  double u = rng.uniform();
  for (const auto& t : row) {
    if (u < t.probability) return t;
    u -= t.probability;
  }
  return row.back();
}

QTable train_tabular(const TransitionTable& mdp, const std::vector<double>& start, const TabularSettings& settings,
                     Rng& rng, std::vector<std::int64_t>* action_counts) {
  if (action_counts) action_counts->assign(mdp.num_actions(), 0);
  QTable table(mdp.num_states(), mdp.num_actions(), settings.learning_rate, settings.discount);
  const EpsilonSchedule epsilon{settings.epsilon_start, settings.epsilon_end,
                                static_cast<std::int64_t>(std::ceil(settings.decay_fraction * settings.episodes))};
  std::vector<double> start_cdf(start.size());
  double total = 0.0;
  for (std::size_t s = 0; s < start.size(); ++s) start_cdf[s] = total += start[s];

  for (int episode = 0; episode < settings.episodes; ++episode) {
    const double eps = epsilon(episode);
    int s = 0;
    if (settings.exploring_starts) {
      s = static_cast<int>(rng.uniform_index(mdp.num_states()));
    } else {
      const double u = rng.uniform() * total;
      s = static_cast<int>(std::upper_bound(start_cdf.begin(), start_cdf.end(), u) - start_cdf.begin());
      s = std::min(s, mdp.num_states() - 1);
    }
    for (int t = 0; t < settings.steps; ++t) {
      int a = 0;
      if (rng.uniform() < eps) {
        a = static_cast<int>(rng.uniform_index(mdp.num_actions()));
      } else {
        a = table.greedy(s);
      }
      if (action_counts) ++(*action_counts)[a];
      const Transition& next = sample_transition(mdp, s, a, rng);
      q_update(table, s, a, next.expected_cost, next.next_state, false);
      s = next.next_state;
    }
  }
  return table;
}

}  // namespace uavsched
