#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "uavsched/errors.hpp"
#include "uavsched/tabular.hpp"

using namespace uavsched;

namespace {

// Random MDP with dense rows; costs in [0, 5).
TransitionTable random_mdp(int states, int actions, Rng& rng) {
  TransitionTable t(states, actions);
  for (int s = 0; s < states; ++s) {
    for (int a = 0; a < actions; ++a) {
      std::vector<double> w(states);
      double sum = 0.0;
      for (auto& x : w) sum += x = rng.uniform() + 0.05;
      std::vector<Transition> row;
      for (int n = 0; n < states; ++n) row.push_back({n, w[n] / sum, 5.0 * rng.uniform()});
      t.append_row(std::move(row));
    }
  }
  return t;
}

// Deterministic chain 0 -> 1 -> 2 -> 0; action 0 costs 1, action 1 costs 2 but
// jumps straight back to 0.
TransitionTable chain_mdp() {
  TransitionTable t(3, 2);
  for (int s = 0; s < 3; ++s) {
    t.append_row({{(s + 1) % 3, 1.0, 1.0 + s}});
    t.append_row({{0, 1.0, 2.0}});
  }
  return t;
}

// Independent dense policy evaluation: v = (I - d P)^-1 c.
Eigen::VectorXd dense_policy_value(const TransitionTable& t, const std::vector<int>& policy, double discount) {
  const int n = t.num_states();
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd c(n);
  for (int s = 0; s < n; ++s) {
    c[s] = 0.0;
    for (const auto& tr : t.row(s, policy[s])) {
      a(s, tr.next_state) -= discount * tr.probability;
      c[s] += tr.probability * tr.expected_cost;
    }
  }
  return a.partialPivLu().solve(c);
}

// Componentwise minimum over every deterministic policy.
Eigen::VectorXd brute_force_optimum(const TransitionTable& t, double discount) {
  const int n = t.num_states();
  const int m = t.num_actions();
  Eigen::VectorXd best = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  std::vector<int> policy(n, 0);
  while (true) {
    best = best.cwiseMin(dense_policy_value(t, policy, discount));
    int s = 0;
    while (s < n && ++policy[s] == m) policy[s++] = 0;
    if (s == n) break;
  }
  return best;
}

TransitionTable enumerated(const SimConfig& c, std::uint64_t seed) {
  const Environment env(c);
  Rng rng(seed);
  const EnvState dep = env.reset(rng);
  return enumerate_exact_mdp(env, dep);
}

SimConfig quantized(int k, int d, int h, int v, int nv) {
  SimConfig c;
  c.num_devices = 1;
  c.battery_levels = k;
  c.queue_capacity = d;
  c.num_gain_bins = h;
  c.num_waypoints = v;
  c.num_velocities = nv;
  c.channel_mode = ChannelMode::kQuantized;
  c.battery_capacity = 4e-8;
  c.fading.noise_power = 1e-14;
  c.arrival_prob = 0.4;
  return c;
}

}  // namespace

TEST_CASE("value_iteration: zero costs give zero values") {
  TransitionTable t(2, 2);
  for (int s = 0; s < 2; ++s) {
    t.append_row({{0, 0.5, 0.0}, {1, 0.5, 0.0}});
    t.append_row({{1 - s, 1.0, 0.0}});
  }
  const auto r = value_iteration(t, 0.9);
  CHECK(r.values == std::vector<double>{0.0, 0.0});
}

TEST_CASE("value_iteration: single self-loop is a geometric series") {
  TransitionTable t(1, 1);
  t.append_row({{0, 1.0, 3.0}});
  CHECK(value_iteration(t, 0.9).values[0] == doctest::Approx(30.0).epsilon(1e-10));
  CHECK(value_iteration(t, 0.0).values[0] == 3.0);
}

TEST_CASE("value_iteration: discount 1 needs an absorbing zero-cost state") {
  TransitionTable t(1, 1);
  t.append_row({{0, 1.0, 1.0}});
  CHECK_THROWS_AS(value_iteration(t, 1.0), ConfigError);

  TransitionTable absorbing(2, 1);
  absorbing.append_row({{1, 1.0, 4.0}});
  absorbing.append_row({{1, 1.0, 0.0}});
  const auto r = value_iteration(absorbing, 1.0);
  CHECK(r.values[0] == doctest::Approx(4.0));
  CHECK(r.values[1] == 0.0);
}

TEST_CASE("value_iteration: ties go to the smallest action") {
  TransitionTable t(1, 3);
  for (int a = 0; a < 3; ++a) t.append_row({{0, 1.0, a == 0 ? 2.0 : 1.0}});
  CHECK(value_iteration(t, 0.5).policy[0] == 1);
}

TEST_CASE("value_iteration matches exhaustive policy enumeration") {
  SUBCASE("32-state Fig-3 scale instance") {
    const TransitionTable t = enumerated(quantized(1, 1, 2, 4, 1), 3);
    REQUIRE(t.num_states() == 32);
    const auto vi = value_iteration(t, 0.9);
    const Eigen::VectorXd oracle = brute_force_optimum(t, 0.9);
    for (int s = 0; s < 32; ++s) CHECK(vi.values[s] == doctest::Approx(oracle[s]).epsilon(1e-9));
  }
  SUBCASE("16-state instance, two velocities") {
    const TransitionTable t = enumerated(quantized(1, 1, 1, 4, 2), 4);
    REQUIRE(t.num_states() == 16);
    REQUIRE(t.num_actions() == 2);
    const auto vi = value_iteration(t, 0.9);
    const Eigen::VectorXd oracle = brute_force_optimum(t, 0.9);
    for (int s = 0; s < 16; ++s) CHECK(vi.values[s] == doctest::Approx(oracle[s]).epsilon(1e-9));
    const Eigen::VectorXd greedy = dense_policy_value(t, vi.policy, 0.9);
    for (int s = 0; s < 16; ++s) CHECK(greedy[s] == doctest::Approx(oracle[s]).epsilon(1e-9));
  }
  SUBCASE("12-state random MDP, three actions") {
    Rng rng(8);
    const TransitionTable t = random_mdp(12, 3, rng);
    const auto vi = value_iteration(t, 0.8);
    const Eigen::VectorXd oracle = brute_force_optimum(t, 0.8);
    for (int s = 0; s < 12; ++s) CHECK(vi.values[s] == doctest::Approx(oracle[s]).epsilon(1e-9));
  }
}

TEST_CASE("evaluate_policy agrees with a dense solve") {
  Rng rng(12);
  const TransitionTable t = random_mdp(20, 3, rng);
  std::vector<int> policy(20);
  for (auto& a : policy) a = static_cast<int>(rng.uniform_index(3));
  const auto v = evaluate_policy(t, policy, 0.95);
  const Eigen::VectorXd oracle = dense_policy_value(t, policy, 0.95);
  for (int s = 0; s < 20; ++s) CHECK(v[s] == doctest::Approx(oracle[s]).epsilon(1e-10));
}

TEST_CASE("constant cost shift moves values by c/(1-d) and keeps the policy") {
  Rng rng(13);
  const TransitionTable t = random_mdp(10, 3, rng);
  TransitionTable shifted(10, 3);
  for (int s = 0; s < 10; ++s) {
    for (int a = 0; a < 3; ++a) {
      std::vector<Transition> row(t.row(s, a).begin(), t.row(s, a).end());
      for (auto& tr : row) tr.expected_cost += 7.0;
      shifted.append_row(std::move(row));
    }
  }
  const auto base = value_iteration(t, 0.9);
  const auto moved = value_iteration(shifted, 0.9);
  for (int s = 0; s < 10; ++s) CHECK(moved.values[s] == doctest::Approx(base.values[s] + 70.0).epsilon(1e-9));
  CHECK(moved.policy == base.policy);
}

TEST_CASE("q_update: Bellman arithmetic") {
  QTable t(2, 2, 0.5, 0.9);
  CHECK(q_update(t, 0, 1, 10.0, 1, false) == 5.0);
  t.at(1, 0) = 4.0;
  t.at(1, 1) = 2.0;
  CHECK(q_update(t, 0, 0, 1.0, 1, false) == doctest::Approx(0.5 * (1.0 + 0.9 * 2.0)));

  QTable frozen(2, 2, 0.0, 0.9);
  frozen.at(0, 0) = 3.0;
  CHECK(q_update(frozen, 0, 0, 100.0, 1, false) == 3.0);

  QTable full(2, 2, 1.0, 0.9);
  full.at(1, 0) = 50.0;
  full.at(1, 1) = 50.0;
  CHECK(q_update(full, 0, 0, 6.5, 1, true) == 6.5);
}

TEST_CASE("QTable: zero start, argmin ties, CSV") {
  QTable t(2, 3, 0.1, 0.9);
  CHECK(t.min_value(0) == 0.0);
  CHECK(t.greedy(0) == 0);
  t.at(1, 2) = -1.0;
  CHECK(t.greedy(1) == 2);
  std::ostringstream out;
  t.write_csv(out);
  const std::string text = out.str();
  CHECK(text.rfind("state_id,action_id,value\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 7);
  CHECK(text.find("1,2,-1\n") != std::string::npos);
}

TEST_CASE("train_tabular: deterministic chain converges to value iteration") {
  const TransitionTable t = chain_mdp();
  const auto vi = value_iteration(t, 0.9);
  const auto q_star = lookahead_q(t, vi.values, 0.9);
  TabularSettings s;
  s.episodes = 100;
  s.steps = 100;  // 10,000 updates
  s.learning_rate = 0.5;
  s.discount = 0.9;
  Rng rng(1);
  const QTable q = train_tabular(t, {1.0, 0.0, 0.0}, s, rng);
  for (int st = 0; st < 3; ++st) {
    for (int a = 0; a < 2; ++a) CHECK(q.at(st, a) == doctest::Approx(q_star[st * 2 + a]).epsilon(1e-3));
  }
  CHECK(q.greedy_policy() == vi.policy);
}

TEST_CASE("train_tabular: epsilon 1 explores uniformly") {
  Rng mdp_rng(2);
  const TransitionTable t = random_mdp(5, 4, mdp_rng);
  TabularSettings s;
  s.episodes = 100;
  s.steps = 1000;
  s.epsilon_start = 1.0;
  s.epsilon_end = 1.0;
  Rng rng(3);
  std::vector<std::int64_t> counts;
  train_tabular(t, {1, 0, 0, 0, 0}, s, rng, &counts);
  const double expected = 100'000 / 4.0;
  double chi2 = 0.0;
  for (auto c : counts) chi2 += (c - expected) * (c - expected) / expected;
  CHECK(chi2 < 11.345);  // 99% quantile, 3 degrees of freedom
}

TEST_CASE("train_tabular: same seed, same table") {
  Rng mdp_rng(4);
  const TransitionTable t = random_mdp(6, 2, mdp_rng);
  TabularSettings s;
  s.episodes = 50;
  s.steps = 50;
  Rng a(9);
  Rng b(9);
  CHECK(train_tabular(t, {1, 0, 0, 0, 0, 0}, s, a) == train_tabular(t, {1, 0, 0, 0, 0, 0}, s, b));
}

TEST_CASE("q_update contracts toward Q* on average") {
  Rng mdp_rng(5);
  const TransitionTable t = random_mdp(4, 2, mdp_rng);
  const double discount = 0.7;
  const auto vi = value_iteration(t, discount);
  const auto q_star = lookahead_q(t, vi.values, discount);
  const std::vector<int> checkpoints = {0, 50, 100, 200, 400, 800, 1600};
  std::vector<double> mean_error(checkpoints.size(), 0.0);
  for (int seed = 0; seed < 20; ++seed) {
    Rng rng(100 + seed);
    QTable q(4, 2, 0.1, discount);
    int s = 0;
    std::size_t next = 0;
    for (int n = 0; n <= checkpoints.back(); ++n) {
      if (next < checkpoints.size() && n == checkpoints[next]) {
        double err = 0.0;
        for (int st = 0; st < 4; ++st) {
          for (int a = 0; a < 2; ++a) err = std::max(err, std::abs(q.at(st, a) - q_star[st * 2 + a]));
        }
        mean_error[next++] += err / 20.0;
      }
      const int a = static_cast<int>(rng.uniform_index(2));
      const Transition& tr = sample_transition(t, s, a, rng);
      q_update(q, s, a, tr.expected_cost, tr.next_state, false);
      s = tr.next_state;
    }
  }
  for (std::size_t k = 1; k < mean_error.size(); ++k) CHECK(mean_error[k] <= mean_error[k - 1]);
}

TEST_CASE("cost rescaling rescales Q and keeps the argmin") {
  Rng mdp_rng(6);
  const TransitionTable t = random_mdp(6, 3, mdp_rng);
  for (double lambda : {0.5, 2.0}) {
    TransitionTable scaled(6, 3);
    for (int s = 0; s < 6; ++s) {
      for (int a = 0; a < 3; ++a) {
        std::vector<Transition> row(t.row(s, a).begin(), t.row(s, a).end());
        for (auto& tr : row) tr.expected_cost *= lambda;
        scaled.append_row(std::move(row));
      }
    }
    TabularSettings settings;
    settings.episodes = 200;
    settings.steps = 200;
    const std::vector<double> start{1, 0, 0, 0, 0, 0};
    Rng a(21);
    Rng b(21);
    const QTable base = train_tabular(t, start, settings, a);
    const QTable other = train_tabular(scaled, start, settings, b);
    for (int s = 0; s < 6; ++s) {
      for (int act = 0; act < 3; ++act) CHECK(other.at(s, act) == doctest::Approx(lambda * base.at(s, act)).epsilon(1e-12));
    }
    CHECK(other.greedy_policy() == base.greedy_policy());
  }
}

TEST_CASE("train_tabular: greedy policy matches value iteration on the 32-state instance") {
  const TransitionTable t = enumerated(quantized(1, 1, 2, 4, 2), 7);
  const int n = t.num_states();
  REQUIRE(n == 32);
  const double discount = 0.9;
  const auto vi = value_iteration(t, discount);
  const auto q_star = lookahead_q(t, vi.values, discount);
  TabularSettings s;
  s.discount = discount;
  Rng rng(11);
  const QTable q = train_tabular(t, std::vector<double>(n, 1.0 / n), s, rng);
  int agree = 0;
  for (int st = 0; st < n; ++st) {
    const double best = q_star[st * 2 + vi.policy[st]];
    agree += q_star[st * 2 + q.greedy(st)] - best <= 1e-9 * (1.0 + std::abs(best)) ? 1 : 0;
  }
  CHECK(agree >= 0.95 * n);
}
