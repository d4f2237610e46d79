#include <doctest.h>

#include "uavsched/errors.hpp"
#include "uavsched/modulation.hpp"
#include "uavsched/schedulers.hpp"

using namespace uavsched;

namespace {

SimConfig small_config(int devices, int velocities) {
  SimConfig c;
  c.num_devices = devices;
  c.num_velocities = velocities;
  c.num_waypoints = 8;
  return c;
}

double chi_square(const std::vector<int>& counts, double expected) {
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  return chi2;
}

}  // namespace

TEST_CASE("policy names round-trip") {
  for (Policy p : {Policy::kDrlsa, Policy::kRsa, Policy::kLqsa, Policy::kTabularQ}) {
    CHECK(policy_from_string(to_string(p)) == p);
  }
  CHECK(to_string(Policy::kTabularQ) == "tabular-q");
  CHECK_THROWS_AS(policy_from_string("greedy"), ConfigError);
}

TEST_CASE("rsa_select: uniform device, midpoint velocity") {
  const SimConfig c = small_config(5, 4);
  const Environment env(c);
  Rng rng(1);
  const EnvState s = env.reset(rng);
  std::vector<int> counts(5, 0);
  const int draws = 50'000;
  for (int k = 0; k < draws; ++k) {
    const Action a = rsa_select(s, c, rng);
    CHECK(a.velocity_index == 1);
    ++counts[a.device];
  }
  CHECK(chi_square(counts, draws / 5.0) < 13.277);  // 99% quantile, 4 degrees of freedom
}

TEST_CASE("lqsa_select: longest queue, ties to the smaller index") {
  const SimConfig c = small_config(4, 3);
  const Environment env(c);
  Rng rng(2);
  EnvState s = env.reset(rng);
  const std::vector<int> queues{1, 3, 3, 0};
  for (int i = 0; i < 4; ++i) s.devices[i].queue = queues[i];
  CHECK(lqsa_select(s, c) == Action{1, 1});
  s.devices[3].queue = 4;
  CHECK(lqsa_select(s, c) == Action{3, 1});
  for (auto& d : s.devices) d.queue = 0;
  CHECK(lqsa_select(s, c).device == 0);
}

TEST_CASE("drlsa_select: greedy argmin with ties to the smaller flat index") {
  MlpParams net({2, 6});
  net.biases[0] << 4.0, 1.0, 3.0, 1.0, 2.0, 5.0;
  const std::vector<double> x{0.0, 0.0};
  Rng rng(3);
  const Action a = drlsa_select(x, net, 0.0, 2, rng);
  CHECK(a == Action{0, 1});
  CHECK(a.flat(2) == 1);
  CHECK_THROWS_AS(drlsa_select(x, net, 0.0, 4, rng), ConfigError);
}

TEST_CASE("drlsa_select: epsilon 1 is uniform over flat actions") {
  const MlpParams net({2, 6});
  const std::vector<double> x{0.0, 0.0};
  Rng rng(4);
  std::vector<int> counts(6, 0);
  const int draws = 60'000;
  for (int k = 0; k < draws; ++k) {
    const Action a = drlsa_select(x, net, 1.0, 3, rng);
    CHECK(a.device >= 0);
    CHECK(a.device < 2);
    CHECK(a.velocity_index >= 0);
    CHECK(a.velocity_index < 3);
    ++counts[a.flat(3)];
  }
  CHECK(chi_square(counts, draws / 6.0) < 15.086);  // 99% quantile, 5 degrees of freedom
}

TEST_CASE("selections stay in range on random states") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const int devices = 1 + static_cast<int>(rng.uniform_index(10));
    const int velocities = 1 + static_cast<int>(rng.uniform_index(5));
    const SimConfig c = small_config(devices, velocities);
    const Environment env(c);
    EnvState s = env.reset(rng);
    for (auto& d : s.devices) d.queue = static_cast<int>(rng.uniform_index(c.queue_capacity + 1));
    for (const Action a : {rsa_select(s, c, rng), lqsa_select(s, c)}) {
      CHECK(a.device >= 0);
      CHECK(a.device < devices);
      CHECK(a.velocity_index == c.midpoint_velocity_index());
    }
  }
}

TEST_CASE("finalize_action attaches the brute-force optimal order and leaves the state alone") {
  const SimConfig c = small_config(6, 3);
  const Environment env(c);
  Rng rng(6);
  EnvState s = env.reset(rng);
  for (int k = 0; k < 200; ++k) {
    env.step(s, rsa_select(s, c, rng), rng);
    if (s.terminal) s = env.reset(rng);
    const Action a{static_cast<int>(rng.uniform_index(6)), static_cast<int>(rng.uniform_index(3))};
    const EnvState before = s;
    const auto [same, order] = finalize_action(a, s, env);
    CHECK(same == a);
    CHECK(order == brute_force_modulation(env.modulation_problem(s, a.device, a.velocity_index)));
    CHECK(s == before);
  }
}
