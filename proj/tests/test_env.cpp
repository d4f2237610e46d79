#include <doctest.h>

#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "uavsched/env.hpp"
#include "uavsched/errors.hpp"

using namespace uavsched;

namespace {

SimConfig small_config() {
  SimConfig c;
  c.num_devices = 3;
  c.num_laps = 2;
  c.num_waypoints = 10;
  c.queue_capacity = 4;
  c.battery_levels = 10;
  return c;
}

// A device 100 m inside the circle from a waypoint; directly underneath the
// contact window would be empty.
void place_near_waypoint(const Environment& env, EnvState& s, int device, int waypoint) {
  double x = 0.0;
  double y = 0.0;
  env.waypoint_position(waypoint, x, y);
  const double scale = (env.config().trajectory_radius - 100.0) / env.config().trajectory_radius;
  s.devices[device].x = x * scale;
  s.devices[device].y = y * scale;
}

}  // namespace

TEST_CASE("reset: initial condition") {
  SimConfig c = small_config();
  c.battery_levels = 50;
  const Environment env(c);
  Rng rng(1);
  const EnvState s = env.reset(rng);
  REQUIRE(s.devices.size() == 3);
  for (const auto& d : s.devices) {
    CHECK(d.queue == 0);
    CHECK(d.battery == 25);
    CHECK(std::hypot(d.x, d.y) <= c.region_radius);
    CHECK(d.channel.power_gain > 0.0);
  }
  CHECK(s.uav.lap == 1);
  CHECK(s.uav.waypoint == 0);
  CHECK(s.uav.velocity == env.velocity_grid()[c.midpoint_velocity_index()]);
  CHECK(s.uav.x == doctest::Approx(c.trajectory_radius));
  CHECK(s.uav.z == c.altitude);
}

TEST_CASE("reset: odd battery capacity rounds down") {
  SimConfig c = small_config();
  c.battery_levels = 7;
  const Environment env(c);
  Rng rng(1);
  CHECK(env.reset(rng).devices[0].battery == 3);
}

TEST_CASE("reset: same seed gives an identical state") {
  const Environment env(small_config());
  Rng a(42);
  Rng b(42);
  CHECK(env.reset(a) == env.reset(b));
  Rng c(43);
  Rng d(42);
  CHECK_FALSE(env.reset(c) == env.reset(d));
}

TEST_CASE("step: full queue overflows when not scheduled") {
  SimConfig c = small_config();
  c.arrival_prob = 1.0;
  const Environment env(c);
  Rng rng(3);
  EnvState s = env.reset(rng);
  s.devices[2].queue = c.queue_capacity;
  const StepOutcome o = env.step(s, Action{0, 0}, rng);
  CHECK(o.cost >= 1);
  CHECK(o.overflow >= 1);
  CHECK(s.devices[2].queue == c.queue_capacity);
  CHECK(o.cost == o.overflow + o.failed_tx);
}

TEST_CASE("step: empty queue and full battery only harvests") {
  SimConfig c = small_config();
  c.arrival_prob = 0.0;
  const Environment env(c);
  Rng rng(5);
  EnvState s = env.reset(rng);
  place_near_waypoint(env, s, 0, 1);
  s.devices[0].battery = c.battery_levels;
  s.devices[0].queue = 0;
  const StepOutcome o = env.step(s, Action{0, 0}, rng);
  CHECK(o.delivered == 0);
  CHECK(o.failed_tx == 0);
  CHECK(o.harvested_levels == 0);  // clamped at K
  CHECK(s.devices[0].battery == c.battery_levels);
}

TEST_CASE("step: a device near the UAV harvests energy") {
  SimConfig c = small_config();
  c.arrival_prob = 0.0;
  c.battery_capacity = 1e-8;
  const Environment env(c);
  Rng rng(5);
  EnvState s = env.reset(rng);
  place_near_waypoint(env, s, 0, 1);
  s.devices[0].battery = 0;
  const StepOutcome o = env.step(s, Action{0, 0}, rng);
  CHECK(o.harvested_levels > 0);
  CHECK(s.devices[0].battery == std::min(c.battery_levels, o.harvested_levels));
}

TEST_CASE("step: closed system has zero cost") {
  SimConfig c = small_config();
  c.arrival_prob = 0.0;
  const Environment env(c);
  Rng rng(8);
  EnvState s = env.reset(rng);
  while (!s.terminal) {
    const StepOutcome o = env.step(s, Action{static_cast<int>(rng.uniform_index(3)), 1}, rng);
    CHECK(o.cost == 0);
    CHECK(o.arrivals == 0);
  }
}

TEST_CASE("step: empty battery drops the packet as a failed uplink") {
  SimConfig c = small_config();
  c.arrival_prob = 0.0;
  c.region_radius = 10.0;  // far from the circle: harvest is negligible
  const Environment env(c);
  Rng rng(4);
  EnvState s = env.reset(rng);
  s.devices[1].queue = 2;
  s.devices[1].battery = 0;
  const StepOutcome o = env.step(s, Action{1, 0}, rng);
  REQUIRE(o.phi_star.has_value());
  CHECK(o.failed_tx == 1);
  CHECK(o.energy_failures == 1);
  CHECK(o.delivered == 0);
  CHECK(s.devices[1].queue == 1);
}

TEST_CASE("step: terminal after Z laps, then refuses") {
  const SimConfig c = small_config();
  const Environment env(c);
  Rng rng(2);
  EnvState s = env.reset(rng);
  int frames = 0;
  while (!s.terminal) {
    env.step(s, Action{0, 0}, rng);
    ++frames;
  }
  CHECK(frames == c.num_laps * c.num_waypoints);
  CHECK(s.uav.lap == c.num_laps + 1);
  CHECK_THROWS_AS(env.step(s, Action{0, 0}, rng), RuntimeFailure);
}

TEST_CASE("step: out-of-range action is refused") {
  const Environment env(small_config());
  Rng rng(2);
  EnvState s = env.reset(rng);
  CHECK_THROWS_AS(env.step(s, Action{3, 0}, rng), RuntimeFailure);
  CHECK_THROWS_AS(env.step(s, Action{0, 5}, rng), RuntimeFailure);
}

TEST_CASE("step: deterministic given state, action and stream position") {
  const Environment env(small_config());
  Rng rng(12);
  EnvState s = env.reset(rng);
  for (int t = 0; t < 5; ++t) env.step(s, Action{t % 3, t % 5}, rng);
  EnvState a = s;
  EnvState b = s;
  Rng ra = Rng::at_position(rng.seed(), rng.position());
  Rng rb = Rng::at_position(rng.seed(), rng.position());
  const StepOutcome oa = env.step(a, Action{1, 2}, ra);
  const StepOutcome ob = env.step(b, Action{1, 2}, rb);
  CHECK(a == b);
  CHECK(oa.cost == ob.cost);
  CHECK(ra.position() == rb.position());
}

TEST_CASE("step: the stream advances by the same count for any action") {
  SimConfig c = small_config();
  c.packets_per_uplink = 3;
  const Environment env(c);
  Rng rng(12);
  const EnvState start = env.reset(rng);
  std::uint64_t consumed = 0;
  for (int device = 0; device < 3; ++device) {
    for (int v = 0; v < c.num_velocities; ++v) {
      EnvState s = start;
      s.devices[device].queue = device;
      Rng r = Rng::at_position(rng.seed(), rng.position());
      env.step(s, Action{device, v}, r);
      const std::uint64_t used = r.position() - rng.position();
      if (consumed == 0) consumed = used;
      CHECK(used == consumed);
    }
  }
}

TEST_CASE("step: conservation and bounds under random play") {
  SimConfig c = small_config();
  c.packets_per_uplink = 2;
  c.battery_capacity = 1e-7;
  c.fading.noise_power = 1e-14;
  const Environment env(c);
  Rng rng(77);
  EnvState s = env.reset(rng);
  for (int t = 0; t < 20'000; ++t) {
    if (s.terminal) s = env.restart(s, rng);
    const Action a{static_cast<int>(rng.uniform_index(3)), static_cast<int>(rng.uniform_index(5))};
    env.step(s, a, rng);
    const auto& l = s.ledger;
    CHECK(l.generated == l.delivered + l.dropped_overflow + l.dropped_tx + s.queued());
    for (const auto& d : s.devices) {
      CHECK(d.queue >= 0);
      CHECK(d.queue <= c.queue_capacity);
      CHECK(d.battery >= 0);
      CHECK(d.battery <= c.battery_levels);
    }
  }
}

TEST_CASE("velocity: doubling it halves the frame time and the contact window") {
  SimConfig c = small_config();
  c.v_min = 5.0;
  c.v_max = 20.0;
  c.num_velocities = 4;  // 5, 10, 15, 20
  const Environment env(c);
  CHECK(env.frame_time(1) == doctest::Approx(env.frame_time(0) / 2.0).epsilon(1e-15));
  CHECK(env.frame_time(3) == doctest::Approx(env.frame_time(1) / 2.0).epsilon(1e-15));
  CHECK(env.frame_time(0) == doctest::Approx(c.segment_length() / 5.0));
  const LinkGeometry near{120.0, 100.0, 0.0};  // contact time binds
  CHECK(env.contact_window(near, 3) == doctest::Approx(env.contact_window(near, 1) / 2.0).epsilon(1e-15));
  const LinkGeometry far{2000.0, 100.0, 0.0};  // frame time binds
  CHECK(env.contact_window(far, 3) == doctest::Approx(env.contact_window(far, 1) / 2.0).epsilon(1e-15));
}

TEST_CASE("arrival probability: reference at the midpoint, scaled with frame time") {
  SimConfig c = small_config();
  c.arrival_prob = 0.3;
  const Environment env(c);
  const int mid = c.midpoint_velocity_index();
  CHECK(env.arrival_probability(mid) == doctest::Approx(0.3).epsilon(1e-15));
  for (int v = 0; v < c.num_velocities; ++v) {
    const double ratio = env.frame_time(v) / env.frame_time(mid);
    CHECK(env.arrival_probability(v) == doctest::Approx(1.0 - std::pow(0.7, ratio)).epsilon(1e-13));
  }
  c.arrival_time_scaled = false;
  const Environment flat(c);
  CHECK(flat.arrival_probability(0) == 0.3);
}

TEST_CASE("packet success probability") {
  const Environment env(small_config());
  CHECK(env.packet_success_probability() == doctest::Approx(std::pow(1.0 - 5e-4, 1024.0)).epsilon(1e-15));
}

TEST_CASE("encode: layout and bounds") {
  SimConfig c = small_config();
  c.num_devices = 2;
  const Environment env(c);
  Rng rng(1);
  EnvState s = env.reset(rng);
  for (auto& d : s.devices) {
    d.queue = 0;
    d.battery = 0;
  }
  const auto x = env.encode(s);
  REQUIRE(x.size() == 9);
  CHECK(x[0] == 0.0);
  CHECK(x[1] == 0.0);
  CHECK(x[3] == 0.0);
  CHECK(x[4] == 0.0);
  CHECK(x[6] == 0.0);
  CHECK(x[7] == 1.0);
  CHECK(x[8] == doctest::Approx(0.5));

  s.devices[0].queue = c.queue_capacity;
  s.devices[1].battery = c.battery_levels;
  s.devices[0].channel.power_gain = 1e30;
  s.devices[1].channel.power_gain = 1e-300;
  const auto y = env.encode(s);
  CHECK(y[0] == 1.0);
  CHECK(y[4] == 1.0);
  CHECK(y[2] == 1.0);
  CHECK(y[5] == -1.0);
}

TEST_CASE("encode: finite and within [-1, 1] on random trajectories") {
  const Environment env(small_config());
  Rng rng(21);
  EnvState s = env.reset(rng);
  while (!s.terminal) {
    for (double v : env.encode(s)) {
      CHECK(std::isfinite(v));
      CHECK(std::abs(v) <= 1.0);
    }
    env.step(s, Action{static_cast<int>(rng.uniform_index(3)), static_cast<int>(rng.uniform_index(5))}, rng);
  }
}

TEST_CASE("gain quantizer: percentile thresholds") {
  SimConfig c = small_config();
  c.num_gain_bins = 4;
  const Environment env(c);
  const auto& t = env.quantizer().thresholds_db();
  REQUIRE(t.size() == 3);
  const double lo = to_db(env.gain_quantile(0.05));
  const double hi = to_db(env.gain_quantile(0.95));
  CHECK(env.gain_cdf(from_db(lo)) == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(env.gain_cdf(from_db(hi)) == doctest::Approx(0.95).epsilon(1e-6));
  for (int j = 0; j < 3; ++j) CHECK(t[j] == doctest::Approx(lo + (hi - lo) * (j + 1) / 4.0).epsilon(1e-12));
  CHECK(env.median_gain_db() == doctest::Approx(to_db(env.gain_quantile(0.5))));
}

TEST_CASE("gain quantizer: explicit override") {
  SimConfig c = small_config();
  c.num_gain_bins = 3;
  c.gain_thresholds_db = {-10.0, 30.0};
  const Environment env(c);
  CHECK(env.quantizer().thresholds_db() == std::vector<double>{-10.0, 30.0});
}

TEST_CASE("bin probabilities and representative gains") {
  SimConfig c = small_config();
  c.num_gain_bins = 3;
  const Environment env(c);
  for (double d : {100.0, 300.0, 900.0}) {
    const auto p = env.bin_probabilities(d);
    double sum = 0.0;
    for (double x : p) sum += x;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    // Conditional means average back to the unconditional mean.
    double mean = 0.0;
    for (int h = 0; h < 3; ++h) {
      mean += p[h] * env.bin_representative_gain(d, h);
      if (p[h] > 1e-9) CHECK(env.quantizer().bin(env.bin_representative_gain(d, h)) == h);
    }
    CHECK(mean == doctest::Approx(mean_gain(c.fading, d)).epsilon(1e-9));
  }
}

TEST_CASE("quantized channel mode uses the bin representative") {
  SimConfig c = small_config();
  c.channel_mode = ChannelMode::kQuantized;
  const Environment env(c);
  Rng rng(9);
  EnvState s = env.reset(rng);
  env.step(s, Action{0, 0}, rng);
  for (int i = 0; i < c.num_devices; ++i) {
    const double d = env.geometry(s, i).distance;
    CHECK(s.devices[i].channel.power_gain == env.bin_representative_gain(d, s.devices[i].channel.gain_bin));
  }
}

TEST_CASE("ar1 channel mode keeps the mean gain") {
  SimConfig c = small_config();
  c.num_devices = 1;
  c.channel_mode = ChannelMode::kAr1;
  c.num_laps = 100'000;
  const Environment env(c);
  Rng rng(10);
  EnvState s = env.reset(rng);
  s.devices[0].x = 0.0;
  s.devices[0].y = 0.0;  // centre: constant distance to the circle
  const double mean = mean_gain(c.fading, env.geometry(s, 0).distance);
  double sum = 0.0;
  const int n = 200'000;
  for (int t = 0; t < n; ++t) {
    env.step(s, Action{0, 0}, rng);
    sum += s.devices[0].channel.power_gain;
  }
  CHECK(sum / n == doctest::Approx(mean).epsilon(0.05));
}

TEST_CASE("snapshot: field names and round trip") {
  const Environment env(small_config());
  Rng rng(31);
  EnvState s = env.reset(rng);
  for (int t = 0; t < 7; ++t) env.step(s, Action{t % 3, 4}, rng);
  const std::string text = snapshot_json(s, rng.position());
  const auto j = nlohmann::json::parse(text);
  CHECK(j.contains("devices"));
  CHECK(j.contains("uav"));
  CHECK(j.contains("rng_position"));
  CHECK(j["devices"][0].size() == 4);
  for (const char* key : {"queue", "battery", "x", "y"}) CHECK(j["devices"][0].contains(key));
  for (const char* key : {"lap", "waypoint", "velocity"}) CHECK(j["uav"].contains(key));

  const Snapshot snap = parse_snapshot_json(text);
  REQUIRE(snap.devices.size() == s.devices.size());
  for (std::size_t i = 0; i < s.devices.size(); ++i) {
    CHECK(snap.devices[i].queue == s.devices[i].queue);
    CHECK(snap.devices[i].battery == s.devices[i].battery);
    CHECK(snap.devices[i].x == s.devices[i].x);
    CHECK(snap.devices[i].y == s.devices[i].y);
  }
  CHECK(snap.uav.lap == s.uav.lap);
  CHECK(snap.uav.waypoint == s.uav.waypoint);
  CHECK(snap.uav.velocity == s.uav.velocity);
  CHECK(snap.rng_position == rng.position());
}

TEST_CASE("config validation is enforced by the environment") {
  SimConfig c = small_config();
  c.v_min = 30.0;
  CHECK_THROWS_AS(Environment{c}, ConfigError);
  c = small_config();
  c.num_waypoints = 2;
  CHECK_THROWS_AS(Environment{c}, ConfigError);
  c = small_config();
  c.ber_target = 0.5;
  CHECK_THROWS_AS(Environment{c}, ConfigError);
}
