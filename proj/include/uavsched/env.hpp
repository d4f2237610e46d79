#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "uavsched/config.hpp"
#include "uavsched/core_model.hpp"
#include "uavsched/modulation.hpp"
#include "uavsched/rng.hpp"

// The scheduling MDP: one frame per waypoint segment, one scheduled device per
// frame, Bernoulli packet arrivals, lower-rounded battery levels and a cost
// equal to the packets lost to queue overflow or failed uplinks.
namespace uavsched {

struct DeviceState {
  int queue = 0;    // packets, 0..D
  int battery = 0;  // level, 0..K; energy = battery * E/K
  double x = 0.0;
  double y = 0.0;
  ChannelDraw channel{};
  double h_re = 0.0;  // complex fading coefficient, tracked in ar1 mode
  double h_im = 0.0;

  bool operator==(const DeviceState&) const = default;
};

struct UavState {
  int lap = 1;
  int waypoint = 0;
  int velocity_index = 0;
  double velocity = 0.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  bool operator==(const UavState&) const = default;
};

// Running packet accounting; generated always equals
// delivered + dropped_overflow + dropped_tx + queued.
struct PacketLedger {
  std::int64_t generated = 0;
  std::int64_t delivered = 0;
  std::int64_t dropped_overflow = 0;
  std::int64_t dropped_tx = 0;

  bool operator==(const PacketLedger&) const = default;
};

struct EnvState {
  std::vector<DeviceState> devices;
  UavState uav;
  PacketLedger ledger;
  bool terminal = false;

  std::int64_t queued() const;
  bool operator==(const EnvState&) const = default;
};

struct Action {
  int device = 0;
  int velocity_index = 0;

  int flat(int num_velocities) const { return device * num_velocities + velocity_index; }
  static Action from_flat(int index, int num_velocities) {
    return Action{index / num_velocities, index % num_velocities};
  }
  bool operator==(const Action&) const = default;
};

struct StepOutcome {
  int cost = 0;             // overflow + failed_tx
  int overflow = 0;         // arrivals dropped at a full queue
  int failed_tx = 0;        // uplink losses (energy shortfall or channel error)
  int energy_failures = 0;  // the part of failed_tx caused by an empty-enough battery
  int delivered = 0;
  int arrivals = 0;
  int harvested_levels = 0;
  bool terminal = false;
  std::optional<int> phi_star;  // nullopt: no order fits the window, harvest-only frame
  double frame_time = 0.0;      // tau (s)
  double contact_window = 0.0;  // T-hat (s)
  double velocity = 0.0;
};

// Deterministic part of a scheduled device's frame: how many packets go on
// air, whether the battery runs short, and where the battery ends up after
// spending and harvesting. Only the per-packet channel errors remain random.
struct UplinkPlan {
  std::optional<int> phi_star;
  int attempts = 0;          // packets transmitted (each succeeds independently)
  bool energy_failure = false;  // one more packet was dropped for lack of energy
  int battery_after_spend = 0;
  int battery_after = 0;     // after harvesting, clamped at K
  double contact_window = 0.0;
};

class Environment {
 public:
  explicit Environment(SimConfig config);

  const SimConfig& config() const { return config_; }
  const GainQuantizer& quantizer() const { return quantizer_; }
  const std::vector<double>& velocity_grid() const { return velocity_grid_; }
  double median_gain_db() const { return median_gain_db_; }
  int state_dim() const { return 3 * config_.num_devices + 3; }
  int num_actions() const { return config_.num_actions(); }

  // New deployment: devices uniform in the region disk, empty queues,
  // batteries at K/2, UAV at waypoint 0 of lap 1 at the midpoint velocity.
  EnvState reset(Rng& rng) const;
  // Start of a new episode on an existing deployment (device positions kept).
  EnvState restart(const EnvState& deployment, Rng& rng) const;

  // Advances one frame in place. Throws RuntimeFailure on a terminal state.
  StepOutcome step(EnvState& state, Action action, Rng& rng) const;

  // Fixed-length feature vector in [-1, 1]: per device (queue, battery, gain),
  // then (sin, cos) of the waypoint phase and the lap fraction.
  std::vector<double> encode(const EnvState& state) const;
  void encode_into(const EnvState& state, std::span<double> out) const;

  void waypoint_position(int waypoint, double& x, double& y) const;
  LinkGeometry geometry(const EnvState& state, int device) const;
  double frame_time(int velocity_index) const;
  double arrival_probability(int velocity_index) const;
  double packet_success_probability() const;
  // Battery levels an unscheduled device loses per frame.
  int idle_drain_levels(int velocity_index) const;
  // Contact window min(contact_time, tau) for a device at the current UAV pose.
  double contact_window(const LinkGeometry& geom, int velocity_index) const;

  // Uplink plan for the scheduled device, evaluated on the post-move pose
  // and the refreshed channel.
  UplinkPlan plan_uplink(const EnvState& state, int device, int velocity_index) const;

  // Modulation problem for the scheduled device at the current pose and channel.
  ModulationProblem modulation_problem(const EnvState& state, int device, int velocity_index) const;

  // Probability of each gain bin, and the bin's conditional mean gain, at a distance.
  std::vector<double> bin_probabilities(double distance) const;
  double bin_representative_gain(double distance, int bin) const;

  // Mixture CDF of the power gain over the configured geometry (device uniform
  // in the region, UAV uniform on its circle).
  double gain_cdf(double power_gain) const;
  double gain_quantile(double probability) const;

 private:
  void draw_channel(DeviceState& device, const LinkGeometry& geom, Rng& rng) const;

  SimConfig config_;
  std::vector<double> velocity_grid_;
  std::vector<double> geometry_mean_gains_;  // quadrature nodes of the configured geometry
  GainQuantizer quantizer_;
  double median_gain_db_ = 0.0;
  double packet_success_ = 1.0;
};

// JSON snapshot with fields devices[{queue,battery,x,y}], uav{lap,waypoint,velocity}, rng_position.
std::string snapshot_json(const EnvState& state, std::uint64_t rng_position);

struct Snapshot {
  std::vector<DeviceState> devices;  // queue, battery and position populated
  UavState uav;                      // lap, waypoint and velocity populated
  std::uint64_t rng_position = 0;
};
Snapshot parse_snapshot_json(const std::string& text);

}  // namespace uavsched
