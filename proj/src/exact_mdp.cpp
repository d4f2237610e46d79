#include "uavsched/exact_mdp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <string>
#include <tuple>

#include "uavsched/errors.hpp"

namespace uavsched {

TransitionTable::TransitionTable(int num_states, int num_actions)
    : num_states_(num_states), num_actions_(num_actions) {
  row_cost_.reserve(static_cast<std::size_t>(num_states) * num_actions);
  offsets_.reserve(static_cast<std::size_t>(num_states) * num_actions + 1);
}

std::span<const Transition> TransitionTable::row(int state, int action) const {
  const std::size_t i = index(state, action);
  return {transitions_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
}

void TransitionTable::append_row(std::vector<Transition> transitions) {
  double cost = 0.0;
  for (const auto& t : transitions) cost += t.probability * t.expected_cost;
  transitions_.insert(transitions_.end(), transitions.begin(), transitions.end());
  offsets_.push_back(transitions_.size());
  row_cost_.push_back(cost);
}

StateIndexer::StateIndexer(const SimConfig& config)
    : num_devices_(config.num_devices),
      num_waypoints_(config.num_waypoints),
      queue_radix_(config.queue_capacity + 1),
      battery_radix_(config.battery_levels + 1),
      bin_radix_(config.num_gain_bins),
      device_radix_(queue_radix_ * battery_radix_ * bin_radix_) {
  long double count = num_waypoints_;
  for (int i = 0; i < num_devices_; ++i) count *= device_radix_;
  count_ = count > 1e18L ? std::uint64_t{1'000'000'000'000'000'000ULL} : static_cast<std::uint64_t>(count);
}

int StateIndexer::compose(int waypoint, std::span<const DeviceTuple> devices) const {
  std::int64_t id = 0;
  for (int i = num_devices_ - 1; i >= 0; --i) {
    const auto& d = devices[i];
    id = id * device_radix_ + d.queue + queue_radix_ * (d.battery + battery_radix_ * d.gain_bin);
  }
  return static_cast<int>(id * num_waypoints_ + waypoint);
}

int StateIndexer::state_id(const EnvState& state) const {
  std::vector<DeviceTuple> tuples(num_devices_);
  for (int i = 0; i < num_devices_; ++i) {
    tuples[i] = {state.devices[i].queue, state.devices[i].battery, state.devices[i].channel.gain_bin};
  }
  return compose(state.uav.waypoint, tuples);
}

std::vector<StateIndexer::DeviceTuple> StateIndexer::devices(int state_id) const {
  std::vector<DeviceTuple> out(num_devices_);
  std::int64_t rest = state_id / num_waypoints_;
  for (int i = 0; i < num_devices_; ++i) {
    int digit = static_cast<int>(rest % device_radix_);
    rest /= device_radix_;
    out[i].queue = digit % queue_radix_;
    digit /= queue_radix_;
    out[i].battery = digit % battery_radix_;
    out[i].gain_bin = digit / battery_radix_;
  }
  return out;
}

EnvState StateIndexer::decode(int state_id, const Environment& env, const EnvState& deployment) const {
  EnvState state;
  state.devices.resize(num_devices_);
  state.uav.lap = 1;
  state.uav.waypoint = waypoint(state_id);
  state.uav.velocity_index = env.config().midpoint_velocity_index();
  state.uav.velocity = env.velocity_grid()[state.uav.velocity_index];
  env.waypoint_position(state.uav.waypoint, state.uav.x, state.uav.y);
  state.uav.z = env.config().altitude;
  const auto tuples = devices(state_id);
  for (int i = 0; i < num_devices_; ++i) {
    auto& d = state.devices[i];
    d.x = deployment.devices.at(i).x;
    d.y = deployment.devices.at(i).y;
    d.queue = tuples[i].queue;
    d.battery = tuples[i].battery;
    d.channel.gain_bin = tuples[i].gain_bin;
    d.channel.power_gain = env.bin_representative_gain(env.geometry(state, i).distance, tuples[i].gain_bin);
  }
  return state;
}

namespace {

struct DeviceOutcome {
  double probability = 0.0;
  double cost = 0.0;  // E[cost | this device's next tuple]
};

using OutcomeMap = std::map<std::tuple<int, int, int>, DeviceOutcome>;

void add_outcome(OutcomeMap& map, int queue, int battery, int bin, double probability, double cost) {
  if (probability <= 0.0) return;
  auto& o = map[{queue, battery, bin}];
  const double total = o.probability + probability;
  o.cost = (o.cost * o.probability + cost * probability) / total;
  o.probability = total;
}

double binomial_pmf(int n, int k, double p) {
  double c = 1.0;
  for (int j = 1; j <= k; ++j) c = c * (n - k + j) / j;
  return c * std::pow(p, k) * std::pow(1.0 - p, n - k);
}

}  // namespace

TransitionTable enumerate_exact_mdp(const Environment& env, const EnvState& deployment, std::size_t cap) {
  const SimConfig& cfg = env.config();
  if (cfg.channel_mode == ChannelMode::kAr1) {
    throw ConfigError("channel_mode: exact enumeration needs an i.i.d. channel (iid or quantized)");
  }
  const StateIndexer indexer(cfg);
  if (indexer.count() > cap) {
    throw ConfigError("exact MDP has " + std::to_string(indexer.count()) + " quantized states, above the cap of " +
                      std::to_string(cap));
  }
  const int num_states = static_cast<int>(indexer.count());
  const int num_actions = cfg.num_actions();
  const int num_devices = cfg.num_devices;
  const int capacity = cfg.queue_capacity;
  const double success = env.packet_success_probability();

  TransitionTable table(num_states, num_actions);
  std::vector<OutcomeMap> per_device(num_devices);
  std::vector<std::vector<std::pair<StateIndexer::DeviceTuple, DeviceOutcome>>> flat(num_devices);

  for (int s = 0; s < num_states; ++s) {
    const int next_waypoint = (indexer.waypoint(s) + 1) % cfg.num_waypoints;
    // Post-move pose; channels are filled in per bin below.
    EnvState pose = indexer.decode(s, env, deployment);
    pose.uav.waypoint = next_waypoint;
    env.waypoint_position(next_waypoint, pose.uav.x, pose.uav.y);

    std::vector<double> distance(num_devices);
    std::vector<std::vector<double>> bin_probs(num_devices);
    for (int j = 0; j < num_devices; ++j) {
      distance[j] = env.geometry(pose, j).distance;
      bin_probs[j] = env.bin_probabilities(distance[j]);
    }

    for (int a = 0; a < num_actions; ++a) {
      const Action action = Action::from_flat(a, cfg.num_velocities);
      const double p_arrival = env.arrival_probability(action.velocity_index);
      const int drain = env.idle_drain_levels(action.velocity_index);

      for (int j = 0; j < num_devices; ++j) {
        auto& map = per_device[j];
        map.clear();
        const auto& dev = pose.devices[j];
        for (int h = 0; h < static_cast<int>(bin_probs[j].size()); ++h) {
          const double p_bin = bin_probs[j][h];
          if (p_bin <= 0.0) continue;
          int queue_after = dev.queue;
          int battery_after = dev.battery;
          // (successes, probability) of the uplink; a single outcome when idle.
          std::vector<std::pair<int, double>> uplink{{0, 1.0}};
          int attempts = 0;
          int energy_fail = 0;
          if (j == action.device) {
            EnvState scheduled = pose;
            scheduled.devices[j].channel.gain_bin = h;
            scheduled.devices[j].channel.power_gain = env.bin_representative_gain(distance[j], h);
            const UplinkPlan plan = env.plan_uplink(scheduled, j, action.velocity_index);
            attempts = plan.attempts;
            energy_fail = plan.energy_failure ? 1 : 0;
            queue_after -= attempts + energy_fail;
            battery_after = plan.battery_after;
            uplink.clear();
            for (int k = 0; k <= attempts; ++k) uplink.emplace_back(k, binomial_pmf(attempts, k, success));
          } else {
            battery_after = std::max(0, battery_after - drain);
          }
          for (const auto& [successes, p_uplink] : uplink) {
            const double failed = attempts - successes + energy_fail;
            add_outcome(map, queue_after, battery_after, h, p_bin * p_uplink * (1.0 - p_arrival), failed);
            add_outcome(map, std::min(capacity, queue_after + 1), battery_after, h, p_bin * p_uplink * p_arrival,
                        failed + (queue_after == capacity ? 1.0 : 0.0));
          }
        }
        flat[j].clear();
        for (const auto& [key, o] : map) {
          flat[j].push_back({{std::get<0>(key), std::get<1>(key), std::get<2>(key)}, o});
        }
      }

      // Cartesian product over devices; device outcomes are independent.
      std::vector<Transition> row;
      std::vector<StateIndexer::DeviceTuple> tuples(num_devices);
      std::vector<std::size_t> cursor(num_devices, 0);
      while (true) {
        double p = 1.0;
        double c = 0.0;
        for (int j = 0; j < num_devices; ++j) {
          const auto& [tuple, o] = flat[j][cursor[j]];
          tuples[j] = tuple;
          p *= o.probability;
          c += o.cost;
        }
        row.push_back({indexer.compose(next_waypoint, tuples), p, c});
        int j = 0;
        while (j < num_devices && ++cursor[j] == flat[j].size()) cursor[j++] = 0;
        if (j == num_devices) break;
      }
      std::sort(row.begin(), row.end(), [](const Transition& x, const Transition& y) { return x.next_state < y.next_state; });
      table.append_row(std::move(row));
    }
  }
  return table;
}

std::vector<double> start_distribution(const Environment& env, const EnvState& deployment) {
  const SimConfig& cfg = env.config();
  const StateIndexer indexer(cfg);
  std::vector<double> dist(indexer.count(), 0.0);
  EnvState pose = indexer.decode(0, env, deployment);
  std::vector<std::vector<double>> bin_probs(cfg.num_devices);
  for (int j = 0; j < cfg.num_devices; ++j) bin_probs[j] = env.bin_probabilities(env.geometry(pose, j).distance);

  std::vector<StateIndexer::DeviceTuple> tuples(cfg.num_devices);
  std::vector<int> bins(cfg.num_devices, 0);
  while (true) {
    double p = 1.0;
    for (int j = 0; j < cfg.num_devices; ++j) {
      tuples[j] = {0, cfg.battery_levels / 2, bins[j]};
      p *= bin_probs[j][bins[j]];
    }
    dist[indexer.compose(0, tuples)] += p;
    int j = 0;
    while (j < cfg.num_devices && ++bins[j] == cfg.num_gain_bins) bins[j++] = 0;
    if (j == cfg.num_devices) break;
  }
  return dist;
}

std::vector<bool> reachable_states(const TransitionTable& table, const std::vector<double>& start) {
  std::vector<bool> seen(table.num_states(), false);
  std::deque<int> frontier;
  for (int s = 0; s < table.num_states(); ++s) {
    if (start[s] > 0.0) {
      seen[s] = true;
      frontier.push_back(s);
    }
  }
  while (!frontier.empty()) {
    const int s = frontier.front();
    frontier.pop_front();
    for (int a = 0; a < table.num_actions(); ++a) {
      for (const auto& t : table.row(s, a)) {
        if (t.probability > 0.0 && !seen[t.next_state]) {
          seen[t.next_state] = true;
          frontier.push_back(t.next_state);
        }
      }
    }
  }
  return seen;
}

}  // namespace uavsched
