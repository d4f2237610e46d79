#include "uavsched/modulation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "uavsched/errors.hpp"

namespace uavsched {

namespace {

// ln(kappa1 / eps) / kappa2: the SNR margin per unit of (2^phi - 1).
double snr_factor(const ModulationProblem& p) { return std::log(p.kappa1 / p.ber_target) / p.kappa2; }

double harvest_power(const ModulationProblem& p) { return p.efficiency * p.uav_tx_power * p.power_gain; }

std::optional<int> lowest_feasible_order(const ModulationProblem& p) {
  // airtime decreases with phi, so feasibility is upward-closed.
  for (int phi = 1; phi <= p.max_order; ++phi) {
    if (p.feasible(phi)) return phi;
  }
  return std::nullopt;
}

}  // namespace

void ModulationProblem::validate() const {
  if (max_order < 1) throw ConfigError("max_order must be >= 1");
  if (!(contact_time >= 0.0)) throw ConfigError("contact_time must be >= 0");
  if (!(bits_per_packet > 0.0)) throw ConfigError("bits_per_packet must be > 0");
  if (!(bandwidth > 0.0)) throw ConfigError("bandwidth must be > 0");
  if (!(power_gain > 0.0)) throw ConfigError("power_gain must be > 0");
  if (!(uav_tx_power > 0.0)) throw ConfigError("uav_tx_power must be > 0");
  if (!(efficiency >= 0.0)) throw ConfigError("efficiency must be >= 0");
  if (!(ber_target > 0.0 && ber_target <= kappa1)) throw ConfigError("ber_target must lie in (0, kappa1]");
  if (!(kappa2 > 0.0)) throw ConfigError("kappa2 must be > 0");
  if (!(noise_power > 0.0)) throw ConfigError("noise_power must be > 0");
}

double net_energy(const ModulationProblem& p, int phi) {
  const double harvest = (p.contact_time - p.airtime(phi)) * harvest_power(p);
  const double uplink_power = p.noise_power * snr_factor(p) / p.power_gain * (std::exp2(phi) - 1.0);
  return harvest - p.airtime(phi) * uplink_power;
}

double foc_residual(const ModulationProblem& p, double phi) {
  const double pow2 = std::exp2(phi);
  const double lhs = phi * pow2 * std::numbers::ln2 - pow2;
  const double rhs = p.airtime(1.0) * harvest_power(p) * (p.power_gain * p.bandwidth) /
                         (p.bits_per_packet * snr_factor(p) * p.noise_power) -
                     1.0;
  return lhs - rhs;
}

double bisection_fixed_point(const ModulationProblem& p, const BisectionSettings& settings) {
  double lo = 1.0;
  double hi = static_cast<double>(p.max_order);
  double mid = lo;
  for (int iter = 0; iter < settings.max_iterations; ++iter) {
    mid = 0.5 * (lo + hi);
    const double f_mid = foc_residual(p, mid);
    if (hi - lo < settings.interval_tol || std::abs(f_mid) < settings.residual_tol) break;
    if (f_mid > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return mid;
}

std::optional<int> optimal_modulation(const ModulationProblem& p, const BisectionSettings& settings) {
  p.validate();
  const auto lowest = lowest_feasible_order(p);
  if (!lowest) return std::nullopt;

  const double fixed_point = bisection_fixed_point(p, settings);
  const int below = std::clamp(static_cast<int>(std::floor(fixed_point)), *lowest, p.max_order);
  const int above = std::clamp(static_cast<int>(std::ceil(fixed_point)), *lowest, p.max_order);
  return net_energy(p, above) > net_energy(p, below) ? above : below;
}

std::optional<int> brute_force_modulation(const ModulationProblem& p) {
  p.validate();
  std::optional<int> best;
  double best_value = 0.0;
  for (int phi = 1; phi <= p.max_order; ++phi) {
    if (!p.feasible(phi)) continue;
    const double value = net_energy(p, phi);
    if (!best || value > best_value) {
      best = phi;
      best_value = value;
    }
  }
  return best;
}

}  // namespace uavsched
