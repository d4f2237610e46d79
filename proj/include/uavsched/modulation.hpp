#pragma once

#include <optional>

// Choice of the uplink modulation order that maximizes the energy a device
// nets during one contact window: harvest while the UAV charges it, minus the
// energy spent uploading a packet at the BER target.
namespace uavsched {

struct ModulationProblem {
  double contact_time = 0.0;     // T-hat (s)
  double bits_per_packet = 0.0;  // B
  double bandwidth = 0.0;        // W (Hz)
  double power_gain = 0.0;       // ||h||^2
  double uav_tx_power = 0.0;     // W
  double efficiency = 0.0;       // omega(d, theta)
  double ber_target = 0.0;
  double kappa1 = 0.2;
  double kappa2 = 1.5;
  double noise_power = 1.0;  // sigma_0^2; 1 means power_gain is already noise-normalized
  int max_order = 8;         // Phi

  void validate() const;

  // Uplink airtime B / (phi W).
  double airtime(double phi) const { return bits_per_packet / (phi * bandwidth); }
  bool feasible(int phi) const { return airtime(phi) <= contact_time; }
};

struct BisectionSettings {
  double interval_tol = 1e-6;
  double residual_tol = 1e-9;
  int max_iterations = 60;
};

// (T - B/(phi W)) * omega P ||h||^2 - B sigma^2 ln(k1/eps) / (k2 ||h||^2 phi W) * (2^phi - 1).
// Negative when uploading costs more than the window harvests.
double net_energy(const ModulationProblem& problem, int phi);

// First-order balance phi 2^phi ln2 - 2^phi - RHS; strictly increasing in phi,
// zero at the stationary point of net_energy over real phi.
double foc_residual(const ModulationProblem& problem, double phi);

// Fixed point of the bisection of foc_residual over [1, max_order].
double bisection_fixed_point(const ModulationProblem& problem, const BisectionSettings& settings = {});

// Bisection, then the better of the two integers around the fixed point among
// feasible orders (ties to the smaller order). nullopt when no order fits the window.
std::optional<int> optimal_modulation(const ModulationProblem& problem, const BisectionSettings& settings = {});

// Exhaustive argmax of net_energy over feasible orders, ties to the smaller order.
std::optional<int> brute_force_modulation(const ModulationProblem& problem);

}  // namespace uavsched
