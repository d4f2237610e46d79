#pragma once

#include <vector>

#include "uavsched/rng.hpp"

// Physics layer: geometry, Nakagami-m fading, adaptive-modulation BER,
// required transmit power and microwave power transfer.
namespace uavsched {

struct FadingParams {
  int m = 1;                    // Nakagami shape, integer >= 1
  double mean_gain_1m = 1e-3;   // reference power gain at 1 m (linear)
  double pathloss_exp = 2.0;
  double noise_power = 1e-13;   // sigma_0^2 in watts (-100 dBm)
  double kappa1 = 0.2;
  double kappa2 = 1.5;

  void validate() const;

  bool operator==(const FadingParams&) const = default;
};

struct LinkGeometry {
  double distance = 0.0;   // 3-D UAV-device distance (m)
  double altitude = 0.0;   // UAV height above ground (m)
  double alignment = 0.0;  // angle between the vertical and the UAV-device line (rad)

  // Builds the geometry for a ground device at (dx, dy) and a UAV at (ux, uy, altitude).
  static LinkGeometry between(double ux, double uy, double altitude, double dx, double dy);

  void validate() const;
};

struct MptEfficiency {
  double eta0 = 0.6;       // peak efficiency
  double d_omega = 200.0;  // distance decay length (m)

  // omega(d, theta) = eta0 * max(0, cos theta) * exp(-d / d_omega)
  double operator()(const LinkGeometry& geom) const;

  bool operator==(const MptEfficiency&) const = default;
};

struct ChannelDraw {
  double power_gain = 0.0;
  int gain_bin = 0;

  bool operator==(const ChannelDraw&) const = default;
};

// Maps power gains to H bins using ascending dB thresholds (H-1 of them).
class GainQuantizer {
 public:
  GainQuantizer() = default;
  explicit GainQuantizer(std::vector<double> thresholds_db);

  int bin(double power_gain) const;
  int num_bins() const { return static_cast<int>(thresholds_db_.size()) + 1; }
  const std::vector<double>& thresholds_db() const { return thresholds_db_; }

 private:
  std::vector<double> thresholds_db_;
};

double to_db(double linear);
double from_db(double db);

// Mean power gain at the given distance: mean_gain_1m * d^-pathloss_exp.
double mean_gain(const FadingParams& params, double distance);

// Draws ||h||^2 = mean_gain(d) * G with G ~ Gamma(m, 1/m) (unit mean).
ChannelDraw sample_power_gain(const LinkGeometry& geom, const FadingParams& params,
                              const GainQuantizer& quantizer, Rng& rng);

// Same as sample_power_gain with the unit-mean variate supplied by the caller.
ChannelDraw power_gain_from_variate(const LinkGeometry& geom, const FadingParams& params,
                                    const GainQuantizer& quantizer, double unit_variate);

// Upper incomplete gamma Gamma(m, x) for integer m via the finite series
// (m-1)! e^-x sum_{k<m} x^k / k!.
double upper_incomplete_gamma(int m, double x);

// P(G <= x) for G ~ Gamma(m, 1/m), i.e. the CDF of a unit-mean fading variate.
double unit_gamma_cdf(int m, double x);

// Adaptive-modulation BER under Nakagami-m fading, between the switching
// SNRs snr_lo and snr_hi of order phi.
double ber_nakagami(int phi, double snr_lo, double snr_hi, double mean_snr, const FadingParams& params);

// Received SNR for a given transmit power.
double snr(double power_gain, double tx_power, const FadingParams& params);

// Transmit power meeting ber_target with 2^phi-point modulation:
// sigma_0^2 * ln(kappa1/eps) / kappa2 * (2^phi - 1) / ||h||^2.
double required_tx_power(int phi, double power_gain, const FadingParams& params, double ber_target);

// Power delivered to the device by MPT: omega(d, theta) * P_uav * ||h||^2.
double mpt_received_power(const LinkGeometry& geom, double power_gain, double uav_tx_power,
                          const MptEfficiency& efficiency);

// Time the device stays in contact with the UAV: 2 sqrt(d^2 - b^2) / v.
double contact_time(const LinkGeometry& geom, double velocity);

}  // namespace uavsched
