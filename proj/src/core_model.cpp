#include "uavsched/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "uavsched/errors.hpp"

namespace uavsched {

namespace {

// Leading coefficient of the adaptive-modulation BER approximation.
constexpr double kBerCoefficient = 0.2;

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

}  // namespace

void FadingParams::validate() const {
  if (m < 1) throw ConfigError("nakagami_m must be an integer >= 1");
  if (!(pathloss_exp >= 0.0)) throw ConfigError("pathloss_exp must be >= 0");
  if (!(mean_gain_1m > 0.0)) throw ConfigError("mean_gain_1m must be > 0");
  if (!(noise_power > 0.0)) throw ConfigError("noise_power must be > 0");
  if (!(kappa1 > 0.0 && kappa1 <= 1.0)) throw ConfigError("kappa1 must lie in (0, 1]");
  if (!(kappa2 > 0.0)) throw ConfigError("kappa2 must be > 0");
}

LinkGeometry LinkGeometry::between(double ux, double uy, double altitude, double dx, double dy) {
  const double horizontal = std::hypot(ux - dx, uy - dy);
  LinkGeometry geom;
  geom.altitude = altitude;
  geom.distance = std::hypot(horizontal, altitude);
  geom.alignment = std::atan2(horizontal, altitude);
  return geom;
}

void LinkGeometry::validate() const {
  if (!(distance > 0.0)) throw ConfigError("geometry: distance must be > 0");
  if (!(altitude >= 0.0)) throw ConfigError("geometry: altitude must be >= 0");
  // Relative slack for geometries built from hypot(0, b).
  if (distance < altitude * (1.0 - 1e-12)) throw ConfigError("geometry: distance must be >= altitude");
  if (!(alignment >= 0.0 && alignment <= std::numbers::pi / 2 + 1e-12)) {
    throw ConfigError("geometry: alignment must lie in [0, pi/2]");
  }
}

double MptEfficiency::operator()(const LinkGeometry& geom) const {
  return eta0 * std::max(0.0, std::cos(geom.alignment)) * std::exp(-geom.distance / d_omega);
}

GainQuantizer::GainQuantizer(std::vector<double> thresholds_db) : thresholds_db_(std::move(thresholds_db)) {
  if (!std::is_sorted(thresholds_db_.begin(), thresholds_db_.end())) {
    throw ConfigError("gain_thresholds_db must be ascending");
  }
}

int GainQuantizer::bin(double power_gain) const {
  const double db = to_db(power_gain);
  return static_cast<int>(std::upper_bound(thresholds_db_.begin(), thresholds_db_.end(), db) -
                          thresholds_db_.begin());
}

double to_db(double linear) { return 10.0 * std::log10(linear); }
double from_db(double db) { return std::pow(10.0, db / 10.0); }

double mean_gain(const FadingParams& params, double distance) {
  return params.mean_gain_1m * std::pow(distance, -params.pathloss_exp);
}

ChannelDraw power_gain_from_variate(const LinkGeometry& geom, const FadingParams& params,
                                    const GainQuantizer& quantizer, double unit_variate) {
  geom.validate();
  ChannelDraw draw;
  draw.power_gain = mean_gain(params, geom.distance) * unit_variate;
  draw.gain_bin = quantizer.bin(draw.power_gain);
  return draw;
}

ChannelDraw sample_power_gain(const LinkGeometry& geom, const FadingParams& params,
                              const GainQuantizer& quantizer, Rng& rng) {
  geom.validate();
  params.validate();
  return power_gain_from_variate(geom, params, quantizer, rng.unit_gamma(params.m));
}

double upper_incomplete_gamma(int m, double x) {
  if (m < 1) throw UnsupportedConfiguration("incomplete gamma requires integer m >= 1");
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < m; ++k) {
    term *= x / k;
    sum += term;
  }
  return factorial(m - 1) * std::exp(-x) * sum;
}

double unit_gamma_cdf(int m, double x) {
  if (x <= 0.0) return 0.0;
  const double y = m * x;
  if (m == 1) return -std::expm1(-y);
  return std::clamp(1.0 - upper_incomplete_gamma(m, y) / factorial(m - 1), 0.0, 1.0);
}

double ber_nakagami(int phi, double snr_lo, double snr_hi, double mean_snr, const FadingParams& params) {
  if (params.m < 1) throw UnsupportedConfiguration("ber_nakagami requires integer m >= 1");
  if (phi < 1) throw ConfigError("phi must be >= 1");
  if (!(snr_lo >= 0.0 && snr_hi >= snr_lo)) throw ConfigError("require 0 <= snr_lo <= snr_hi");
  if (!(mean_snr > 0.0)) throw ConfigError("mean_snr must be > 0");

  const double m = params.m;
  const double b = m / mean_snr + 3.0 / (2.0 * (std::exp2(phi) - 1.0));
  const double scale = kBerCoefficient / factorial(params.m - 1) * std::pow(m / (mean_snr * b), m);
  const double diff = upper_incomplete_gamma(params.m, b * snr_lo) - upper_incomplete_gamma(params.m, b * snr_hi);
  return std::clamp(scale * diff, 0.0, 1.0);
}

double snr(double power_gain, double tx_power, const FadingParams& params) {
  return power_gain * tx_power / params.noise_power;
}

double required_tx_power(int phi, double power_gain, const FadingParams& params, double ber_target) {
  if (phi < 1) throw ConfigError("phi must be >= 1");
  if (!(power_gain > 0.0)) throw ConfigError("power_gain must be > 0");
  if (!(ber_target > 0.0)) throw ConfigError("ber_target must be > 0");
  if (ber_target > params.kappa1) throw ConfigError("ber_target must not exceed kappa1");
  const double snr_needed = std::log(params.kappa1 / ber_target) / params.kappa2 * (std::exp2(phi) - 1.0);
  return params.noise_power * snr_needed / power_gain;
}

double mpt_received_power(const LinkGeometry& geom, double power_gain, double uav_tx_power,
                          const MptEfficiency& efficiency) {
  if (!(uav_tx_power > 0.0)) throw ConfigError("uav_tx_power must be > 0");
  return efficiency(geom) * uav_tx_power * power_gain;
}

double contact_time(const LinkGeometry& geom, double velocity) {
  if (!(velocity > 0.0)) throw ConfigError("velocity must be > 0");
  if (geom.distance < geom.altitude) throw ConfigError("geometry: distance must be >= altitude");
  return 2.0 * std::sqrt(geom.distance * geom.distance - geom.altitude * geom.altitude) / velocity;
}

}  // namespace uavsched
