#pragma once

// Closed-form signal, noise and sensitivity model of the double-pass
// nonlinear interferometer and of the direct-detection (IPDA/DIAL) baseline.
//
// SI units internally. Wavelengths are passed in micrometres, cross sections
// in m^2/molecule, number densities in molecules/m^3. Mixing ratios are plain
// fractions (1e-6 = 1 ppm).

#include <cmath>
#include <string>
#include <vector>

#include "nlint/constants.hpp"
#include "nlint/errors.hpp"
#include "nlint/spectra.hpp"

namespace nlint::physics {

using spectra::CrossSectionPair;

struct CrystalParams {
  double chi2 = 0.0;            // m/V
  double length = 0.0;          // m
  double omega_s = 0.0;         // rad/s
  double k_s = 0.0;             // rad/m
  double pump_intensity = 0.0;  // W/m^2
};

/// Nonlinear-interferometer sensor. Defaults are the reference scenario:
/// InGaAs photon counter, lab-scale gain, Lambertian target tens of metres away.
struct SensorConfig {
  double eta = 0.1;
  double gain = 1e-8;
  double alpha = 1e-8;
  double t_int = 1.0;          // s
  double p_idler = 0.02;       // W
  double lambda_signal = 1.589;  // um
  double lambda_idler = 3.221;   // um
};

/// Direct-detection differential absorption sensor.
struct DirectConfig {
  double eta = 0.1;
  double alpha = 1e-8;
  double t_int = 1.0;           // s
  double power = 0.02;          // W
  double lambda_probe = 1.589;  // um
};

struct PlumeState {
  double depth = 1.0;         // Z, m
  double mixing_ratio = 0.0;  // X_CH4
  double n_air = kDefaultAirDensity;
};

struct FirstPass {
  double signal;  // I_s1
  double idler;   // I_i1
};

/// Signal intensity per unit idler intensity generated in one pass, I_s = G I_i.
inline double spdc_gain(const CrystalParams& crystal) {
  const double coupling = PhysicalConstants::mu0 * PhysicalConstants::eps0 * crystal.chi2 *
                          crystal.omega_s * crystal.omega_s * crystal.length / (2.0 * crystal.k_s);
  return coupling * coupling * crystal.pump_intensity;
}

inline FirstPass first_pass(double gain, double idler_intensity) {
  return {gain * idler_intensity, idler_intensity * (1.0 + gain)};
}

/// Signal generated on the return pass after the idler has crossed the plume twice.
inline double second_pass(double gain, double idler_intensity, double alpha, double transmittance) {
  return gain * idler_intensity * alpha * transmittance * transmittance;
}

/// Interference of the first-pass (local oscillator) and second-pass signal fields.
/// `phase` is the relative phase phi_p - phi_i - phi_s.
inline double homodyne_intensity(double i_lo, double i_sig, double phase) {
  return i_lo + i_sig + 2.0 * std::sqrt(i_lo * i_sig) * std::cos(phase);
}

/// Fringe visibility for a second-pass to local-oscillator intensity ratio r.
inline double visibility_from_ratio(double r) {
  return 2.0 * std::sqrt(r) / (1.0 + r);
}

/// Inverse of visibility_from_ratio on the r <= 1 branch.
inline double ratio_from_visibility(double visibility) {
  if (!(visibility > 0.0) || visibility > 1.0) throw DomainError("visibility must be in (0, 1]");
  const double s = (1.0 - std::sqrt(1.0 - visibility * visibility)) / visibility;
  return s * s;
}

inline void check_transmittance(double transmittance) {
  if (!(transmittance >= 0.0 && transmittance <= 1.0))
    throw DomainError("transmittance must be in [0, 1], got " + std::to_string(transmittance));
}

/// Detected second-pass photons during T_int: eta G alpha T^2 T_int P_i / (hbar omega_s).
inline double mean_signal_photons(const SensorConfig& cfg, double transmittance) {
  check_transmittance(transmittance);
  return cfg.eta * cfg.gain * cfg.alpha * transmittance * transmittance * cfg.t_int * cfg.p_idler /
         photon_energy(cfg.lambda_signal);
}

/// Detected first-pass (local oscillator) photons during T_int.
inline double local_oscillator_photons(const SensorConfig& cfg) {
  return cfg.eta * cfg.gain * cfg.t_int * cfg.p_idler / photon_energy(cfg.lambda_signal);
}

/// Max-minus-min fringe counts from mean powers (W), R = 2 eta T_int sqrt(P_sig P_LO) / (hbar omega).
inline double fringe_signal(double eta, double t_int, double p_sig, double p_lo, double lambda_um) {
  return 2.0 * eta * t_int * std::sqrt(p_sig * p_lo) / photon_energy(lambda_um);
}

/// Shot-noise variance of the fringe signal, dominated by the local oscillator.
inline double fringe_variance(double eta, double t_int, double p_lo, double lambda_um) {
  return eta * t_int * p_lo / photon_energy(lambda_um);
}

/// SNR = R / sqrt(V) = 2 sqrt(<n_sig>).
inline double snr_without_detection(const SensorConfig& cfg, double transmittance) {
  const double n = mean_signal_photons(cfg, transmittance);
  if (!(n > 0.0)) throw DegenerateError("mean signal photon number is zero");
  return 2.0 * std::sqrt(n);
}

inline double mean_direct_photons(const DirectConfig& cfg, double transmittance) {
  check_transmittance(transmittance);
  return cfg.eta * cfg.alpha * transmittance * transmittance * cfg.t_int * cfg.power /
         photon_energy(cfg.lambda_probe);
}

inline double snr_direct(const DirectConfig& cfg, double transmittance) {
  const double n = mean_direct_photons(cfg, transmittance);
  if (!(n > 0.0)) throw DegenerateError("mean direct photon number is zero");
  return std::sqrt(n);
}

inline double optical_depth(const PlumeState& plume, double sigma) {
  if (sigma < 0.0) throw DomainError("cross section must be non-negative");
  return plume.depth * plume.mixing_ratio * plume.n_air * sigma;
}

/// Single-pass Beer-Lambert transmittance of the plume.
inline double transmittance(const PlumeState& plume, double sigma) {
  return std::exp(-optical_depth(plume, sigma));
}

/// DAOD from fringe amplitudes, which scale as T.
inline double daod_from_fringe_amplitudes(double r_on, double r_off) {
  if (!(r_on > 0.0) || !(r_off > 0.0)) throw DomainError("fringe amplitudes must be positive");
  return std::log(r_off / r_on);
}

/// DAOD from direct photon counts, which scale as T^2.
inline double daod_direct(double n_on, double n_off) {
  if (!(n_on > 0.0) || !(n_off > 0.0)) throw DomainError("photon counts must be positive");
  return 0.5 * std::log(n_off / n_on);
}

namespace detail {
inline double column_differential(double depth, double n_air, const CrossSectionPair& sigma) {
  if (!(depth > 0.0)) throw DomainError("plume depth must be positive");
  if (!(n_air > 0.0)) throw DomainError("n_air must be positive");
  const double dsigma = sigma.differential();
  if (dsigma == 0.0) throw DegenerateError("sigma_on equals sigma_off: zero differential cross section");
  if (dsigma < 0.0) throw DomainError("sigma_on must exceed sigma_off");
  return depth * n_air * dsigma;
}
}  // namespace detail

inline double mixing_ratio_from_daod(double daod, double depth, double n_air,
                                     const CrossSectionPair& sigma) {
  return daod / detail::column_differential(depth, n_air, sigma);
}

/// Gaussian error propagation of DAOD noise into the mixing ratio, given the
/// on/off SNRs: sqrt(SNR_on^-2 + SNR_off^-2) / (Z n_air dsigma).
inline double sensitivity_from_snr(double snr_on, double snr_off, double depth, double n_air,
                                   const CrossSectionPair& sigma) {
  if (!(snr_on > 0.0) || !(snr_off > 0.0)) throw DegenerateError("SNR must be positive");
  return std::sqrt(1.0 / (snr_on * snr_on) + 1.0 / (snr_off * snr_off)) /
         detail::column_differential(depth, n_air, sigma);
}

/// Minimum detectable mixing ratio of the nonlinear interferometer for T_on = T_off = 1.
inline double sensitivity_without_detection(const SensorConfig& cfg, double depth, double n_air,
                                            const CrossSectionPair& sigma) {
  const double column = detail::column_differential(depth, n_air, sigma);
  const double photon_rate = 2.0 * cfg.eta * cfg.gain * cfg.alpha * cfg.t_int * cfg.p_idler;
  if (!(photon_rate > 0.0)) throw DegenerateError("eta*G*alpha*T_int*P_i is zero");
  return std::sqrt(photon_energy(cfg.lambda_signal) / photon_rate) / column;
}

/// Minimum detectable mixing ratio of direct differential absorption for T_on = T_off = 1.
inline double sensitivity_direct(const DirectConfig& cfg, double depth, double n_air,
                                 const CrossSectionPair& sigma) {
  const double column = detail::column_differential(depth, n_air, sigma);
  const double photon_rate = 2.0 * cfg.eta * cfg.alpha * cfg.t_int * cfg.power;
  if (!(photon_rate > 0.0)) throw DegenerateError("eta*alpha*T_int*P is zero");
  return std::sqrt(photon_energy(cfg.lambda_probe) / photon_rate) / column;
}

/// Direct-detection sensitivity over interferometer sensitivity; above 1 the
/// interferometer wins.
inline double relative_sensitivity(const CrossSectionPair& mir, const CrossSectionPair& swir,
                                   double gain) {
  if (gain < 0.0) throw DomainError("gain must be non-negative");
  const double swir_diff = swir.differential();
  if (!(swir_diff > 0.0)) throw DegenerateError("SWIR differential cross section is zero");
  const double mir_diff = mir.differential();
  if (!(mir_diff > 0.0)) throw DegenerateError("MIR differential cross section is zero");
  return mir_diff / swir_diff * std::sqrt(gain);
}

/// Gain at which relative_sensitivity equals 1.
inline double crossover_gain(const CrossSectionPair& mir, const CrossSectionPair& swir) {
  const double ratio = swir.differential() / mir.differential();
  return ratio * ratio;
}

/// Signal wavelength from energy conservation, 1/l_s = 1/l_p - 1/l_i (um).
inline double signal_wavelength(double lambda_pump, double lambda_idler) {
  if (!(lambda_pump > 0.0)) throw DomainError("pump wavelength must be positive");
  if (!(lambda_pump < lambda_idler)) throw DomainError("pump wavelength must be below idler wavelength");
  return 1.0 / (1.0 / lambda_pump - 1.0 / lambda_idler);
}

/// Warnings for configurations outside the small-gain, weak-return regime the
/// model assumes. Empty when the regime holds.
inline std::vector<std::string> regime_warnings(const SensorConfig& cfg, double transmittance = 1.0) {
  std::vector<std::string> out;
  if (cfg.gain > 1e-2) {
    out.push_back("gain " + std::to_string(cfg.gain) +
                  " > 1e-2: higher-order parametric gain is not modelled");
  }
  if (cfg.alpha * transmittance * transmittance > 0.5) {
    out.push_back("alpha*T^2 = " + std::to_string(cfg.alpha * transmittance * transmittance) +
                  " > 0.5: local-oscillator approximation I_s1 >> I_s2 degrades");
  }
  return out;
}

}  // namespace nlint::physics
