#pragma once

#include <numbers>

namespace nlint {

/// CODATA 2018 values, SI units.
struct PhysicalConstants {
  static constexpr double hbar = 1.054571817e-34;  // J s
  static constexpr double c = 2.99792458e8;        // m/s
  static constexpr double mu0 = 1.25663706212e-6;  // N/A^2
  static constexpr double eps0 = 8.8541878128e-12; // F/m
};

/// Dry-air number density used throughout, molecules/m^3.
inline constexpr double kDefaultAirDensity = 2.53e25;

/// Angular frequency [rad/s] of light with vacuum wavelength given in micrometres.
constexpr double angular_frequency(double wavelength_um) {
  return 2.0 * std::numbers::pi * PhysicalConstants::c / (wavelength_um * 1e-6);
}

/// Photon energy hbar*omega [J] for a vacuum wavelength in micrometres.
constexpr double photon_energy(double wavelength_um) {
  return PhysicalConstants::hbar * angular_frequency(wavelength_um);
}

}  // namespace nlint
