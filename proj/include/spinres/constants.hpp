// constants.hpp — Physical constants and material parameters used across spinres.
//
// Unit conventions (used library-wide):
//   * every rate / frequency / linewidth is the cyclic value omega/2pi, in MHz
//   * magnetic fields in gauss, temperatures in kelvin, times in microseconds
//     unless a field name says otherwise (ms / min suffixes)
#pragma once

#include <string_view>

namespace spinres {

// Version tag for this table; emitted into output sidecars so results can be
// traced to the constants they were computed with.
inline constexpr std::string_view kConstantsVersion = "spinres-constants-1";

namespace constants {

// --- exact SI defining constants ---------------------------------------
inline constexpr double kPlanckJs       = 6.62607015e-34;   // J s
inline constexpr double kBoltzmannJperK = 1.380649e-23;     // J/K
inline constexpr double kSpeedOfLightMps = 2.99792458e8;    // m/s

// --- measured SI constants (CODATA 2018) --------------------------------
inline constexpr double kBohrMagnetonJperT    = 9.2740100783e-24;  // J/T
inline constexpr double kNuclearMagnetonJperT = 5.0507837461e-27;  // J/T
inline constexpr double kElectronGyroRadPerST = 1.76085963023e11;  // rad/s/T
inline constexpr double kClassicalElectronRadiusM = 2.8179403262e-15;  // m
inline constexpr double kMu0Over4Pi = 1.0e-7;                      // T^2 m^3 / J

// --- derived conversion factors -----------------------------------------
// Bohr magneton as a cyclic frequency per field: (mu_B/h) in MHz/gauss.
inline constexpr double kMuBMHzPerGauss = 1.3996244936;
// Temperature equivalent of one MHz of level splitting: h*(1 MHz)/k_B in K.
inline constexpr double kKelvinPerMHz = 4.7992430733662e-5;

// --- sodium ground state (3s, J = 1/2) -----------------------------------
inline constexpr double kNaNuclearSpin = 1.5;
inline constexpr double kNaHyperfineAMHz = 885.81306440;  // magnetic dipole constant
inline constexpr double kNaGJ = 2.00229600;               // fine-structure Lande factor
inline constexpr double kNaGI = -0.00080461080;           // nuclear factor, mu_B units

// --- neon host ------------------------------------------------------------
inline constexpr double kSolidNeonDensityCm3 = 4.497e22;  // lattice sites per cm^3
inline constexpr double kNe21Abundance = 0.0027;          // isotopic fraction
inline constexpr double kNe21MomentMuN = 0.661797;        // |magnetic moment|, mu_N
inline constexpr double kNe21Spin = 1.5;

// 21Ne gyromagnetic ratio |mu|/(I*hbar): kNe21MomentMuN*mu_N/(1.5*hbar), rad/s/T.
inline constexpr double kNe21GyroRadPerST = 2.1128e7;

// --- dipolar broadening ----------------------------------------------------
// Statistical (dilute, randomly placed dipoles) full width prefactor:
// FWHM = kDipolarStatPrefactor * n * C_pair, with C_pair = (mu0/4pi)*g1*g2*hbar
// expressed as a cyclic frequency times volume.  Numerically 4*pi^2/(9*sqrt(3)).
inline constexpr double kDipolarStatPrefactor = 2.5325375;
// Secular weighting for unlike spin pairs (flip-flop term suppressed).
inline constexpr double kUnlikeSpinSecularFactor = 2.0 / 3.0;

// Pair coupling constants (mu0/4pi)*g1*g2*hbar/(2pi) in MHz cm^3
// (numerically equal to Hz m^3).
inline constexpr double kDipoleCouplingElectronElectron = 5.2038e-20;
inline constexpr double kDipoleCouplingElectronNe21     = 6.2430e-24;

// --- optics -----------------------------------------------------------------
// Integrated classical absorption cross-section per unit oscillator strength:
// integral of sigma(nu) d(nu) = pi * r_e * c * f   [m^2 Hz]
inline constexpr double kIntegratedCrossSectionM2Hz = 2.6540085e-6;

}  // namespace constants
}  // namespace spinres
