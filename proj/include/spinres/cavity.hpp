// cavity.hpp — Notch (hanger-coupled) resonator transmission model.
//
// Complex through-line transmission with background amplitude, global phase,
// cable delay and an impedance-mismatch rotation of the dip:
//
//   S21(f) = amp * exp(i*(alpha - 2*pi*f*tau))
//            * (1 - kappa_e * exp(i*psi) / (kappa_e + kappa_i + 2i*(f - f_c)))
//
// All frequencies and rates are cyclic (omega/2pi) in MHz; tau is in us.
#pragma once

#include <complex>
#include <functional>

namespace spinres::cavity {

struct ResonatorParams {
  double omega_c_mhz{3713.7};  // dip center
  double kappa_i_mhz{0.118};   // internal loss rate
  double kappa_e_mhz{0.163};   // external (coupling) rate
  double amp{1.0};             // off-resonant |S21| background
  double alpha_rad{0.0};       // global phase offset
  double tau_us{0.0};          // electrical delay (phase slope -2*pi*f*tau)
  double psi_rad{0.0};         // impedance-mismatch dip rotation
};

// Transmission at frequency f_mhz.  Throws invalid_input_error when rates are
// negative or the total linewidth vanishes.
std::complex<double> s21_bare(const ResonatorParams& res, double f_mhz);

// Scalar summary of a transmission dip.
//   f_min_mhz : frequency of minimum |S21|
//   depth     : fractional power dip, 1 - |S21(f_min)|^2 / background^2
//   fwhm_mhz  : full width at half depth of the |S21|^2 dip
// A flat trace (no resolvable dip) reports depth = 0 and fwhm = 0.
struct DipMetrics {
  double f_min_mhz{0};
  double depth{0};
  double fwhm_mhz{0};
};

// Metrics of an arbitrary transmission model on [f_lo, f_hi], evaluated on a
// uniform grid with parabolic refinement of the minimum and linear
// interpolation of the half-depth crossings.  The background level is taken
// from the scan edges.
DipMetrics dip_metrics(const std::function<std::complex<double>(double)>& s21,
                       double f_lo_mhz, double f_hi_mhz, int n_grid = 20001);

// Convenience overload: scans +-20 total linewidths around the dip.
DipMetrics dip_metrics(const ResonatorParams& res);

}  // namespace spinres::cavity
