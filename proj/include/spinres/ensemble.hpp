// ensemble.hpp — Inhomogeneously broadened spin ensemble coupled to a notch
// resonator (Tavis-Cummings with a continuum of detuned packets).
//
// The ensemble enters the transmission through a sum over discrete spectral
// packets.  Per-packet coupling enters as g_coll^2 * weight, which preserves
// the collective sum rule  sum_j g_j^2 = g_coll^2  for any discretization.
//
//   S21(f) = amp * e^{i(alpha - 2*pi*f*tau)} *
//     [ 1 - (kappa_e/2) e^{i psi} /
//           ( kappa/2 + i(f - f_c) + sum_j g_coll^2 w_j / (gamma_perp + i(f - f_j)) ) ]
//
// With g_coll = 0 this reduces exactly to the bare notch model.
// All frequencies and rates are cyclic (omega/2pi) in MHz.
#pragma once

#include <complex>
#include <vector>

#include "spinres/atomkit.hpp"
#include "spinres/cavity.hpp"

namespace spinres::ensemble {

enum class LineShape { gaussian, lorentzian };

// Spectral density of spin frequencies.  For gaussian, sigma_mhz is the
// standard deviation (FWHM = 2*sqrt(2 ln 2)*sigma); for the lorentzian
// sensitivity option it is the half width at half maximum.
struct SpinDistribution {
  double omega_a_mhz{3713.7};  // ensemble center frequency
  double sigma_mhz{0.42};      // gaussian sigma / lorentzian HWHM
  LineShape shape{LineShape::gaussian};
  double amp_a{0};    // scan-normalization amplitude (fitting raw scans only)
  double offset_b{0};  // scan-normalization offset (fitting raw scans only)
};

// Gaussian FWHM <-> sigma conversions (factor 2*sqrt(2*ln 2)).
double gaussian_fwhm_from_sigma(double sigma);
double gaussian_sigma_from_fwhm(double fwhm);

struct EnsembleModel {
  SpinDistribution dist;
  double g_coll_mhz{0.95};      // collective coupling
  double gamma_perp_mhz{0.51};  // homogeneous (single-packet) half linewidth
};

struct Packet {
  double detuning_mhz{0};  // packet frequency minus ensemble center
  double weight{0};        // fraction of spins in this packet
};

struct DiscretizedEnsemble {
  double omega_a_mhz{0};
  double g_coll_mhz{0};
  double gamma_perp_mhz{0};
  std::vector<Packet> packets;  // equally spaced, symmetric, sum(weight) = 1
};

// Samples the distribution on an odd, symmetric grid spanning
// +-span_widths * sigma around the center.  n_packets must be odd and >= 1
// (odd keeps a packet exactly on the center); n_packets == 1 or sigma == 0
// collapses to a single packet.  span_widths must be >= 4 so tail truncation
// is negligible.
DiscretizedEnsemble discretize(const EnsembleModel& model, int n_packets = 2001,
                               double span_widths = 6.0);

// Coupled transmission at frequency f_mhz (formula above).
std::complex<double> s21_coupled(const cavity::ResonatorParams& res,
                                 const DiscretizedEnsemble& ens, double f_mhz);

// Ensemble-averaged decoherence rate seen by the cavity at the ensemble
// center:  Gamma = [ sum_j w_j * gamma_perp / (gamma_perp^2 + d_j^2) ]^-1.
// For gamma_perp == 0 the limit  Gamma = spacing / (pi * w_center)  is used
// (zero for a single packet).
double effective_linewidth(const DiscretizedEnsemble& ens);

// C = g^2 / (kappa * gamma_eff)
double cooperativity(double g_coll_mhz, double kappa_mhz, double gamma_eff_mhz);

// g_coll = g0 * sqrt(N)
double collective_coupling(double g0_mhz, double n_spins);

// N = (g_coll / g0)^2
double participating_spins(double g_coll_mhz, double g0_mhz);

// Cavity-enhanced single-spin relaxation rate at detuning delta from the
// cavity:  kappa * g0^2 / (delta^2 + (kappa/2)^2).
double purcell_rate(double g0_mhz, double kappa_mhz, double detuning_mhz);

// Statistical dipolar broadening of a dilute spin bath:
//   FWHM = 2.5325375 * density * pair_coupling   (density in cm^-3,
//   pair coupling in MHz*cm^3).  For unlike spin species the secular part of
//   the dipolar interaction is weaker by 2/3.
double dipolar_fwhm_mhz(double density_cm3, double pair_coupling_mhz_cm3,
                        bool unlike_spins = false);

// Two-dimensional |S21|^2 map versus magnetic field and probe frequency for a
// field-tuned hyperfine transition crossing the resonator.
struct CrossingMapConfig {
  double b_min_gauss{750};
  double b_max_gauss{810};
  int n_b{121};
  double f_min_mhz{3705};
  double f_max_mhz{3722};
  int n_f{401};
  atomkit::LevelLabel lower{1, 1};
  atomkit::LevelLabel upper{2, 2};
  int n_packets{2001};
  double span_widths{6.0};
};

struct CrossingMap {
  std::vector<double> b_gauss;      // size n_b
  std::vector<double> f_mhz;        // size n_f
  std::vector<double> omega_a_mhz;  // transition frequency per field row
  std::vector<double> s21_sq;       // row-major [n_b][n_f]
};

// The distribution center in `model` is ignored; each row is recentered on
// the hyperfine transition at that field.  Rows are computed independently
// into preallocated slots, so the result is identical for any n_threads >= 1.
CrossingMap avoided_crossing_map(const cavity::ResonatorParams& res,
                                 const EnsembleModel& model,
                                 const atomkit::AtomSpec& atom,
                                 const CrossingMapConfig& cfg,
                                 int n_threads = 1);

}  // namespace spinres::ensemble
