// fitkit.hpp — In-house damped least-squares (Levenberg-Marquardt) engine
// over real- or complex-valued residuals, plus the toolkit's fit models:
// bare notch resonator, coupled Rabi spectrum, gaussian scan, and
// exponential / stretched-exponential decays.
//
// Conventions:
//  - Complex traces fit both quadratures jointly (residuals split re/im).
//  - Magnitude-only traces fit |S21|^2 with the unidentifiable phase
//    parameters (alpha, tau) auto-fixed to 0.
//  - The numerical Jacobian uses central differences with a per-parameter
//    relative step of 1e-6 (one-sided at an active bound so models are never
//    evaluated outside their validity region).
//  - Damping: lambda starts at 1e-3; each iteration first tries lambda/10,
//    falling back to lambda and then growing x10 until a step is accepted.
//  - Termination: relative cost change < 1e-12, gradient norm < 1e-10, or
//    500 iterations.  Bounds are enforced by projection.
//  - Covariance = (J^T J)^-1 * chi^2 / (m - p) at the optimum.
#pragma once

#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "spinres/cavity.hpp"
#include "spinres/ensemble.hpp"

namespace spinres::fitkit {

struct Param {
  std::string name;
  double value{0};
  double lo{-std::numeric_limits<double>::infinity()};
  double hi{std::numeric_limits<double>::infinity()};
  bool fixed{false};
};

// Evaluates the model over the whole x grid at once (so per-evaluation setup
// like ensemble discretization is hoisted out of the inner loop).  For
// real-valued models only the real part of y_out is used.
using ModelFn = std::function<void(const std::vector<double>& x,
                                   const std::vector<double>& theta,
                                   std::vector<std::complex<double>>& y_out)>;

struct FitProblem {
  ModelFn model;
  std::vector<double> x;
  std::vector<std::complex<double>> y;
  bool complex_data{true};
  std::vector<double> weights;  // empty, or one non-negative weight per point
  std::vector<Param> params;    // full parameter set; `fixed` freezes entries
};

struct FitResult {
  std::vector<Param> params;       // final values (same order as the problem)
  std::vector<std::string> free_names;
  std::vector<double> covariance;  // row-major n_free x n_free
  double residual_norm{0};         // sqrt(sum_i w_i |r_i|^2) at the optimum
  int iterations{0};
  bool converged{false};
  bool condition_warning{false};
  std::vector<double> cost_history;  // accepted costs (non-increasing)

  double value(const std::string& name) const;
  // One-sigma uncertainty from the covariance diagonal (0 for fixed params).
  double uncertainty(const std::string& name) const;
};

// Core solver.  Throws invalid_input_error for structurally bad problems
// (no free parameters, too little data, initial values out of bounds, or a
// non-finite model at the starting point).
FitResult levenberg_marquardt(const FitProblem& problem);

// A measured or synthetic trace.  For complex_data == false, y holds the
// magnitude in its real part.
struct Trace {
  std::vector<double> x;
  std::vector<std::complex<double>> y;
  bool complex_data{true};
};

// Gaussian noise, same std per quadrature, std = rms(|y|) * 10^(-snr_db/20).
// Deterministic for a fixed seed.
Trace add_noise(const Trace& clean, double snr_db, unsigned long long seed);

// Bare-notch fit with automatic initial guesses (omega_c from the |y|
// minimum, kappa from the half-depth width, tau from the edge phase slope,
// amp from the edges).  Requires the trace to span >= 5 linewidths; throws
// no_solution_error when no dip is visible above the noise floor.
FitResult fit_resonator(const Trace& trace);

// Coupled-spectrum fit with all resonator parameters fixed; free parameters
// are g_coll, gamma_perp, sigma, and omega_a.  Initial guesses locate the two
// deepest dips; pass `guess` to override.
struct RabiGuess {
  double g_coll_mhz{0};
  double gamma_perp_mhz{0};
  double sigma_mhz{0};
  double omega_a_mhz{0};
};
FitResult fit_rabi(const Trace& trace, const cavity::ResonatorParams& fixed,
                   int n_packets = 2001,
                   const std::optional<RabiGuess>& guess = std::nullopt);

// Fits b - a*exp(-(x - omega_a)^2 / (2 sigma^2)); free a, b, omega_a, sigma.
FitResult fit_gaussian_scan(const std::vector<double>& x,
                            const std::vector<double>& y);

enum class DecayForm { exp, stretched_sqrt, hahn_2tau };

// Fits a0*e^{-t/T}, a0*e^{-sqrt(t/T)}, or a0*e^{-2t/T}.  Amplitudes must be
// positive.  A fit pinned at the upper T bound reports converged = false;
// a rising trend (positive correlation of y with t) sets condition_warning.
FitResult fit_decay(const std::vector<double>& t, const std::vector<double>& y,
                    DecayForm form);

}  // namespace spinres::fitkit
