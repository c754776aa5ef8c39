// dynamics.hpp — Time-domain simulation of the inhomogeneous ensemble under
// hard-pulse sequences (FID, Hahn echo, CPMG), dispersive-readout
// hole-burning scans, and longitudinal repolarization under a temperature
// schedule.
//
// Each spectral packet is a semiclassical Bloch vector (u, v, w) evolving
// under exact closed forms: pulses are instantaneous rotations (a stated
// duration advances the timeline but does not degrade the rotation), and free
// evolution is precession at the packet detuning with transverse damping
// e^{-t/T2_hom}.  The ensemble signal is sum_j weight_j * (u_j + i*v_j),
// reduced with compensated summation so results are reproducible bit-for-bit.
//
// The cavity is adiabatically eliminated during pulsed dynamics; the
// resonator enters only through the dispersive shift used for readout.
#pragma once

#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "spinres/atomkit.hpp"
#include "spinres/cavity.hpp"
#include "spinres/ensemble.hpp"

namespace spinres::dynamics {

enum class Axis { x, y };

struct Pulse {
  Axis axis{Axis::x};
  double angle_rad{0};
  double duration_us{0};  // timeline bookkeeping only (hard pulse)
};

struct Delay {
  double duration_us{0};
};

struct Acquire {
  std::string tag;
};

using Event = std::variant<Pulse, Delay, Acquire>;

struct PulseSequence {
  std::vector<Event> events;
};

enum class StretchForm { simple, stretched_sqrt };

struct DecayParams {
  // Homogeneous coherence time; relates to the homogeneous half linewidth by
  // T2_hom = 1/(2*pi*gamma_perp) with gamma_perp in MHz and T2 in us.
  double t2_hom_ms{std::numeric_limits<double>::infinity()};
  double t1_long_min{std::numeric_limits<double>::infinity()};
  StretchForm stretch{StretchForm::stretched_sqrt};
};

struct BlochPacket {
  double detuning_mhz{0};
  double weight{0};
  double u{0}, v{0}, w{-1};
};

struct TimePoint {
  double t_us{0};
  double re{0};
  double im{0};
};

struct EchoRecord {
  std::string tag;
  double t_us{0};
  double amplitude{0};
};

struct RunOptions {
  // Signal samples recorded per delay event (0 disables the time series).
  // The state itself always advances in one exact closed-form step per delay,
  // so the sampling density never affects echo amplitudes.
  int samples_per_delay{200};
};

struct SequenceResult {
  std::vector<TimePoint> series;
  std::vector<EchoRecord> echoes;
  double total_time_us{0};
};

// Packets start at (u, v, w) = (0, 0, -1).  Throws invalid_input_error for an
// empty ensemble, non-finite angles, negative durations, or T2 <= 0.
SequenceResult run_sequence(const ensemble::DiscretizedEnsemble& ens,
                            const PulseSequence& seq, const DecayParams& decay,
                            const RunOptions& opts = {});

// pi/2 about x — tau — pi about y — tau — acquire("echo").
PulseSequence hahn_sequence(double tau_us);

// pi/2 about x, then n_pulses pi-pulses about y at tau, 3*tau, 5*tau, ...
// with echoes acquired at 2*tau, 4*tau, ...; every pi-pulse angle is
// multiplied by (1 + flip_error).
std::vector<EchoRecord> cpmg(const ensemble::DiscretizedEnsemble& ens,
                             int n_pulses, double tau_us,
                             const DecayParams& decay, double flip_error = 0);

// Dispersive cavity pull from polarized packets:
//   delta_omega_c = sum_j p_j * g_coll^2 * w_j * D_j / (D_j^2 + gamma_perp^2)
// with D_j = omega_c - omega_j and p_j in [-1, 1] the packet polarization.
// Throws precondition_error if any packet is resonant with the cavity
// (|D_j| <= 1e-9 MHz).
double dispersive_shift(const cavity::ResonatorParams& res,
                        const ensemble::DiscretizedEnsemble& ens,
                        const std::vector<double>& polarization);

// Saturation spectroscopy: for each scan frequency, packet polarizations are
// reduced by a gaussian window of FWHM pulse_fwhm_mhz centered there
// (saturation drives polarization toward zero, never inverts), and the
// returned value is dispersive_shift(saturated) - dispersive_shift(rest).
// Requires the ensemble detuned from the cavity, |omega_a - omega_c| >=
// 10 * g_coll (precondition_error otherwise: the dispersive model is invalid
// on resonance).
std::vector<double> hole_burning_scan(const cavity::ResonatorParams& res,
                                      const ensemble::DiscretizedEnsemble& ens,
                                      double pulse_fwhm_mhz,
                                      const std::vector<double>& scan_mhz);

// Temperature schedule breakpoint; temperatures are interpolated linearly
// between breakpoints (constant before the first and after the last, and
// right-continuous across repeated times, so steps are expressible).
struct SchedulePoint {
  double t_min{0};
  double temp_k{0.05};
};

struct T1Curve {
  std::vector<double> t_min;
  std::vector<double> temp_k;
  std::vector<double> p_f1;             // population of the f = i - 1/2 manifold
  std::vector<double> polarization;     // p(lower) - p(upper) of the probed pair
  std::vector<double> delta_omega_mhz;  // polarization * dispersive readout scale
  // |delta_omega(t) - delta_omega_eq| where delta_omega_eq is the dispersive
  // shift in thermal equilibrium at the schedule's final temperature; decays
  // to zero, so it feeds fit_decay directly without an offset parameter.
  std::vector<double> delta_omega_rel_mhz;
};

// Populations of all Zeeman levels relax toward the instantaneous thermal
// distribution with a single collective memory kernel: the integrated decay
// between two instants is exp(-(S(b) - S(a))) with S(t) = sqrt(t/T1) for the
// stretched form and t/T1 for the simple form (t measured from the start of
// the schedule).  Populations start in equilibrium with the initial
// temperature.  The readout scale is dispersive_shift(res, ens, all-ones).
T1Curve t1_repolarization(const atomkit::AtomSpec& atom, double b_gauss,
                          const std::vector<SchedulePoint>& schedule,
                          double t1_min, StretchForm form, double t_end_min,
                          int n_samples, const cavity::ResonatorParams& res,
                          const ensemble::DiscretizedEnsemble& ens,
                          const atomkit::LevelLabel& lower = {1, 1},
                          const atomkit::LevelLabel& upper = {2, 2});

}  // namespace spinres::dynamics
