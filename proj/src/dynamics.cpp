#include "spinres/dynamics.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "spinres/constants.hpp"
#include "spinres/errors.hpp"

namespace spinres::dynamics {

namespace {

struct CompensatedSum {
  double sum{0};
  double comp{0};
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + comp; }
};

struct PacketState {
  double detuning_mhz;
  double weight;
  double u, v, w;
};

std::complex<double> ensemble_signal(const std::vector<PacketState>& pk) {
  CompensatedSum re, im;
  for (const auto& p : pk) {
    re.add(p.weight * p.u);
    im.add(p.weight * p.v);
  }
  return {re.value(), im.value()};
}

void apply_pulse(std::vector<PacketState>& pk, Axis axis, double angle_rad) {
  const double c = std::cos(angle_rad);
  const double s = std::sin(angle_rad);
  for (auto& p : pk) {
    switch (axis) {
      case Axis::x: {
        const double v = p.v * c - p.w * s;
        const double w = p.v * s + p.w * c;
        p.v = v;
        p.w = w;
        break;
      }
      case Axis::y: {
        const double u = p.u * c + p.w * s;
        const double w = -p.u * s + p.w * c;
        p.u = u;
        p.w = w;
        break;
      }
    }
  }
}

// Free evolution by dt: precession at the packet detuning plus transverse
// damping.  Applied as one exact closed-form step.
void apply_evolution(std::vector<PacketState>& pk, double dt_us,
                     double t2_us) {
  const double damp = std::exp(-dt_us / t2_us);
  for (auto& p : pk) {
    const double phi = 2.0 * std::numbers::pi * p.detuning_mhz * dt_us;
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    const double u = (p.u * c - p.v * s) * damp;
    const double v = (p.u * s + p.v * c) * damp;
    p.u = u;
    p.v = v;
  }
}

// Signal a time dt after the current state without modifying it.
std::complex<double> peek_signal(const std::vector<PacketState>& pk,
                                 double dt_us, double t2_us) {
  const double damp = std::exp(-dt_us / t2_us);
  CompensatedSum re, im;
  for (const auto& p : pk) {
    const double phi = 2.0 * std::numbers::pi * p.detuning_mhz * dt_us;
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    re.add(p.weight * (p.u * c - p.v * s) * damp);
    im.add(p.weight * (p.u * s + p.v * c) * damp);
  }
  return {re.value(), im.value()};
}

}  // namespace

SequenceResult run_sequence(const ensemble::DiscretizedEnsemble& ens,
                            const PulseSequence& seq, const DecayParams& decay,
                            const RunOptions& opts) {
  if (ens.packets.empty()) {
    throw invalid_input_error("run_sequence: ensemble has no packets");
  }
  if (!(decay.t2_hom_ms > 0)) {
    throw invalid_input_error("run_sequence: T2 must be positive");
  }
  if (opts.samples_per_delay < 0) {
    throw invalid_input_error("run_sequence: samples_per_delay must be >= 0");
  }
  const double t2_us = decay.t2_hom_ms * 1000.0;

  std::vector<PacketState> pk;
  pk.reserve(ens.packets.size());
  for (const auto& p : ens.packets) {
    pk.push_back({p.detuning_mhz, p.weight, 0.0, 0.0, -1.0});
  }

  SequenceResult out;
  double clock = 0;
  for (const auto& ev : seq.events) {
    if (const auto* pulse = std::get_if<Pulse>(&ev)) {
      if (!std::isfinite(pulse->angle_rad)) {
        throw invalid_input_error("run_sequence: pulse angle must be finite");
      }
      if (pulse->duration_us < 0) {
        throw invalid_input_error("run_sequence: pulse duration must be >= 0");
      }
      apply_pulse(pk, pulse->axis, pulse->angle_rad);
      clock += pulse->duration_us;
    } else if (const auto* delay = std::get_if<Delay>(&ev)) {
      if (delay->duration_us < 0) {
        throw invalid_input_error("run_sequence: delay must be >= 0");
      }
      if (opts.samples_per_delay > 0 && delay->duration_us > 0) {
        const double dt = delay->duration_us / opts.samples_per_delay;
        for (int k = 1; k <= opts.samples_per_delay; ++k) {
          const auto sig = peek_signal(pk, dt * k, t2_us);
          out.series.push_back({clock + dt * k, sig.real(), sig.imag()});
        }
      }
      apply_evolution(pk, delay->duration_us, t2_us);
      clock += delay->duration_us;
    } else if (const auto* acq = std::get_if<Acquire>(&ev)) {
      const auto sig = ensemble_signal(pk);
      out.echoes.push_back({acq->tag, clock, std::abs(sig)});
    }
  }
  out.total_time_us = clock;
  return out;
}

PulseSequence hahn_sequence(double tau_us) {
  if (tau_us < 0) {
    throw invalid_input_error("hahn_sequence: tau must be >= 0");
  }
  PulseSequence seq;
  seq.events.push_back(Pulse{Axis::x, std::numbers::pi / 2, 0});
  seq.events.push_back(Delay{tau_us});
  seq.events.push_back(Pulse{Axis::y, std::numbers::pi, 0});
  seq.events.push_back(Delay{tau_us});
  seq.events.push_back(Acquire{"echo"});
  return seq;
}

std::vector<EchoRecord> cpmg(const ensemble::DiscretizedEnsemble& ens,
                             int n_pulses, double tau_us,
                             const DecayParams& decay, double flip_error) {
  if (n_pulses < 1) {
    throw invalid_input_error("cpmg: need at least one refocusing pulse");
  }
  if (!(tau_us > 0)) {
    throw invalid_input_error("cpmg: tau must be positive");
  }
  PulseSequence seq;
  seq.events.push_back(Pulse{Axis::x, std::numbers::pi / 2, 0});
  for (int k = 1; k <= n_pulses; ++k) {
    seq.events.push_back(Delay{tau_us});
    seq.events.push_back(
        Pulse{Axis::y, std::numbers::pi * (1.0 + flip_error), 0});
    seq.events.push_back(Delay{tau_us});
    seq.events.push_back(Acquire{"echo" + std::to_string(k)});
  }
  RunOptions opts;
  opts.samples_per_delay = 0;
  return run_sequence(ens, seq, decay, opts).echoes;
}

double dispersive_shift(const cavity::ResonatorParams& res,
                        const ensemble::DiscretizedEnsemble& ens,
                        const std::vector<double>& polarization) {
  if (ens.packets.empty()) {
    throw invalid_input_error("dispersive_shift: ensemble has no packets");
  }
  if (polarization.size() != ens.packets.size()) {
    throw invalid_input_error(
        "dispersive_shift: polarization size must match packet count");
  }
  const double g_sq = ens.g_coll_mhz * ens.g_coll_mhz;
  const double gamma_sq = ens.gamma_perp_mhz * ens.gamma_perp_mhz;
  CompensatedSum sum;
  for (std::size_t j = 0; j < ens.packets.size(); ++j) {
    const double p = polarization[j];
    if (!(p >= -1.0 - 1e-12 && p <= 1.0 + 1e-12)) {
      throw invalid_input_error(
          "dispersive_shift: polarization must lie in [-1, 1]");
    }
    const double d =
        res.omega_c_mhz - (ens.omega_a_mhz + ens.packets[j].detuning_mhz);
    if (std::abs(d) <= 1e-9) {
      throw precondition_error(
          "dispersive_shift: packet resonant with the cavity");
    }
    sum.add(p * g_sq * ens.packets[j].weight * d / (d * d + gamma_sq));
  }
  return sum.value();
}

std::vector<double> hole_burning_scan(const cavity::ResonatorParams& res,
                                      const ensemble::DiscretizedEnsemble& ens,
                                      double pulse_fwhm_mhz,
                                      const std::vector<double>& scan_mhz) {
  if (!(pulse_fwhm_mhz > 0)) {
    throw invalid_input_error("hole_burning_scan: pulse width must be > 0");
  }
  if (ens.packets.empty()) {
    throw invalid_input_error("hole_burning_scan: ensemble has no packets");
  }
  if (std::abs(ens.omega_a_mhz - res.omega_c_mhz) < 10.0 * ens.g_coll_mhz) {
    throw precondition_error(
        "hole_burning_scan: ensemble resonant with the cavity; the "
        "dispersive readout model is invalid (need |omega_a - omega_c| >= "
        "10 * g_coll)");
  }

  const std::vector<double> rest(ens.packets.size(), 1.0);
  const double shift0 = dispersive_shift(res, ens, rest);

  // Gaussian window with peak 1 and the given FWHM.
  const double inv_two_sig_sq =
      4.0 * std::numbers::ln2 / (pulse_fwhm_mhz * pulse_fwhm_mhz);

  std::vector<double> out;
  out.reserve(scan_mhz.size());
  std::vector<double> pol(ens.packets.size());
  for (const double ws : scan_mhz) {
    for (std::size_t j = 0; j < ens.packets.size(); ++j) {
      const double d = ens.omega_a_mhz + ens.packets[j].detuning_mhz - ws;
      pol[j] = 1.0 - std::exp(-d * d * inv_two_sig_sq);
    }
    out.push_back(dispersive_shift(res, ens, pol) - shift0);
  }
  return out;
}

namespace {

double schedule_temp(const std::vector<SchedulePoint>& sched, double t_min) {
  if (t_min <= sched.front().t_min) return sched.front().temp_k;
  for (std::size_t k = 0; k + 1 < sched.size(); ++k) {
    const auto& a = sched[k];
    const auto& b = sched[k + 1];
    if (t_min < b.t_min) {
      const double frac = (t_min - a.t_min) / (b.t_min - a.t_min);
      return a.temp_k + frac * (b.temp_k - a.temp_k);
    }
    // t_min >= b.t_min: move on; repeated times resolve right-continuously.
  }
  return sched.back().temp_k;
}

}  // namespace

T1Curve t1_repolarization(const atomkit::AtomSpec& atom, double b_gauss,
                          const std::vector<SchedulePoint>& schedule,
                          double t1_min, StretchForm form, double t_end_min,
                          int n_samples, const cavity::ResonatorParams& res,
                          const ensemble::DiscretizedEnsemble& ens,
                          const atomkit::LevelLabel& lower,
                          const atomkit::LevelLabel& upper) {
  if (schedule.empty()) {
    throw invalid_input_error("t1_repolarization: empty schedule");
  }
  for (std::size_t k = 0; k + 1 < schedule.size(); ++k) {
    if (schedule[k + 1].t_min < schedule[k].t_min) {
      throw invalid_input_error(
          "t1_repolarization: schedule times must be non-decreasing");
    }
  }
  for (const auto& p : schedule) {
    if (!(p.temp_k > 0)) {
      throw invalid_input_error(
          "t1_repolarization: temperatures must be positive");
    }
  }
  if (!(t1_min > 0)) {
    throw invalid_input_error("t1_repolarization: T1 must be positive");
  }
  if (n_samples < 2 || !(t_end_min > 0)) {
    throw invalid_input_error("t1_repolarization: need t_end > 0, >=2 samples");
  }

  const auto spectrum = atomkit::zeeman_spectrum(atom, b_gauss);
  const double readout_scale = dispersive_shift(
      res, ens, std::vector<double>(ens.packets.size(), 1.0));

  const auto equilibrium = [&](double temp_k) {
    return atomkit::thermal_populations(atom, b_gauss, temp_k);
  };
  const auto integrated = [&](double t) {
    return form == StretchForm::stretched_sqrt ? std::sqrt(t / t1_min)
                                               : t / t1_min;
  };

  std::vector<double> p = equilibrium(schedule_temp(schedule, 0.0));

  // Equilibrium readout at the final temperature, for the offset-free column.
  const auto p_final = equilibrium(schedule.back().temp_k);
  const double delta_omega_eq =
      (atomkit::population_of(spectrum, p_final, lower) -
       atomkit::population_of(spectrum, p_final, upper)) *
      readout_scale;

  T1Curve out;
  const auto record = [&](double t) {
    out.t_min.push_back(t);
    out.temp_k.push_back(schedule_temp(schedule, t));
    out.p_f1.push_back(
        atomkit::population_of_f(spectrum, p, atom.nuclear_spin - 0.5));
    const double pol = atomkit::population_of(spectrum, p, lower) -
                       atomkit::population_of(spectrum, p, upper);
    out.polarization.push_back(pol);
    const double dw = pol * readout_scale;
    out.delta_omega_mhz.push_back(dw);
    out.delta_omega_rel_mhz.push_back(std::abs(dw - delta_omega_eq));
  };

  record(0.0);
  const double dt = t_end_min / (n_samples - 1);
  constexpr int kSubsteps = 8;
  for (int k = 1; k < n_samples; ++k) {
    const double t0 = dt * (k - 1);
    for (int s = 0; s < kSubsteps; ++s) {
      const double a = t0 + dt * s / kSubsteps;
      const double b = t0 + dt * (s + 1) / kSubsteps;
      const auto target = equilibrium(schedule_temp(schedule, 0.5 * (a + b)));
      const double relax = std::exp(-(integrated(b) - integrated(a)));
      for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = target[i] + (p[i] - target[i]) * relax;
      }
    }
    record(dt * k);
  }
  return out;
}

}  // namespace spinres::dynamics
