// Acceptance suite: one [PASS]/[FAIL] line per criterion, exit code equals
// the number of failed criteria.  Tolerances are stated inline next to each
// check.  Reference comparisons that are known to disagree with the fixture
// inputs are printed as [flagged] info lines and never asserted.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#ifndef _WIN32
#include <unistd.h>
#endif

#include "spinres/atomkit.hpp"
#include "spinres/cavity.hpp"
#include "spinres/constants.hpp"
#include "spinres/dynamics.hpp"
#include "spinres/ensemble.hpp"
#include "spinres/errors.hpp"
#include "spinres/fitkit.hpp"
#include "spinres/fixtures.hpp"
#include "spinres/io.hpp"
#include "spinres/optics.hpp"

namespace ak = spinres::atomkit;
namespace cv = spinres::cavity;
namespace dn = spinres::dynamics;
namespace en = spinres::ensemble;
namespace fk = spinres::fitkit;
namespace fx = spinres::fixtures;
namespace io = spinres::io;
namespace fs = std::filesystem;

namespace {

struct Checker {
  bool ok{true};
  std::vector<std::string> notes;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      notes.push_back("unmet: " + what);
    }
  }
  void info(const std::string& what) { notes.push_back(what); }
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------------------

void criterion_1(Checker& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto atom = ak::sodium();
  const auto spec = ak::zeeman_spectrum(atom, 0.0);
  const double splitting =
      spec.levels.back().energy_mhz - spec.levels.front().energy_mhz;
  const auto t1 = std::chrono::steady_clock::now();
  const double elapsed_s = std::chrono::duration<double>(t1 - t0).count();
  c.info("zero-field splitting " + fmt("%.8f", splitting) + " MHz, computed in " +
         fmt("%.4f", elapsed_s) + " s");
  c.require(std::abs(splitting - 1771.626) < 1e-3,
            "splitting within 1 kHz of 1771.626 MHz");
  c.require(elapsed_s < 1.0, "computed in under 1 second");
}

void criterion_2(Checker& c) {
  const ak::LevelLabel lower{1, 1}, upper{2, 2};
  const double b_up =
      ak::field_for_transition(ak::sodium(1.016), lower, upper, 3713.7);
  const double b_down =
      ak::field_for_transition(ak::sodium(0.984), lower, upper, 3713.7);
  const double b_free =
      ak::field_for_transition(ak::sodium(1.0), lower, upper, 3713.7);
  c.info("field for 3713.7 MHz: a_scale 1.016 -> " + fmt("%.3f", b_up) +
         " G, 1.000 -> " + fmt("%.3f", b_free) + " G, 0.984 -> " +
         fmt("%.3f", b_down) + " G");
  c.info("a 1.6% hyperfine-scale shift with the opposite sign (0.984) moves "
         "the crossing away from the working field; the +1.6% scale is the "
         "one consistent with the 776.95 G anchor");
  c.require(std::abs(b_up - 776.95) < 2.0,
            "field at a_scale 1.016 within 2 G of 776.95 G");
  // Transition frequency at the returned field closes the loop.
  const double f_back =
      ak::transition_frequency(ak::sodium(1.016), b_up, lower, upper);
  c.require(std::abs(f_back - 3713.7) < 1e-3,
            "returned field reproduces the target frequency to 1 kHz");
}

void criterion_3(Checker& c) {
  const auto atom = ak::sodium();

  // Sub-check A: exact Boltzmann oracle at zero field.
  const auto spec0 = ak::zeeman_spectrum(atom, 0.0);
  const auto p0 = ak::thermal_populations(atom, 0.0, 0.050);
  const double p_f1 = ak::population_of_f(spec0, p0, 1.0);
  const double beta = spinres::constants::kKelvinPerMHz / 0.050;
  const double oracle =
      3.0 / (3.0 + 5.0 * std::exp(-2.0 * atom.a_hfs_mhz * beta));
  c.info("p(F=1) at 0 G, 50 mK: " + fmt("%.9f", p_f1) + " (oracle " +
         fmt("%.9f", oracle) + ")");
  c.require(std::abs(p_f1 - oracle) < 1e-6, "p(F=1) matches oracle to 1e-6");
  c.require(p_f1 > 0.70, "p(F=1) exceeds 0.70 at 50 mK");

  // Sub-checks B-D: carried reference points at the working field.  The
  // exact 8-level Boltzmann distribution disagrees with them; computed
  // values are printed and the checks are left to fail honestly.
  const auto a16 = ak::sodium(1.016);
  const auto spec = ak::zeeman_spectrum(a16, 776.95);
  const auto p50 = ak::thermal_populations(a16, 776.95, 0.050);
  const auto p500 = ak::thermal_populations(a16, 776.95, 0.500);
  const double p11 = ak::population_of(spec, p50, {1, 1});
  const double pf1_50 = ak::population_of_f(spec, p50, 1.0);
  const double pf1_500 = ak::population_of_f(spec, p500, 1.0);
  c.info("at 776.95 G: p(|1,1>) 50 mK = " + fmt("%.6f", p11) +
         " (reference 0.34 +/- 0.03)");
  c.info("at 776.95 G: p(F=1) 50 mK = " + fmt("%.6f", pf1_50) +
         " (reference 0.92 +/- 0.02)");
  c.info("at 776.95 G: p(F=1) 500 mK = " + fmt("%.6f", pf1_500) +
         " (reference 0.58 +/- 0.03)");
  c.info("the three reference points are mutually inconsistent with the "
         "exact Boltzmann distribution over the 8 levels; computed values "
         "above are the model's answer");
  c.require(std::abs(p11 - 0.34) <= 0.03, "p(|1,1>) = 0.34 +/- 0.03");
  c.require(std::abs(pf1_50 - 0.92) <= 0.02, "p(F=1) = 0.92 +/- 0.02 at 50 mK");
  c.require(std::abs(pf1_500 - 0.58) <= 0.03,
            "p(F=1) = 0.58 +/- 0.03 at 500 mK");
}

void criterion_4(Checker& c) {
  const auto fxr = fx::asgrown();
  auto model = fxr.ensemble;
  model.g_coll_mhz = 0.0;
  const auto d = en::discretize(model, 2001, 6.0);
  const double kappa = fxr.resonator.kappa_i_mhz + fxr.resonator.kappa_e_mhz;
  double worst = 0;
  for (int i = 0; i <= 2000; ++i) {
    const double f =
        fxr.resonator.omega_c_mhz + (i / 2000.0 - 0.5) * 40.0 * kappa;
    const auto a = en::s21_coupled(fxr.resonator, d, f);
    const auto b = cv::s21_bare(fxr.resonator, f);
    worst = std::max(worst, std::abs(a - b) / std::abs(b));
  }
  c.info("max |coupled(g=0) - bare| / |bare| over +/-20 linewidths: " +
         fmt("%.3e", worst));
  c.require(worst < 1e-12, "reduction to the bare model below 1e-12");
}

void criterion_5(Checker& c) {
  const auto fxr = fx::asgrown();
  const auto d = en::discretize(fxr.ensemble, 2001, 6.0);

  fk::Trace clean;
  const double f0 = fxr.resonator.omega_c_mhz;
  for (int i = 0; i < 801; ++i) {
    const double f = f0 - 8.0 + 16.0 * i / 800.0;
    clean.x.push_back(f);
    clean.y.push_back(en::s21_coupled(fxr.resonator, d, f));
  }
  const auto noisy = fk::add_noise(clean, 60.0, 20260816);
  const auto fit = fk::fit_rabi(noisy, fxr.resonator, 2001);
  c.info("fit g_coll = " + fmt("%.6f", fit.value("g_coll")) + " MHz (true " +
         fmt("%.3f", fxr.ensemble.g_coll_mhz) + ")");
  c.require(fit.converged, "coupled fit converged");
  c.require(rel(fit.value("g_coll"), fxr.ensemble.g_coll_mhz) < 0.01,
            "g_coll recovered within 1%");

  // Dip separation vs 2 g on the clean spectrum.
  std::vector<double> minima;
  for (std::size_t i = 1; i + 1 < clean.x.size(); ++i) {
    const double m0 = std::abs(clean.y[i - 1]);
    const double m1 = std::abs(clean.y[i]);
    const double m2 = std::abs(clean.y[i + 1]);
    if (m1 < m0 && m1 < m2) minima.push_back(clean.x[i]);
  }
  if (minima.size() == 2) {
    const double sep = minima[1] - minima[0];
    c.info("dip separation " + fmt("%.4f", sep) + " MHz vs 2 g = " +
           fmt("%.3f", 2 * fxr.ensemble.g_coll_mhz) + " MHz (" +
           fmt("%+.1f", 100.0 * (sep / (2 * fxr.ensemble.g_coll_mhz) - 1)) +
           "%)");
    c.require(rel(sep, 2 * fxr.ensemble.g_coll_mhz) < 0.10,
              "dip separation within 10% of 2 g");
  } else {
    c.require(false, "two polariton dips resolved");
  }
}

void criterion_6(Checker& c) {
  // Limit 1: sigma -> 0.
  en::EnsembleModel homo;
  homo.dist.sigma_mhz = 0.0;
  homo.gamma_perp_mhz = 0.51;
  const double g1 = en::effective_linewidth(en::discretize(homo, 2001, 6.0));
  c.info("Gamma(sigma -> 0) = " + fmt("%.12f", g1) + " MHz vs gamma_perp 0.51");
  c.require(std::abs(g1 - 0.51) < 1e-9, "homogeneous limit exact to 1e-9");

  // Limit 2: gamma_perp -> 0.
  en::EnsembleModel inhomo;
  inhomo.dist.sigma_mhz = 0.42;
  inhomo.gamma_perp_mhz = 0.0;
  const double g2 = en::effective_linewidth(en::discretize(inhomo, 2001, 6.0));
  const double expect = 0.42 * std::sqrt(2.0 / std::numbers::pi);
  c.info("Gamma(gamma_perp -> 0) = " + fmt("%.6f", g2) + " MHz vs sigma*sqrt(2/pi) = " +
         fmt("%.6f", expect));
  c.require(rel(g2, expect) < 0.01, "doppler-like limit within 1%");

  // Mixed case against a fine quadrature oracle.
  const auto fxr = fx::asgrown();
  const double gm = en::effective_linewidth(en::discretize(fxr.ensemble, 2001, 6.0));
  const double sigma = fxr.ensemble.dist.sigma_mhz;
  const double gamma = fxr.ensemble.gamma_perp_mhz;
  const int n = 400001;
  const double lo = -12.0 * sigma, h = 24.0 * sigma / (n - 1);
  double s = 0;
  for (int i = 0; i < n; ++i) {
    const double d0 = lo + i * h;
    const double rho = std::exp(-d0 * d0 / (2 * sigma * sigma)) /
                       (sigma * std::sqrt(2 * std::numbers::pi));
    const double val = rho * gamma / (gamma * gamma + d0 * d0);
    s += val * ((i == 0 || i == n - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0));
  }
  const double oracle = 1.0 / (s * h / 3.0);
  c.info("Gamma(mixed) = " + fmt("%.6f", gm) + " MHz vs quadrature " +
         fmt("%.6f", oracle) + " (targets 0.716)");
  c.require(rel(gm, oracle) < 1e-4, "mixed case matches quadrature to 0.01%");
}

void criterion_7(Checker& c) {
  const auto decay_fx = fx::decay_fixture();

  // Perfect refocusing for any inhomogeneous width.
  for (const double sigma : {0.05, 0.42, 2.0}) {
    en::EnsembleModel model;
    model.dist.sigma_mhz = sigma;
    model.gamma_perp_mhz = 0.0;
    const auto ens = en::discretize(model, 2001, 6.0);
    const auto run =
        dn::run_sequence(ens, dn::hahn_sequence(40.0), dn::DecayParams{});
    c.require(std::abs(run.echoes[0].amplitude - 1.0) < 1e-9,
              "perfect echo at sigma = " + fmt("%.2f", sigma));
  }

  en::EnsembleModel model;
  model.dist.sigma_mhz = 0.42;
  model.gamma_perp_mhz = 0.0;
  const auto ens = en::discretize(model, 2001, 6.0);

  // Hahn-echo T2 recovery.
  dn::DecayParams hahn_decay;
  hahn_decay.t2_hom_ms = decay_fx.t2_hahn_ms;
  std::vector<double> tau_ms, amp;
  for (int k = 1; k <= 12; ++k) {
    const double tau_us = 60.0 * k;
    const auto run = dn::run_sequence(ens, dn::hahn_sequence(tau_us), hahn_decay);
    tau_ms.push_back(tau_us * 1e-3);
    amp.push_back(run.echoes[0].amplitude);
  }
  const auto hahn_fit = fk::fit_decay(tau_ms, amp, fk::DecayForm::hahn_2tau);
  c.info("Hahn-echo fit T2 = " + fmt("%.5f", hahn_fit.value("t_const")) +
         " ms (true " + fmt("%.2f", decay_fx.t2_hahn_ms) + ")");
  c.require(rel(hahn_fit.value("t_const"), decay_fx.t2_hahn_ms) < 0.02,
            "Hahn T2 within 2%");

  // CPMG envelope recovery at the benchmark settings.
  dn::DecayParams cpmg_decay;
  cpmg_decay.t2_hom_ms = decay_fx.t2_cpmg_ms;
  const auto echoes =
      dn::cpmg(ens, decay_fx.cpmg_n, decay_fx.cpmg_tau_us, cpmg_decay);
  std::vector<double> t_ms, e_amp;
  for (const auto& e : echoes) {
    t_ms.push_back(e.t_us * 1e-3);
    e_amp.push_back(std::abs(e.amplitude));
  }
  const auto cpmg_fit = fk::fit_decay(t_ms, e_amp, fk::DecayForm::exp);
  c.info("CPMG envelope fit T2 = " + fmt("%.5f", cpmg_fit.value("t_const")) +
         " ms (true " + fmt("%.2f", decay_fx.t2_cpmg_ms) + ")");
  c.require(rel(cpmg_fit.value("t_const"), decay_fx.t2_cpmg_ms) < 0.02,
            "CPMG T2 within 2%");

  // CPMG envelope is independent of the inhomogeneous width.
  en::EnsembleModel narrow = model, wide = model;
  narrow.dist.sigma_mhz = 0.05;
  wide.dist.sigma_mhz = 1.5;
  const auto e1 = dn::cpmg(en::discretize(narrow, 2001, 6.0), 10, 80.0, cpmg_decay);
  const auto e2 = dn::cpmg(en::discretize(wide, 2001, 6.0), 10, 80.0, cpmg_decay);
  double worst = 0;
  for (std::size_t k = 0; k < e1.size(); ++k) {
    worst = std::max(worst,
                     std::abs(std::abs(e1[k].amplitude) - std::abs(e2[k].amplitude)));
  }
  c.info("max CPMG envelope deviation between sigma 0.05 and 1.5: " +
         fmt("%.2e", worst));
  c.require(worst < 1e-9, "envelope sigma-independent to 1e-9");
}

void criterion_8(Checker& c) {
  const auto lw = fx::linewidth_fixture();
  cv::ResonatorParams res;  // 3713.7 MHz storage-point resonator
  en::EnsembleModel model;
  model.dist.omega_a_mhz = res.omega_c_mhz + 28.0;
  model.dist.sigma_mhz = lw.sigma_mhz;
  model.g_coll_mhz = 0.95;
  model.gamma_perp_mhz = lw.gamma_perp_mhz;
  const auto ens = en::discretize(model, 2001, 6.0);

  const double pulse_fwhm = 0.2;
  const int n = 201;
  std::vector<double> scan(n);
  for (int i = 0; i < n; ++i) {
    scan[i] = model.dist.omega_a_mhz - 3.0 + 6.0 * i / (n - 1);
  }
  const auto shift = dn::hole_burning_scan(res, ens, pulse_fwhm, scan);

  // Correlation with the underlying gaussian spectral density.
  std::vector<double> density(n);
  for (int i = 0; i < n; ++i) {
    const double d = scan[i] - model.dist.omega_a_mhz;
    density[i] = std::exp(-d * d / (2 * lw.sigma_mhz * lw.sigma_mhz));
  }
  const double r = pearson(shift, density);
  c.info("Pearson correlation of the scan with the spectral density: " +
         fmt("%.6f", std::abs(r)));
  c.require(std::abs(r) > 0.999, "|Pearson| > 0.999");

  // Width recovery via the gaussian scan fit.
  const auto fit = fk::fit_gaussian_scan(scan, shift);
  const double fwhm_fit = en::gaussian_fwhm_from_sigma(fit.value("sigma"));
  c.info("fit FWHM = " + fmt("%.4f", fwhm_fit) + " MHz vs line FWHM " +
         fmt("%.3f", lw.gamma_q_fwhm_mhz) +
         " (saturation window adds ~2% in quadrature)");
  c.require(fit.converged, "gaussian scan fit converged");
  c.require(rel(fwhm_fit, lw.gamma_q_fwhm_mhz) < 0.05,
            "recovered FWHM within 5% of 0.989 MHz");
}

void criterion_9(Checker& c) {
  const auto decay_fx = fx::decay_fixture();
  const auto atom = ak::sodium(1.016);
  cv::ResonatorParams res;
  en::EnsembleModel model;
  model.dist.omega_a_mhz = res.omega_c_mhz + 28.0;  // dispersive readout point
  const auto ens = en::discretize(model, 2001, 6.0);

  const double ramp_min = 4.5;
  const std::vector<dn::SchedulePoint> schedule = {
      {0.0, decay_fx.t_ramp_start_mk * 1e-3},
      {ramp_min, decay_fx.t_base_mk * 1e-3}};
  const auto curve = dn::t1_repolarization(
      atom, 776.95, schedule, decay_fx.t1_min,
      dn::StretchForm::stretched_sqrt, 60.0, 601, res, ens);

  std::vector<double> t_fit, y_fit;
  for (std::size_t i = 0; i < curve.t_min.size(); ++i) {
    if (curve.t_min[i] >= ramp_min && curve.delta_omega_rel_mhz[i] > 0) {
      t_fit.push_back(curve.t_min[i]);
      y_fit.push_back(curve.delta_omega_rel_mhz[i]);
    }
  }
  const auto fit = fk::fit_decay(t_fit, y_fit, fk::DecayForm::stretched_sqrt);
  c.info("stretched fit of the 500 -> 50 mK ramp: T1 = " +
         fmt("%.5f", fit.value("t_const")) + " min (true " +
         fmt("%.2f", decay_fx.t1_min) + ")");
  c.require(fit.converged, "repolarization fit converged");
  c.require(rel(fit.value("t_const"), decay_fx.t1_min) < 0.03,
            "T1 recovered within 3%");
}

void criterion_10(Checker& c) {
  struct Case {
    const char* name;
    cv::ResonatorParams res;
  };
  std::vector<Case> cases = {{"before growth", fx::resonator_before_growth()},
                             {"after growth", fx::resonator_after_growth()}};
  for (auto& cs : cases) {
    cs.res.amp = 0.93;
    cs.res.alpha_rad = 0.25;
    cs.res.tau_us = 0.0015;
    const double kappa = cs.res.kappa_i_mhz + cs.res.kappa_e_mhz;
    fk::Trace clean;
    for (int i = 0; i < 801; ++i) {
      const double f =
          cs.res.omega_c_mhz + (i / 800.0 - 0.5) * 14.0 * kappa;
      clean.x.push_back(f);
      clean.y.push_back(cv::s21_bare(cs.res, f));
    }

    const auto exact = fk::fit_resonator(clean);
    c.require(exact.converged,
              std::string(cs.name) + ": noise-free fit converged");
    c.require(rel(exact.value("kappa_i"), cs.res.kappa_i_mhz) < 1e-3 &&
                  rel(exact.value("kappa_e"), cs.res.kappa_e_mhz) < 1e-3 &&
                  rel(exact.value("amp"), cs.res.amp) < 1e-3 &&
                  std::abs(exact.value("omega_c") - cs.res.omega_c_mhz) <
                      1e-3 * kappa,
              std::string(cs.name) + ": parameters to 0.1% noise-free");
    c.info(std::string(cs.name) + " noise-free: kappa_i " +
           fmt("%.6f", exact.value("kappa_i")) + ", kappa_e " +
           fmt("%.6f", exact.value("kappa_e")) + " MHz");

    const auto noisy = fk::add_noise(clean, 40.0, 7161);
    const auto nfit = fk::fit_resonator(noisy);
    c.require(nfit.converged,
              std::string(cs.name) + ": 40 dB fit converged");
    c.require(rel(nfit.value("kappa_i"), cs.res.kappa_i_mhz) < 0.02 &&
                  rel(nfit.value("kappa_e"), cs.res.kappa_e_mhz) < 0.02,
              std::string(cs.name) + ": linewidths to 2% at 40 dB SNR");
    c.info(std::string(cs.name) + " at 40 dB: kappa_i " +
           fmt("%.6f", nfit.value("kappa_i")) + " (err " +
           fmt("%+.2f", 100 * (nfit.value("kappa_i") / cs.res.kappa_i_mhz - 1)) +
           "%), kappa_e " + fmt("%.6f", nfit.value("kappa_e")) + " (err " +
           fmt("%+.2f", 100 * (nfit.value("kappa_e") / cs.res.kappa_e_mhz - 1)) +
           "%)");
  }
}

void criterion_11(Checker& c) {
  const double g = 0.95, kappa = 0.265, gamma = 0.716;
  const double c0 = en::cooperativity(g, kappa, gamma);
  c.require(en::cooperativity(2 * g, kappa, gamma) == 4 * c0,
            "C scales as g^2 (exact)");
  c.require(en::cooperativity(g, 2 * kappa, gamma) == c0 / 2,
            "C scales as 1/kappa (exact)");
  c.require(en::cooperativity(g, kappa, 2 * gamma) == c0 / 2,
            "C scales as 1/Gamma (exact)");

  const double g0 = fx::single_spin_fixture().g0_mhz;
  const double n = en::participating_spins(g, g0);
  c.require(rel(en::collective_coupling(g0, n), g) < 1e-12,
            "g0*sqrt(N) round trip exact");

  c.info("[flagged] computed C = " + fmt("%.3f", c0) +
         " from the canonical inputs (g = 0.95, kappa = 0.265, Gamma = 0.716 "
         "MHz); the carried reference C = " +
         fmt("%.0f", fx::reference_values().cooperativity) +
         " disagrees with these inputs (reported, not asserted)");

  const auto single = fx::single_spin_fixture();
  const double supp = en::purcell_rate(single.g0_mhz, kappa, single.delta_mhz) /
                      en::purcell_rate(single.g0_mhz, kappa, 0.0);
  const double supp_oracle =
      (kappa / 2) * (kappa / 2) /
      ((kappa / 2) * (kappa / 2) + single.delta_mhz * single.delta_mhz);
  c.info("radiative suppression at 28 MHz detuning: " + fmt("%.4e", supp));
  c.require(rel(supp, supp_oracle) < 1e-12,
            "detuned relaxation ratio matches the lorentzian form exactly");
}

void criterion_12(Checker& c) {
  const auto base = fs::temp_directory_path() /
                    ("spinres_accept_" + std::to_string(::getpid()));
  fs::remove_all(base);
  fs::create_directories(base);

  // A reduced sweep keeps the map fast; determinism is what is under test.
  const std::string cfg_path = (base / "cfg.json").string();
  io::write_text(cfg_path, R"({
  "ensemble": {"n_packets": 501},
  "sweep": {"b_min_gauss": 770, "b_max_gauss": 784, "n_b": 13,
            "f_min_mhz": 3710, "f_max_mhz": 3717.4, "n_f": 81}
})");

  const std::vector<std::string> commands = {
      "fixtures",
      "atom levels --bmin 700 --bmax 850 --points 31",
      "atom populations --temp-mk 50 --ascale 1.016",
      "atom field --target-mhz 3713.7 --ascale 1.016",
      "--config " + cfg_path + " sim s21",
      "--config " + cfg_path + " --threads 2 sim rabi-map",
      "sim echo --tau-us 40 --t2-ms 0.92",
      "sim cpmg --n 25 --tau-us 100 --t2-ms 1.38",
      "sim holeburn --fwhm-mhz 0.2 --points 41",
      "sim t1 --t-end-min 20 --points 81",
      "od density --integrated-od 31.93",
  };

  bool all_same = true;
  for (const char rep : {'a', 'b'}) {
    for (std::size_t k = 0; k < commands.size(); ++k) {
      const fs::path out = base / (std::string(1, rep) + std::to_string(k));
      const std::string cmd = std::string(SPINRES_CLI_PATH) + " " +
                              commands[k] + " --out " + out.string() +
                              " > /dev/null 2>&1";
      const int rc = std::system(cmd.c_str());
      if (rc != 0) {
        c.require(false, "command '" + commands[k] + "' exited cleanly");
        all_same = false;
      }
    }
  }
  std::size_t n_files = 0;
  for (std::size_t k = 0; k < commands.size(); ++k) {
    const fs::path da = base / ("a" + std::to_string(k));
    const fs::path db = base / ("b" + std::to_string(k));
    if (!fs::exists(da) || !fs::exists(db)) continue;
    for (const auto& entry : fs::recursive_directory_iterator(da)) {
      if (!entry.is_regular_file()) continue;
      const auto relp = fs::relative(entry.path(), da);
      const auto other = db / relp;
      ++n_files;
      if (!fs::exists(other) ||
          io::read_text(entry.path().string()) !=
              io::read_text(other.string())) {
        all_same = false;
        c.require(false, "byte-identical: " + relp.string());
      }
    }
  }
  c.info("compared " + std::to_string(n_files) +
         " output files across repeated runs of " +
         std::to_string(commands.size()) + " commands");
  c.require(n_files >= 20, "the command list produced a real corpus");
  c.require(all_same, "all repeated outputs byte-identical");
  fs::remove_all(base);
}

}  // namespace

int main() {
  struct Criterion {
    const char* title;
    std::function<void(Checker&)> run;
  };
  const std::vector<Criterion> criteria = {
      {"zero-field hyperfine splitting", criterion_1},
      {"working-field location of the 3713.7 MHz transition", criterion_2},
      {"thermal populations", criterion_3},
      {"coupled model reduces to the bare notch at g = 0", criterion_4},
      {"collective coupling recovered from a noisy spectrum", criterion_5},
      {"effective linewidth limits and quadrature", criterion_6},
      {"echo refocusing and coherence-time recovery", criterion_7},
      {"hole-burning profile and width recovery", criterion_8},
      {"repolarization time recovery from a thermal ramp", criterion_9},
      {"resonator parameter recovery at two couplings", criterion_10},
      {"cooperativity and single-spin scaling laws", criterion_11},
      {"CLI determinism across repeated runs", criterion_12},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Checker c;
    try {
      criteria[i].run(c);
    } catch (const std::exception& e) {
      c.ok = false;
      c.notes.push_back(std::string("exception: ") + e.what());
    }
    std::printf("[%s] criterion %zu: %s\n", c.ok ? "PASS" : "FAIL", i + 1,
                criteria[i].title);
    for (const auto& note : c.notes) {
      std::printf("        %s\n", note.c_str());
    }
    if (!c.ok) ++failures;
  }
  std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failures,
              criteria.size());
  return failures;
}
