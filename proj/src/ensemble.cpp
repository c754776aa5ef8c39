#include "spinres/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

#include "spinres/constants.hpp"
#include "spinres/errors.hpp"

namespace spinres::ensemble {

namespace {

// Neumaier-compensated running sum: packet sums must not depend on magnitude
// ordering at double precision.
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

double two_sqrt_two_ln2() { return 2.0 * std::sqrt(2.0 * std::numbers::ln2); }

}  // namespace

double gaussian_fwhm_from_sigma(double sigma) {
  return two_sqrt_two_ln2() * sigma;
}

double gaussian_sigma_from_fwhm(double fwhm) {
  return fwhm / two_sqrt_two_ln2();
}

DiscretizedEnsemble discretize(const EnsembleModel& model, int n_packets,
                               double span_widths) {
  if (n_packets < 1 || n_packets % 2 == 0) {
    throw invalid_input_error("discretize: packet count must be odd and >= 1");
  }
  if (span_widths < 4) {
    throw invalid_input_error("discretize: span must cover >= 4 widths");
  }
  if (model.dist.sigma_mhz < 0) {
    throw invalid_input_error("discretize: distribution width must be >= 0");
  }
  if (model.g_coll_mhz < 0 || model.gamma_perp_mhz < 0) {
    throw invalid_input_error("discretize: rates must be non-negative");
  }

  DiscretizedEnsemble ens;
  ens.omega_a_mhz = model.dist.omega_a_mhz;
  ens.g_coll_mhz = model.g_coll_mhz;
  ens.gamma_perp_mhz = model.gamma_perp_mhz;

  const double width = model.dist.sigma_mhz;
  if (n_packets == 1 || width == 0) {
    ens.packets.push_back({0.0, 1.0});
    return ens;
  }

  const int half = (n_packets - 1) / 2;
  const double spacing = span_widths * width / half;
  ens.packets.resize(static_cast<std::size_t>(n_packets));

  CompensatedSum total;
  for (int k = -half; k <= half; ++k) {
    const double x = k * spacing;
    // Weights are computed from k^2 so the grid is symmetric bit-for-bit.
    const double r2 = (static_cast<double>(k) * k) * (spacing / width) *
                      (spacing / width);
    double w = 0;
    switch (model.dist.shape) {
      case LineShape::gaussian:
        w = std::exp(-0.5 * r2);
        break;
      case LineShape::lorentzian:
        w = 1.0 / (1.0 + r2);
        break;
    }
    ens.packets[static_cast<std::size_t>(k + half)] = {x, w};
    total.add(w);
  }
  const double norm = total.value();
  for (auto& p : ens.packets) p.weight /= norm;
  return ens;
}

std::complex<double> s21_coupled(const cavity::ResonatorParams& res,
                                 const DiscretizedEnsemble& ens, double f_mhz) {
  if (ens.packets.empty()) {
    throw invalid_input_error("s21_coupled: ensemble has no packets");
  }
  if (ens.gamma_perp_mhz < 0 || ens.g_coll_mhz < 0) {
    throw invalid_input_error("s21_coupled: rates must be non-negative");
  }
  if (res.kappa_i_mhz < 0 || res.kappa_e_mhz < 0 ||
      res.kappa_i_mhz + res.kappa_e_mhz <= 0) {
    throw invalid_input_error("s21_coupled: invalid resonator rates");
  }

  const double g_sq = ens.g_coll_mhz * ens.g_coll_mhz;
  const double gamma = ens.gamma_perp_mhz;
  CompensatedSum ker_re;
  CompensatedSum ker_im;
  for (const auto& p : ens.packets) {
    const double d = f_mhz - (ens.omega_a_mhz + p.detuning_mhz);
    const double denom = gamma * gamma + d * d;
    ker_re.add(g_sq * p.weight * gamma / denom);
    ker_im.add(-g_sq * p.weight * d / denom);
  }

  const double kappa = res.kappa_e_mhz + res.kappa_i_mhz;
  const std::complex<double> denom(0.5 * kappa + ker_re.value(),
                                   (f_mhz - res.omega_c_mhz) + ker_im.value());
  const std::complex<double> dip =
      1.0 - 0.5 * res.kappa_e_mhz * std::polar(1.0, res.psi_rad) / denom;
  const double phase =
      res.alpha_rad - 2.0 * std::numbers::pi * f_mhz * res.tau_us;
  return res.amp * std::polar(1.0, phase) * dip;
}

double effective_linewidth(const DiscretizedEnsemble& ens) {
  if (ens.packets.empty()) {
    throw invalid_input_error("effective_linewidth: ensemble has no packets");
  }
  const double gamma = ens.gamma_perp_mhz;
  if (gamma < 0) {
    throw invalid_input_error("effective_linewidth: gamma_perp must be >= 0");
  }

  if (gamma == 0) {
    if (ens.packets.size() == 1) return 0;
    const auto center = std::min_element(
        ens.packets.begin(), ens.packets.end(), [](auto& a, auto& b) {
          return std::abs(a.detuning_mhz) < std::abs(b.detuning_mhz);
        });
    const double spacing =
        ens.packets[1].detuning_mhz - ens.packets[0].detuning_mhz;
    return spacing / (std::numbers::pi * center->weight);
  }

  CompensatedSum sum;
  for (const auto& p : ens.packets) {
    sum.add(p.weight * gamma /
            (gamma * gamma + p.detuning_mhz * p.detuning_mhz));
  }
  return 1.0 / sum.value();
}

double cooperativity(double g_coll_mhz, double kappa_mhz,
                     double gamma_eff_mhz) {
  if (kappa_mhz <= 0 || gamma_eff_mhz <= 0) {
    throw invalid_input_error("cooperativity: kappa and gamma must be > 0");
  }
  return g_coll_mhz * g_coll_mhz / (kappa_mhz * gamma_eff_mhz);
}

double collective_coupling(double g0_mhz, double n_spins) {
  if (n_spins < 0 || g0_mhz < 0) {
    throw invalid_input_error("collective_coupling: arguments must be >= 0");
  }
  return g0_mhz * std::sqrt(n_spins);
}

double participating_spins(double g_coll_mhz, double g0_mhz) {
  if (g0_mhz <= 0 || g_coll_mhz < 0) {
    throw invalid_input_error("participating_spins: need g0 > 0, g >= 0");
  }
  const double r = g_coll_mhz / g0_mhz;
  return r * r;
}

double purcell_rate(double g0_mhz, double kappa_mhz, double detuning_mhz) {
  if (g0_mhz < 0 || kappa_mhz <= 0) {
    throw invalid_input_error("purcell_rate: need g0 >= 0, kappa > 0");
  }
  return kappa_mhz * g0_mhz * g0_mhz /
         (detuning_mhz * detuning_mhz + 0.25 * kappa_mhz * kappa_mhz);
}

double dipolar_fwhm_mhz(double density_cm3, double pair_coupling_mhz_cm3,
                        bool unlike_spins) {
  if (density_cm3 < 0 || pair_coupling_mhz_cm3 < 0) {
    throw invalid_input_error("dipolar_fwhm: arguments must be >= 0");
  }
  double fwhm =
      constants::kDipolarStatPrefactor * density_cm3 * pair_coupling_mhz_cm3;
  if (unlike_spins) fwhm *= constants::kUnlikeSpinSecularFactor;
  return fwhm;
}

CrossingMap avoided_crossing_map(const cavity::ResonatorParams& res,
                                 const EnsembleModel& model,
                                 const atomkit::AtomSpec& atom,
                                 const CrossingMapConfig& cfg, int n_threads) {
  if (cfg.n_b < 1 || cfg.n_f < 1) {
    throw invalid_input_error("avoided_crossing_map: grid sizes must be >= 1");
  }
  if (cfg.b_max_gauss < cfg.b_min_gauss || cfg.f_max_mhz < cfg.f_min_mhz) {
    throw invalid_input_error("avoided_crossing_map: bad axis range");
  }

  CrossingMap map;
  map.b_gauss.resize(static_cast<std::size_t>(cfg.n_b));
  map.f_mhz.resize(static_cast<std::size_t>(cfg.n_f));
  map.omega_a_mhz.resize(static_cast<std::size_t>(cfg.n_b));
  map.s21_sq.resize(static_cast<std::size_t>(cfg.n_b) *
                    static_cast<std::size_t>(cfg.n_f));

  for (int i = 0; i < cfg.n_b; ++i) {
    map.b_gauss[static_cast<std::size_t>(i)] =
        cfg.n_b == 1 ? cfg.b_min_gauss
                     : cfg.b_min_gauss + (cfg.b_max_gauss - cfg.b_min_gauss) *
                                             i / (cfg.n_b - 1);
  }
  for (int j = 0; j < cfg.n_f; ++j) {
    map.f_mhz[static_cast<std::size_t>(j)] =
        cfg.n_f == 1 ? cfg.f_min_mhz
                     : cfg.f_min_mhz +
                           (cfg.f_max_mhz - cfg.f_min_mhz) * j / (cfg.n_f - 1);
  }

  // Each row is written into its own preallocated slot, so the result is
  // independent of the thread count.
  auto fill_row = [&](int i) {
    const double b = map.b_gauss[static_cast<std::size_t>(i)];
    const double omega_a =
        atomkit::transition_frequency(atom, b, cfg.lower, cfg.upper);
    map.omega_a_mhz[static_cast<std::size_t>(i)] = omega_a;
    EnsembleModel local = model;
    local.dist.omega_a_mhz = omega_a;
    const DiscretizedEnsemble ens =
        discretize(local, cfg.n_packets, cfg.span_widths);
    double* row = &map.s21_sq[static_cast<std::size_t>(i) *
                              static_cast<std::size_t>(cfg.n_f)];
    for (int j = 0; j < cfg.n_f; ++j) {
      row[j] = std::norm(
          s21_coupled(res, ens, map.f_mhz[static_cast<std::size_t>(j)]));
    }
  };

  const int workers = std::max(1, std::min(n_threads, cfg.n_b));
  if (workers == 1) {
    for (int i = 0; i < cfg.n_b; ++i) fill_row(i);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) {
      pool.emplace_back([&, t]() {
        for (int i = t; i < cfg.n_b; i += workers) fill_row(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  return map;
}

}  // namespace spinres::ensemble
