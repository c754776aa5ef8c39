#include "spinres/cavity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "spinres/errors.hpp"

namespace spinres::cavity {

namespace {

void validate(const ResonatorParams& res) {
  if (res.kappa_i_mhz < 0 || res.kappa_e_mhz < 0) {
    throw invalid_input_error("resonator loss rates must be non-negative");
  }
  if (res.kappa_i_mhz + res.kappa_e_mhz <= 0) {
    throw invalid_input_error("total resonator linewidth must be positive");
  }
  if (res.amp <= 0) {
    throw invalid_input_error("background amplitude must be positive");
  }
}

}  // namespace

std::complex<double> s21_bare(const ResonatorParams& res, double f_mhz) {
  validate(res);
  const double kappa = res.kappa_e_mhz + res.kappa_i_mhz;
  const std::complex<double> denom(kappa, 2.0 * (f_mhz - res.omega_c_mhz));
  const std::complex<double> dip =
      1.0 - res.kappa_e_mhz * std::polar(1.0, res.psi_rad) / denom;
  const double phase =
      res.alpha_rad - 2.0 * std::numbers::pi * f_mhz * res.tau_us;
  return res.amp * std::polar(1.0, phase) * dip;
}

DipMetrics dip_metrics(const std::function<std::complex<double>(double)>& s21,
                       double f_lo_mhz, double f_hi_mhz, int n_grid) {
  if (!(f_hi_mhz > f_lo_mhz)) {
    throw invalid_input_error("dip_metrics: need f_hi > f_lo");
  }
  if (n_grid < 5) {
    throw invalid_input_error("dip_metrics: need at least 5 grid points");
  }

  const double step = (f_hi_mhz - f_lo_mhz) / (n_grid - 1);
  std::vector<double> power(static_cast<std::size_t>(n_grid));
  for (int i = 0; i < n_grid; ++i) {
    power[static_cast<std::size_t>(i)] =
        std::norm(s21(f_lo_mhz + step * i));
  }

  const auto min_it = std::min_element(power.begin(), power.end());
  const auto i_min = static_cast<int>(min_it - power.begin());
  const double bg_sq = 0.5 * (power.front() + power.back());

  DipMetrics m;
  m.f_min_mhz = f_lo_mhz + step * i_min;
  double p_min = *min_it;

  // Parabolic refinement of the minimum when it is interior.
  if (i_min > 0 && i_min < n_grid - 1) {
    const double pl = power[static_cast<std::size_t>(i_min - 1)];
    const double pc = p_min;
    const double pr = power[static_cast<std::size_t>(i_min + 1)];
    const double denom = pl - 2.0 * pc + pr;
    if (denom > 0) {
      const double shift = 0.5 * (pl - pr) / denom;
      m.f_min_mhz += shift * step;
      p_min = pc - 0.25 * (pl - pr) * shift;
    }
  }

  if (bg_sq <= 0 || p_min >= bg_sq * (1.0 - 1e-12)) {
    // Flat trace: no resolvable dip.
    m.f_min_mhz = 0.5 * (f_lo_mhz + f_hi_mhz);
    m.depth = 0;
    m.fwhm_mhz = 0;
    return m;
  }
  m.depth = 1.0 - p_min / bg_sq;

  // Half-depth crossings of |S21|^2, linearly interpolated outward from the
  // minimum sample.
  const double level = 0.5 * (bg_sq + p_min);
  auto cross_at = [&](int a, int b) {
    const double pa = power[static_cast<std::size_t>(a)];
    const double pb = power[static_cast<std::size_t>(b)];
    const double t = (level - pa) / (pb - pa);
    return f_lo_mhz + step * (a + t * (b - a));
  };

  double f_left = f_lo_mhz;
  for (int i = i_min; i > 0; --i) {
    if (power[static_cast<std::size_t>(i - 1)] >= level &&
        power[static_cast<std::size_t>(i)] < level) {
      f_left = cross_at(i - 1, i);
      break;
    }
  }
  double f_right = f_hi_mhz;
  for (int i = i_min; i < n_grid - 1; ++i) {
    if (power[static_cast<std::size_t>(i + 1)] >= level &&
        power[static_cast<std::size_t>(i)] < level) {
      f_right = cross_at(i, i + 1);
      break;
    }
  }
  m.fwhm_mhz = f_right - f_left;
  return m;
}

DipMetrics dip_metrics(const ResonatorParams& res) {
  validate(res);
  const double kappa = res.kappa_e_mhz + res.kappa_i_mhz;
  const double span = 20.0 * kappa;
  return dip_metrics([&res](double f) { return s21_bare(res, f); },
                     res.omega_c_mhz - span, res.omega_c_mhz + span);
}

}  // namespace spinres::cavity
