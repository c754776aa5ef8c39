#include "spinres/optics.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "spinres/constants.hpp"
#include "spinres/errors.hpp"

namespace spinres::optics {

namespace {

void validate_spectrum(const OdSpectrum& spec, std::size_t min_samples) {
  if (spec.samples.size() < min_samples) {
    throw invalid_input_error("od spectrum: too few samples");
  }
  for (std::size_t i = 0; i < spec.samples.size(); ++i) {
    if (!std::isfinite(spec.samples[i].od) ||
        !std::isfinite(spec.samples[i].wavelength_nm)) {
      throw invalid_input_error("od spectrum: non-finite sample");
    }
    if (i > 0 && !(spec.samples[i].wavelength_nm >
                   spec.samples[i - 1].wavelength_nm)) {
      throw invalid_input_error(
          "od spectrum: wavelengths must be strictly increasing");
    }
  }
}

std::size_t nearest_index(const OdSpectrum& spec, double wavelength_nm) {
  const auto& s = spec.samples;
  std::size_t best = 0;
  double best_d = std::abs(s[0].wavelength_nm - wavelength_nm);
  for (std::size_t i = 1; i < s.size(); ++i) {
    const double d = std::abs(s[i].wavelength_nm - wavelength_nm);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

// Median OD of the 5 samples centered on index i (window clamped at edges).
double window_median(const OdSpectrum& spec, std::size_t i) {
  const std::size_t n = spec.samples.size();
  std::size_t lo = i >= 2 ? i - 2 : 0;
  std::size_t hi = std::min(lo + 5, n);
  if (hi - lo < 5 && hi == n) lo = n >= 5 ? n - 5 : 0;
  std::vector<double> vals;
  for (std::size_t k = lo; k < hi; ++k) vals.push_back(spec.samples[k].od);
  std::sort(vals.begin(), vals.end());
  return vals[vals.size() / 2];
}

}  // namespace

OdSpectrum normalize_od(const OdSpectrum& raw, double anchor_lo_nm,
                        double anchor_hi_nm) {
  validate_spectrum(raw, 5);
  const double wl_min = raw.samples.front().wavelength_nm;
  const double wl_max = raw.samples.back().wavelength_nm;
  if (!(anchor_lo_nm < anchor_hi_nm)) {
    throw invalid_input_error("normalize_od: anchor_lo must be < anchor_hi");
  }
  if (anchor_lo_nm < wl_min || anchor_hi_nm > wl_max) {
    throw invalid_input_error("normalize_od: anchors outside spectrum range");
  }
  const std::size_t i_lo = nearest_index(raw, anchor_lo_nm);
  const std::size_t i_hi = nearest_index(raw, anchor_hi_nm);
  if (i_lo == i_hi) {
    throw invalid_input_error("normalize_od: anchors resolve to one sample");
  }
  const double x0 = raw.samples[i_lo].wavelength_nm;
  const double x1 = raw.samples[i_hi].wavelength_nm;
  const double y0 = window_median(raw, i_lo);
  const double y1 = window_median(raw, i_hi);
  const double slope = (y1 - y0) / (x1 - x0);

  OdSpectrum out = raw;
  for (auto& s : out.samples) {
    s.od -= y0 + slope * (s.wavelength_nm - x0);
  }
  return out;
}

double integrate_od(const OdSpectrum& spec, double band_lo_nm,
                    double band_hi_nm) {
  validate_spectrum(spec, 2);
  if (!(band_lo_nm < band_hi_nm)) {
    throw invalid_input_error("integrate_od: empty band");
  }
  if (band_lo_nm < spec.samples.front().wavelength_nm ||
      band_hi_nm > spec.samples.back().wavelength_nm) {
    throw invalid_input_error("integrate_od: band outside sampled range");
  }
  const auto& s = spec.samples;
  const auto od_at = [&](std::size_t i0, double wl) {
    const double t = (wl - s[i0].wavelength_nm) /
                     (s[i0 + 1].wavelength_nm - s[i0].wavelength_nm);
    return s[i0].od + t * (s[i0 + 1].od - s[i0].od);
  };
  double sum = 0;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const double a = std::max(s[i].wavelength_nm, band_lo_nm);
    const double b = std::min(s[i + 1].wavelength_nm, band_hi_nm);
    if (b <= a) continue;
    sum += 0.5 * (od_at(i, a) + od_at(i, b)) * (b - a);
  }
  return sum;
}

double estimate_density(double integrated_od_nm, double oscillator_strength,
                        double path_length_um, double lambda_center_nm) {
  if (!(integrated_od_nm > 0) || !(oscillator_strength > 0) ||
      !(path_length_um > 0) || !(lambda_center_nm > 0)) {
    throw invalid_input_error("estimate_density: inputs must be positive");
  }
  const double lambda_m = lambda_center_nm * 1e-9;
  const double integral_hz =
      integrated_od_nm * 1e-9 * constants::kSpeedOfLightMps /
      (lambda_m * lambda_m);
  const double sigma_int_m2hz =
      constants::kIntegratedCrossSectionM2Hz * oscillator_strength;
  const double n_per_m3 =
      integral_hz / (path_length_um * 1e-6 * sigma_int_m2hz);
  return n_per_m3 * 1e-6;  // cm^-3
}

}  // namespace spinres::optics
