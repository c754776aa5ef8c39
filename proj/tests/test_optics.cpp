// Unit tests for optical-depth arithmetic: baseline normalization, band
// integration, and the density estimate.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "spinres/constants.hpp"
#include "spinres/errors.hpp"
#include "spinres/optics.hpp"

namespace op = spinres::optics;

namespace {

op::OdSpectrum linear_spectrum(double slope, double intercept, double lo,
                               double hi, int n) {
  op::OdSpectrum s;
  for (int i = 0; i < n; ++i) {
    const double wl = lo + (hi - lo) * i / (n - 1);
    s.samples.push_back({wl, intercept + slope * wl});
  }
  return s;
}

// Gaussian band of given peak height and FWHM on a linear baseline.
op::OdSpectrum band_spectrum(double peak, double fwhm, double center,
                             double slope, double intercept) {
  op::OdSpectrum s;
  for (int i = 0; i < 1001; ++i) {
    const double wl = 400.0 + 0.5 * i;  // 400 .. 900 nm, center lands on-grid
    const double band =
        peak * std::exp(-4.0 * std::numbers::ln2 * (wl - center) *
                        (wl - center) / (fwhm * fwhm));
    s.samples.push_back({wl, intercept + slope * wl + band});
  }
  return s;
}

}  // namespace

TEST_CASE("normalize_od maps an exactly linear spectrum to zero") {
  const auto raw = linear_spectrum(0.002, -0.3, 400.0, 900.0, 501);
  const auto out = op::normalize_od(raw, 450.0, 800.0);
  REQUIRE(out.samples.size() == raw.samples.size());
  for (const auto& s : out.samples) {
    CHECK(s.od == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  }
}

TEST_CASE("normalize_od preserves a band on a sloped baseline") {
  const double peak = 1.5, fwhm = 20.0, center = 586.0;
  const auto raw = band_spectrum(peak, fwhm, center, 0.001, 0.2);
  const auto out = op::normalize_od(raw, 450.0, 800.0);
  // Peak height survives the baseline subtraction.
  double max_od = 0, at = 0;
  for (const auto& s : out.samples) {
    if (s.od > max_od) {
      max_od = s.od;
      at = s.wavelength_nm;
    }
  }
  CHECK(max_od == doctest::Approx(peak).epsilon(1e-6));
  CHECK(at == doctest::Approx(center).epsilon(1e-3));
  // Anchor regions are now flat at zero.
  for (const auto& s : out.samples) {
    if (std::abs(s.wavelength_nm - 450.0) < 5.0 ||
        std::abs(s.wavelength_nm - 800.0) < 5.0) {
      CHECK(s.od == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("normalize_od is idempotent") {
  const auto raw = band_spectrum(1.5, 20.0, 586.0, 0.0015, -0.1);
  const auto once = op::normalize_od(raw, 450.0, 800.0);
  const auto twice = op::normalize_od(once, 450.0, 800.0);
  for (std::size_t i = 0; i < once.samples.size(); ++i) {
    CHECK(twice.samples[i].od ==
          doctest::Approx(once.samples[i].od).scale(1.0).epsilon(1e-12));
  }
}

TEST_CASE("normalize_od median anchors reject single-sample spikes") {
  auto raw = linear_spectrum(0.0, 0.5, 400.0, 900.0, 501);
  // A cosmic-ray spike exactly on the lower anchor sample.
  for (auto& s : raw.samples) {
    if (std::abs(s.wavelength_nm - 450.0) < 0.5) s.od += 40.0;
  }
  const auto out = op::normalize_od(raw, 450.0, 800.0);
  // Sanity: far from the spike, the baseline is still ~0, not dragged by 40.
  for (const auto& s : out.samples) {
    if (s.wavelength_nm > 600.0 && s.wavelength_nm < 700.0) {
      CHECK(std::abs(s.od) < 1e-9);
    }
  }
}

TEST_CASE("normalize_od validates anchors") {
  const auto raw = linear_spectrum(0.0, 0.1, 400.0, 900.0, 101);
  CHECK_THROWS_AS(op::normalize_od(raw, 800.0, 450.0),
                  spinres::invalid_input_error);
  CHECK_THROWS_AS(op::normalize_od(raw, 300.0, 800.0),
                  spinres::invalid_input_error);
  CHECK_THROWS_AS(op::normalize_od(raw, 450.0, 950.0),
                  spinres::invalid_input_error);
  CHECK_THROWS_AS(op::normalize_od(raw, 500.0, 500.1),
                  spinres::invalid_input_error);  // same anchor sample
}

TEST_CASE("integrate_od computes exact areas for simple shapes") {
  SUBCASE("unit OD over 10 nm") {
    const auto flat = linear_spectrum(0.0, 1.0, 500.0, 700.0, 2001);
    CHECK(op::integrate_od(flat, 590.0, 600.0) ==
          doctest::Approx(10.0).epsilon(1e-9));
  }
  SUBCASE("partial edge cells interpolate linearly") {
    const auto flat = linear_spectrum(0.0, 2.0, 500.0, 510.0, 11);  // 1 nm grid
    // Band 502.25 .. 503.75 covers 1.5 nm of OD 2.
    CHECK(op::integrate_od(flat, 502.25, 503.75) ==
          doctest::Approx(3.0).epsilon(1e-12));
  }
  SUBCASE("additivity over adjacent bands") {
    const auto spec = band_spectrum(1.5, 20.0, 586.0, 0.0, 0.0);
    const double whole = op::integrate_od(spec, 500.0, 680.0);
    const double left = op::integrate_od(spec, 500.0, 586.0);
    const double right = op::integrate_od(spec, 586.0, 680.0);
    CHECK(left + right == doctest::Approx(whole).epsilon(1e-12));
  }
  SUBCASE("gaussian band area matches the analytic value") {
    const double peak = 1.5, fwhm = 20.0;
    const auto spec = band_spectrum(peak, fwhm, 586.0, 0.0, 0.0);
    const double area = op::integrate_od(spec, 480.0, 690.0);
    const double oracle =
        peak * fwhm * 0.5 * std::sqrt(std::numbers::pi / std::numbers::ln2);
    CHECK(area == doctest::Approx(oracle).epsilon(1e-4));
  }
}

TEST_CASE("integrate_od validates the band") {
  const auto spec = linear_spectrum(0.0, 1.0, 500.0, 700.0, 101);
  CHECK_THROWS_AS(op::integrate_od(spec, 600.0, 600.0),
                  spinres::invalid_input_error);
  CHECK_THROWS_AS(op::integrate_od(spec, 400.0, 600.0),
                  spinres::invalid_input_error);
  CHECK_THROWS_AS(op::integrate_od(spec, 600.0, 800.0),
                  spinres::invalid_input_error);
}

TEST_CASE("estimate_density is linear in OD and reciprocal in path and f") {
  const double base = op::estimate_density(30.0, 0.98, 17.0, 586.0);
  CHECK(base > 0.0);
  CHECK(op::estimate_density(60.0, 0.98, 17.0, 586.0) ==
        doctest::Approx(2.0 * base).epsilon(1e-12));
  CHECK(op::estimate_density(30.0, 0.49, 17.0, 586.0) ==
        doctest::Approx(2.0 * base).epsilon(1e-12));
  CHECK(op::estimate_density(30.0, 0.98, 34.0, 586.0) ==
        doctest::Approx(base / 2.0).epsilon(1e-12));
}

TEST_CASE("estimate_density matches the hand-evaluated formula") {
  // I_nu = I_nm * 1e-9 * c / lambda^2; sigma_int = pi r_e c f;
  // n = I_nu / (path * sigma_int), reported in cm^-3.
  const double i_nm = 30.0, f = 0.98, path_um = 17.0, lambda_nm = 586.0;
  const double lambda_m = lambda_nm * 1e-9;
  const double i_hz = i_nm * 1e-9 * spinres::constants::kSpeedOfLightMps /
                      (lambda_m * lambda_m);
  const double sigma_int =
      spinres::constants::kIntegratedCrossSectionM2Hz * f;
  const double n_m3 = i_hz / (path_um * 1e-6 * sigma_int);
  CHECK(op::estimate_density(i_nm, f, path_um, lambda_nm) ==
        doctest::Approx(n_m3 * 1e-6).epsilon(1e-12));
}

TEST_CASE("estimate_density rejects non-positive inputs") {
  CHECK_THROWS_AS(op::estimate_density(0.0, 0.98, 17.0, 586.0),
                  spinres::invalid_input_error);
  CHECK_THROWS_AS(op::estimate_density(30.0, -1.0, 17.0, 586.0),
                  spinres::invalid_input_error);
  CHECK_THROWS_AS(op::estimate_density(30.0, 0.98, 0.0, 586.0),
                  spinres::invalid_input_error);
  CHECK_THROWS_AS(op::estimate_density(30.0, 0.98, 17.0, 0.0),
                  spinres::invalid_input_error);
}
