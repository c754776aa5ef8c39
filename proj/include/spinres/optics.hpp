// optics.hpp — Optical-depth arithmetic for absorption spectra: baseline
// normalization against off-resonant anchor wavelengths, band integration,
// and order-of-magnitude number-density estimation.
//
// Optical depth is base-e throughout: transmission T = exp(-OD).
#pragma once

#include <string>
#include <vector>

namespace spinres::optics {

struct OdSample {
  double wavelength_nm{0};
  double od{0};
};

struct OdSpectrum {
  std::vector<OdSample> samples;  // wavelengths strictly increasing, OD finite
  std::string temperature_label;  // free-form metadata, e.g. "0.7 K"
  std::string bleach_state;       // free-form metadata, e.g. "as-grown"
};

// Subtracts the straight baseline through the two anchor points.  Each
// anchor's OD is the median of the 5 samples centered on the grid point
// nearest the requested wavelength (edge windows are clamped), and the
// baseline passes through that grid point's wavelength, so an exactly linear
// input maps to identically zero and the operation is idempotent for data
// that is locally linear around the anchors.  Throws invalid_input_error for
// anchors outside the spectrum range or anchor_lo >= anchor_hi.
OdSpectrum normalize_od(const OdSpectrum& raw, double anchor_lo_nm,
                        double anchor_hi_nm);

// Trapezoidal integral of OD over [band_lo, band_hi] (nm * OD).  Partial
// edge cells are handled by linear interpolation, so the result is additive
// over adjacent bands.  The band must be non-empty and lie within the
// sampled range.
double integrate_od(const OdSpectrum& spec, double band_lo_nm,
                    double band_hi_nm);

// Number density (cm^-3) from an integrated optical depth (nm * OD):
//   n = I_nu / (path_length * sigma_int),
// where I_nu converts the band integral to frequency units about the band
// center (dnu = c / lambda^2 * dlambda) and sigma_int = pi * r_e * c * f is
// the integrated absorption cross-section per atom for oscillator strength
// f.  The band-center wavelength is an explicit input because the
// wavelength-to-frequency conversion depends on it.
double estimate_density(double integrated_od_nm, double oscillator_strength,
                        double path_length_um, double lambda_center_nm);

}  // namespace spinres::optics
