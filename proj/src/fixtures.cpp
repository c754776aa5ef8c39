#include "spinres/fixtures.hpp"

namespace spinres::fixtures {

namespace {

// Frozen derived numbers (see header): sigma = FWHM / (2 sqrt(2 ln 2)) and
// the gamma_perp root of the effective-linewidth equation at Gamma = 0.716.
constexpr double kSigmaAsgrownMhz = 0.4199896302424254;
constexpr double kGammaPerpAsgrownMhz = 0.5127826029856437;
// Hyperfine scale that puts the |1,1> -> |2,2> crossing with the 3713.7 MHz
// resonator at the working field.
constexpr double kAScaleWorking = 1.016;
constexpr double kWorkingFieldGauss = 776.95;

CoupledFixture base_fixture(std::string name, double g_coll_mhz) {
  CoupledFixture fx;
  fx.name = std::move(name);
  fx.resonator =
      cavity::ResonatorParams{3713.7, 0.102, 0.163, 1.0, 0.0, 0.0, 0.0};
  fx.ensemble.dist.omega_a_mhz = 3713.7;
  fx.ensemble.dist.sigma_mhz = kSigmaAsgrownMhz;
  fx.ensemble.dist.shape = ensemble::LineShape::gaussian;
  fx.ensemble.g_coll_mhz = g_coll_mhz;
  fx.ensemble.gamma_perp_mhz = kGammaPerpAsgrownMhz;
  fx.a_scale = kAScaleWorking;
  fx.b_gauss = kWorkingFieldGauss;
  return fx;
}

}  // namespace

CoupledFixture asgrown() { return base_fixture("asgrown", 0.95); }
CoupledFixture bleached() { return base_fixture("bleached", 1.19); }
CoupledFixture unbleached() { return base_fixture("unbleached", 0.428); }

const std::vector<CoupledFixture>& coupled_fixtures() {
  static const std::vector<CoupledFixture> all = {asgrown(), bleached(),
                                                  unbleached()};
  return all;
}

cavity::ResonatorParams resonator_before_growth() {
  return cavity::ResonatorParams{3750.0, 0.070, 0.195, 1.0, 0.0, 0.0, 0.0};
}

cavity::ResonatorParams resonator_after_growth() {
  return cavity::ResonatorParams{3713.7, 0.118, 0.163, 1.0, 0.0, 0.0, 0.0};
}

DecayFixture decay_fixture() { return DecayFixture{}; }

LinewidthFixture linewidth_fixture() {
  LinewidthFixture fx;
  fx.sigma_mhz = kSigmaAsgrownMhz;
  fx.gamma_perp_mhz = kGammaPerpAsgrownMhz;
  return fx;
}

SingleSpinFixture single_spin_fixture() { return SingleSpinFixture{}; }

ReferenceValues reference_values() { return ReferenceValues{}; }

}  // namespace spinres::fixtures
