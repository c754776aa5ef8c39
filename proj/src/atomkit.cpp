// atomkit.cpp — blockwise closed-form diagonalization of the hyperfine/Zeeman
// Hamiltonian for J = 1/2.
#include "spinres/atomkit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spinres/constants.hpp"
#include "spinres/errors.hpp"

namespace spinres::atomkit {

namespace {

constexpr double kJ = 0.5;  // electronic angular momentum, fixed

bool is_half_integer_spin(double s) {
  const double twice = 2.0 * s;
  return s >= 0.0 && std::abs(twice - std::round(twice)) < 1e-9;
}

void validate(const AtomSpec& atom) {
  if (!is_half_integer_spin(atom.nuclear_spin))
    throw invalid_input_error("nuclear spin must be a non-negative multiple of 1/2, got " +
                              std::to_string(atom.nuclear_spin));
  if (!(atom.a_hfs_mhz > 0.0) || !(atom.a_scale > 0.0))
    throw invalid_input_error("hyperfine constant and scale must be positive");
}

long twice(double x) { return std::lround(2.0 * x); }

bool same_label(const LevelLabel& a, const LevelLabel& b) {
  return twice(a.f) == twice(b.f) && twice(a.m_f) == twice(b.m_f);
}

// Matrix element <m_I + 1 | I_+ | m_I> for nuclear spin i.
double iplus(double i, double m_i) {
  return std::sqrt(i * (i + 1.0) - m_i * (m_i + 1.0));
}

}  // namespace

AtomSpec sodium(double a_scale) {
  AtomSpec atom;
  atom.nuclear_spin = constants::kNaNuclearSpin;
  atom.a_hfs_mhz = constants::kNaHyperfineAMHz;
  atom.a_scale = a_scale;
  atom.g_j = constants::kNaGJ;
  atom.g_i = constants::kNaGI;
  return atom;
}

ZeemanSpectrum zeeman_spectrum(const AtomSpec& atom, double b_gauss) {
  validate(atom);
  if (b_gauss < 0.0)
    throw invalid_input_error("field must be >= 0 gauss");

  const double i_spin = atom.nuclear_spin;
  const double a = atom.a_hfs_mhz * atom.a_scale;
  const double zeeman = constants::kMuBMHzPerGauss * b_gauss;
  const int dim = static_cast<int>(std::lround(2.0 * i_spin + 1.0)) * 2;

  ZeemanSpectrum spec;
  spec.b_gauss = b_gauss;
  spec.basis.reserve(dim);
  for (long tmi = -twice(i_spin); tmi <= twice(i_spin); tmi += 2)
    for (double m_j : {-kJ, +kJ})
      spec.basis.emplace_back(0.5 * static_cast<double>(tmi), m_j);

  auto basis_index = [&](double m_i, double m_j) -> int {
    for (size_t k = 0; k < spec.basis.size(); ++k)
      if (twice(spec.basis[k].first) == twice(m_i) &&
          twice(spec.basis[k].second) == twice(m_j))
        return static_cast<int>(k);
    return -1;
  };

  auto diag_element = [&](double m_i, double m_j) {
    return a * m_i * m_j + zeeman * (atom.g_j * m_j + atom.g_i * m_i);
  };

  // At zero field F = I - 1/2 lies below F = I + 1/2 for a > 0; within each
  // two-state m_F block that order is preserved at every field.
  const double f_low = (a > 0.0) ? i_spin - kJ : i_spin + kJ;
  const double f_high = (a > 0.0) ? i_spin + kJ : i_spin - kJ;

  spec.levels.reserve(dim);
  // Enumerate blocks by m_F = m_I + m_J.
  for (long tmf = -twice(i_spin + kJ); tmf <= twice(i_spin + kJ); tmf += 2) {
    const double m_f = 0.5 * static_cast<double>(tmf);
    const double m_i_up = m_f - kJ;    // pairs with m_J = +1/2
    const double m_i_down = m_f + kJ;  // pairs with m_J = -1/2
    const int k_up = (std::abs(m_i_up) <= i_spin + 1e-9) ? basis_index(m_i_up, +kJ) : -1;
    const int k_down = (std::abs(m_i_down) <= i_spin + 1e-9) ? basis_index(m_i_down, -kJ) : -1;

    if (k_up >= 0 && k_down >= 0) {
      const double h11 = diag_element(m_i_up, +kJ);
      const double h22 = diag_element(m_i_down, -kJ);
      const double off = 0.5 * a * iplus(i_spin, m_i_up);
      const double avg = 0.5 * (h11 + h22);
      const double half_diff = 0.5 * (h11 - h22);
      const double hyp = std::hypot(half_diff, off);

      for (int branch : {-1, +1}) {
        ZeemanLevel lvl;
        lvl.energy_mhz = avg + branch * hyp;
        lvl.label = {branch < 0 ? f_low : f_high, m_f};
        lvl.m_f = m_f;
        lvl.amplitude.assign(dim, 0.0);
        // Eigenvector from the better-conditioned of the two row relations.
        double c_up, c_down;
        if (std::abs(lvl.energy_mhz - h11) > std::abs(lvl.energy_mhz - h22)) {
          c_down = lvl.energy_mhz - h11;
          c_up = off;
        } else {
          c_up = lvl.energy_mhz - h22;
          c_down = off;
        }
        const double norm = std::hypot(c_up, c_down);
        if (norm > 0.0) {
          c_up /= norm;
          c_down /= norm;
        } else {  // fully degenerate block (a == 0 limit); pick basis vectors
          c_up = branch < 0 ? 1.0 : 0.0;
          c_down = branch < 0 ? 0.0 : 1.0;
        }
        if (c_up < 0.0 || (c_up == 0.0 && c_down < 0.0)) {
          c_up = -c_up;
          c_down = -c_down;
        }
        lvl.amplitude[k_up] = c_up;
        lvl.amplitude[k_down] = c_down;
        spec.levels.push_back(std::move(lvl));
      }
    } else {
      // Stretched one-dimensional block.
      const bool up = k_up >= 0;
      const double m_i = up ? m_i_up : m_i_down;
      const double m_j = up ? +kJ : -kJ;
      ZeemanLevel lvl;
      lvl.energy_mhz = diag_element(m_i, m_j);
      lvl.label = {i_spin + kJ, m_f};
      lvl.m_f = m_f;
      lvl.amplitude.assign(dim, 0.0);
      lvl.amplitude[up ? k_up : k_down] = 1.0;
      spec.levels.push_back(std::move(lvl));
    }
  }

  std::stable_sort(spec.levels.begin(), spec.levels.end(),
                   [](const ZeemanLevel& x, const ZeemanLevel& y) {
                     return x.energy_mhz < y.energy_mhz;
                   });
  return spec;
}

namespace {

const ZeemanLevel& find_level(const ZeemanSpectrum& spec, const LevelLabel& label) {
  for (const auto& lvl : spec.levels)
    if (same_label(lvl.label, label)) return lvl;
  throw invalid_input_error("unknown level label (F=" + std::to_string(label.f) +
                            ", mF=" + std::to_string(label.m_f) + ")");
}

}  // namespace

double transition_frequency(const AtomSpec& atom, double b_gauss,
                            const LevelLabel& lower, const LevelLabel& upper) {
  const ZeemanSpectrum spec = zeeman_spectrum(atom, b_gauss);
  return find_level(spec, upper).energy_mhz - find_level(spec, lower).energy_mhz;
}

double field_for_transition(const AtomSpec& atom, const LevelLabel& lower,
                            const LevelLabel& upper, double target_mhz) {
  const double f0 = transition_frequency(atom, 0.0, lower, upper);
  if (target_mhz < f0)
    throw no_solution_error("target " + std::to_string(target_mhz) +
                            " MHz lies below the zero-field transition " +
                            std::to_string(f0) + " MHz");

  double b_hi = 100.0;
  while (transition_frequency(atom, b_hi, lower, upper) < target_mhz) {
    b_hi *= 2.0;
    if (b_hi > 1.0e7)
      throw no_solution_error("transition never reaches " +
                              std::to_string(target_mhz) + " MHz below 1e7 G");
  }

  double lo = 0.0, hi = b_hi;
  for (int iter = 0; iter < 200 && (hi - lo) > 1e-10 * std::max(1.0, hi); ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (transition_frequency(atom, mid, lower, upper) < target_mhz)
      lo = mid;
    else
      hi = mid;
  }
  const double b = 0.5 * (lo + hi);
  if (std::abs(transition_frequency(atom, b, lower, upper) - target_mhz) >= 1e-3)
    throw no_solution_error("bisection did not reach the 1 kHz tolerance; "
                            "the transition is not monotone on the bracket");
  return b;
}

std::vector<double> thermal_populations(const AtomSpec& atom, double b_gauss,
                                        double temp_k) {
  if (!(temp_k > 0.0))
    throw invalid_input_error("temperature must be > 0 K");
  const ZeemanSpectrum spec = zeeman_spectrum(atom, b_gauss);
  const double e_min = spec.levels.front().energy_mhz;

  std::vector<double> p(spec.levels.size());
  double norm = 0.0;
  for (size_t i = 0; i < spec.levels.size(); ++i) {
    const double de = spec.levels[i].energy_mhz - e_min;
    p[i] = std::exp(-de * constants::kKelvinPerMHz / temp_k);
    norm += p[i];
  }
  for (double& v : p) v /= norm;
  return p;
}

double population_of(const ZeemanSpectrum& spec, const std::vector<double>& p,
                     const LevelLabel& label) {
  if (p.size() != spec.levels.size())
    throw invalid_input_error("population vector does not match the spectrum");
  for (size_t i = 0; i < spec.levels.size(); ++i)
    if (same_label(spec.levels[i].label, label)) return p[i];
  throw invalid_input_error("unknown level label");
}

double population_of_f(const ZeemanSpectrum& spec, const std::vector<double>& p,
                       double f) {
  if (p.size() != spec.levels.size())
    throw invalid_input_error("population vector does not match the spectrum");
  double sum = 0.0;
  bool found = false;
  for (size_t i = 0; i < spec.levels.size(); ++i)
    if (twice(spec.levels[i].label.f) == twice(f)) {
      sum += p[i];
      found = true;
    }
  if (!found) throw invalid_input_error("no levels with F=" + std::to_string(f));
  return sum;
}

double transition_matrix_element(const AtomSpec& atom, double b_gauss,
                                 const LevelLabel& lower,
                                 const LevelLabel& upper) {
  const ZeemanSpectrum spec = zeeman_spectrum(atom, b_gauss);
  const ZeemanLevel& lo = find_level(spec, lower);
  const ZeemanLevel& up = find_level(spec, upper);

  // Jx couples |m_I, -1/2> and |m_I, +1/2> with element 1/2.
  double elem = 0.0;
  for (size_t k = 0; k < spec.basis.size(); ++k) {
    const auto [m_i, m_j] = spec.basis[k];
    for (size_t q = 0; q < spec.basis.size(); ++q) {
      const auto [n_i, n_j] = spec.basis[q];
      if (twice(m_i) == twice(n_i) && std::lround(2.0 * std::abs(m_j - n_j)) == 2)
        elem += up.amplitude[k] * 0.5 * lo.amplitude[q];
    }
  }
  return std::abs(elem);
}

}  // namespace spinres::atomkit
