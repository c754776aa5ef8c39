// atomkit.hpp — Hyperfine/Zeeman level structure of a J = 1/2 alkali atom.
//
// The Hamiltonian (divided by h, everything in MHz and gauss) is
//
//   H = a_hfs * a_scale * (I.J) + mu_B_[MHz/G] * B * (g_j * Jz + g_i * Iz)
//
// diagonalized blockwise in the conserved total projection m_F = m_I + m_J;
// for J = 1/2 every block is at most 2x2 and is solved in closed form.
// Signs follow the usual convention (g_j > 0, ground hyperfine constant > 0),
// which places |F=1, m_F=+1> lowest in energy at large positive field.
#pragma once

#include <utility>
#include <vector>

namespace spinres::atomkit {

// Static atom parameters.  a_scale is a multiplicative correction applied to
// the hyperfine constant only (host-matrix shift), g factors stay free-atom.
struct AtomSpec {
  double nuclear_spin{1.5};   // I; J = 1/2 implied throughout
  double a_hfs_mhz{885.81306440};
  double a_scale{1.0};        // dimensionless multiplier on a_hfs_mhz
  double g_j{2.00229600};     // electronic Lande factor
  double g_i{-0.00080461080}; // nuclear factor in Bohr-magneton units
};

// Sodium ground state with an optional hyperfine scale.
AtomSpec sodium(double a_scale = 1.0);

// Adiabatic level label (F, m_F), continued by energy order within each m_F
// block from the zero-field multiplets (levels of equal m_F never cross).
struct LevelLabel {
  double f{0};
  double m_f{0};
};

struct ZeemanLevel {
  double energy_mhz{0};            // eigenvalue of H/h
  LevelLabel label;                // adiabatic (F, m_F)
  double m_f{0};                   // conserved projection (= label.m_f)
  std::vector<double> amplitude;   // eigenvector over the |m_I, m_J> basis
};

struct ZeemanSpectrum {
  double b_gauss{0};
  std::vector<std::pair<double, double>> basis;  // (m_I, m_J) per amplitude row
  std::vector<ZeemanLevel> levels;               // sorted ascending in energy
};

// All 2*(2I+1) levels at field b_gauss (>= 0), sorted ascending.
// Throws invalid_input_error for non-physical spins or parameters.
ZeemanSpectrum zeeman_spectrum(const AtomSpec& atom, double b_gauss);

// E(upper) - E(lower) in MHz at the given field.
// Throws invalid_input_error for unknown labels.
double transition_frequency(const AtomSpec& atom, double b_gauss,
                            const LevelLabel& lower, const LevelLabel& upper);

// Field (gauss) at which the lower->upper transition equals target_mhz,
// located by bisection on an automatically expanded bracket starting at 0 G.
// The result satisfies |transition - target| < 1e-3 MHz.
// Throws no_solution_error when the target is never reached on the bracket.
double field_for_transition(const AtomSpec& atom, const LevelLabel& lower,
                            const LevelLabel& upper, double target_mhz);

// Boltzmann populations at temperature temp_k (> 0), aligned with the level
// order of zeeman_spectrum(atom, b_gauss).  Sums to 1 by construction.
std::vector<double> thermal_populations(const AtomSpec& atom, double b_gauss,
                                        double temp_k);

// Population of one adiabatic level / of a whole F multiplet.
double population_of(const ZeemanSpectrum& spec, const std::vector<double>& p,
                     const LevelLabel& label);
double population_of_f(const ZeemanSpectrum& spec, const std::vector<double>& p,
                       double f);

// |<upper| Jx |lower>| in the field-dressed basis: the electron-spin matrix
// element that sets the magnetic microwave coupling of the transition.
double transition_matrix_element(const AtomSpec& atom, double b_gauss,
                                 const LevelLabel& lower,
                                 const LevelLabel& upper);

}  // namespace spinres::atomkit
