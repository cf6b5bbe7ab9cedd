#pragma once

#include <array>

#include "pbsim/constants.hpp"

namespace pbsim {

// s-wave scattering lengths a(m, m') between Zeeman sublevels m, m' of a
// spin-1 gas, indexed by magnetic quantum number in {-1, 0, +1}. Symmetric
// by construction.
class ScatteringMatrix {
 public:
  // Metastable helium values: a(+1,-1) = 3.33 nm, a(0,0) = 5.56 nm and
  // all remaining pairs 7.51 nm.
  static ScatteringMatrix helium();

  // All entries zero: an ideal (non-interacting) gas.
  static ScatteringMatrix ideal();

  double operator()(int m_row, int m_col) const {
    return a_[idx(m_row)][idx(m_col)];
  }
  // Sets a(m_row, m_col) and its mirror entry. Length in meters.
  void set(int m_row, int m_col, double meters);

 private:
  static int idx(int m);
  std::array<std::array<double, 3>, 3> a_{};
};

// Static experiment parameters. Fundamental constants are fixed at
// construction; everything else is a plain knob. SI units throughout,
// angular frequencies in rad/s.
class PhysicsParams {
 public:
  explicit PhysicsParams(double atom_mass_kg = constants::he4_mass)
      : atom_mass_(atom_mass_kg) {}

  double hbar() const { return hbar_; }
  double atom_mass() const { return atom_mass_; }

  std::array<double, 3> trap_freqs{0.0, 0.0, 0.0};  // rad/s, per axis
  double rabi_freq = 0.0;                           // rad/s
  double detuning = 0.0;                            // rad/s
  double gravity = constants::standard_gravity;     // m/s^2
  double atom_number = 0.0;
  ScatteringMatrix scattering = ScatteringMatrix::helium();
  // Two-body Penning ionization rate constant (m^3/s). Negative means
  // "never set"; validate() rejects it so every run states it explicitly.
  double penning_rate = -1.0;

  // Throws config_error on invalid or missing values.
  void validate() const;

 private:
  double hbar_ = constants::hbar;
  double atom_mass_ = constants::he4_mass;
};

// Pair interaction strength U(m, m') = 4 pi hbar^2 a(m, m') / M  [J m^3].
double interaction_strength(const PhysicsParams& p, int m_row, int m_col);

// Interaction strength for a d-dimensional simulation obtained by freezing
// the remaining 3-d axes into Gaussians of 1/e^2 half-width
// transverse_length: U_d = U_3d / (sqrt(2 pi) * transverse_length)^(3-d).
// Units J m^d. dims = 3 returns the bare strength.
double effective_interaction_strength(const PhysicsParams& p, int m_row,
                                      int m_col, int dims,
                                      double transverse_length);

// Ratio U(0,0) / U(+1,+1) entering the pair-production resonance condition.
double kappa(const PhysicsParams& p);

// Geometric mean of the trap frequencies over the first `dims` axes.
double mean_trap_freq(const PhysicsParams& p, int dims = 3);

// Harmonic oscillator length sqrt(hbar / (M w)) for the given axis.
double oscillator_length(const PhysicsParams& p, int axis);

// Thomas-Fermi chemical potential of the 3D condensate in the m = +1
// state: mu = (hbar wbar / 2) * (15 N a(1,1) / abar)^(2/5)  [J].
double tf_chemical_potential(const PhysicsParams& p);

// Thomas-Fermi radius along `axis` in 3D: sqrt(2 mu / M) / w_axis  [m].
double tf_radius(const PhysicsParams& p, int axis);

}  // namespace pbsim
