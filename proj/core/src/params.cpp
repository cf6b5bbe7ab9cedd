#include "pbsim/params.hpp"

#include <cmath>
#include <string>

#include "pbsim/errors.hpp"

namespace pbsim {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

int ScatteringMatrix::idx(int m) {
  if (m < -1 || m > 1) throw config_error("sublevel index must be -1, 0 or +1");
  return m + 1;
}

ScatteringMatrix ScatteringMatrix::helium() {
  ScatteringMatrix s;
  for (int i = -1; i <= 1; ++i)
    for (int j = i; j <= 1; ++j) s.set(i, j, 7.51e-9);
  s.set(1, -1, 3.33e-9);
  s.set(0, 0, 5.56e-9);
  return s;
}

ScatteringMatrix ScatteringMatrix::ideal() { return ScatteringMatrix{}; }

void ScatteringMatrix::set(int m_row, int m_col, double meters) {
  a_[idx(m_row)][idx(m_col)] = meters;
  a_[idx(m_col)][idx(m_row)] = meters;
}

void PhysicsParams::validate() const {
  if (!(atom_mass_ > 0.0) || !std::isfinite(atom_mass_))
    throw config_error("atom mass must be positive");
  for (int axis = 0; axis < 3; ++axis) {
    if (!(trap_freqs[axis] >= 0.0) || !std::isfinite(trap_freqs[axis]))
      throw config_error("trap frequency on axis " + std::to_string(axis) +
                         " must be finite and non-negative");
  }
  if (!std::isfinite(rabi_freq) || rabi_freq < 0.0)
    throw config_error("rabi frequency must be finite and non-negative");
  if (!std::isfinite(detuning)) throw config_error("detuning must be finite");
  if (!std::isfinite(gravity)) throw config_error("gravity must be finite");
  if (!(atom_number > 0.0) || !std::isfinite(atom_number))
    throw config_error("atom number must be positive");
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j) {
      const double a = scattering(i, j);
      if (!std::isfinite(a) || a < 0.0)
        throw config_error("scattering lengths must be finite and non-negative");
    }
  if (!std::isfinite(penning_rate) || penning_rate < 0.0)
    throw config_error(
        "penning rate constant must be set explicitly and non-negative");
}

double interaction_strength(const PhysicsParams& p, int m_row, int m_col) {
  return 4.0 * kPi * p.hbar() * p.hbar() * p.scattering(m_row, m_col) /
         p.atom_mass();
}

double effective_interaction_strength(const PhysicsParams& p, int m_row,
                                      int m_col, int dims,
                                      double transverse_length) {
  if (dims < 1 || dims > 3) throw config_error("dims must be 1, 2 or 3");
  const double u3 = interaction_strength(p, m_row, m_col);
  if (dims == 3) return u3;
  if (!(transverse_length > 0.0))
    throw config_error("transverse length must be positive for dims < 3");
  const double norm = std::sqrt(2.0 * kPi) * transverse_length;
  return u3 / std::pow(norm, 3 - dims);
}

double kappa(const PhysicsParams& p) {
  return p.scattering(0, 0) / p.scattering(1, 1);
}

double mean_trap_freq(const PhysicsParams& p, int dims) {
  double prod = 1.0;
  for (int axis = 0; axis < dims; ++axis) prod *= p.trap_freqs[axis];
  return std::pow(prod, 1.0 / dims);
}

double oscillator_length(const PhysicsParams& p, int axis) {
  return std::sqrt(p.hbar() / (p.atom_mass() * p.trap_freqs[axis]));
}

double tf_chemical_potential(const PhysicsParams& p) {
  const double wbar = mean_trap_freq(p, 3);
  const double abar = std::sqrt(p.hbar() / (p.atom_mass() * wbar));
  return 0.5 * p.hbar() * wbar *
         std::pow(15.0 * p.atom_number * p.scattering(1, 1) / abar, 0.4);
}

double tf_radius(const PhysicsParams& p, int axis) {
  const double mu = tf_chemical_potential(p);
  return std::sqrt(2.0 * mu / p.atom_mass()) / p.trap_freqs[axis];
}

}  // namespace pbsim
