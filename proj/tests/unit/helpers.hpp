#pragma once

#include <cmath>
#include <complex>
#include <random>

#include "pbsim/dynamics.hpp"
#include "pbsim/field.hpp"
#include "pbsim/grid.hpp"
#include "pbsim/params.hpp"

namespace testutil {

constexpr double kPi = 3.14159265358979323846;

// Helium-like parameter set used across tests; every value written out so
// the tests do not depend on library defaults.
inline pbsim::PhysicsParams helium_params() {
  pbsim::PhysicsParams p;
  p.atom_number = 1e5;
  p.trap_freqs = {2.0 * kPi * 55.0, 2.0 * kPi * 1020.0, 2.0 * kPi * 1020.0};
  p.rabi_freq = 2.0 * kPi * 350.0;
  p.detuning = -2.0 * kPi * 1500.0;
  p.penning_rate = 1.0e-16;
  p.scattering = pbsim::ScatteringMatrix::helium();
  return p;
}

// Interaction-free parameters for analytic oracles.
inline pbsim::PhysicsParams ideal_params(double freq_hz) {
  pbsim::PhysicsParams p;
  p.atom_number = 1.0;
  p.trap_freqs = {2.0 * kPi * freq_hz, 2.0 * kPi * freq_hz,
                  2.0 * kPi * freq_hz};
  p.penning_rate = 0.0;
  p.scattering = pbsim::ScatteringMatrix::ideal();
  return p;
}

// Deterministic pseudo-random complex field, independent of library RNG.
inline pbsim::ComplexField random_field(std::shared_ptr<const pbsim::Grid> g,
                                        unsigned seed,
                                        pbsim::Space space =
                                            pbsim::Space::position) {
  pbsim::ComplexField f(std::move(g), space);
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (auto& v : f.values()) v = {gauss(rng), gauss(rng)};
  return f;
}

// Gaussian wave packet exp(-(x-x0)^2/(4 sigma^2) + i k0 x) along axis 0,
// ground-state width in any transverse axes, normalized to `atoms`.
inline pbsim::ComplexField gaussian_packet(
    std::shared_ptr<const pbsim::Grid> g, double x0, double sigma, double k0,
    double atoms = 1.0) {
  pbsim::ComplexField f(g, pbsim::Space::position);
  auto v = f.values();
  const int n0 = g->size(0);
  const int n1 = g->dims() > 1 ? g->size(1) : 1;
  const int n2 = g->dims() > 2 ? g->size(2) : 1;
  long flat = 0;
  for (int i2 = 0; i2 < n2; ++i2)
    for (int i1 = 0; i1 < n1; ++i1)
      for (int i0 = 0; i0 < n0; ++i0, ++flat) {
        const double x = g->coordinate(0, i0) - x0;
        double arg = -x * x / (4.0 * sigma * sigma);
        if (g->dims() > 1) {
          const double y = g->coordinate(1, i1);
          arg += -y * y / (4.0 * sigma * sigma);
        }
        if (g->dims() > 2) {
          const double z = g->coordinate(2, i2);
          arg += -z * z / (4.0 * sigma * sigma);
        }
        v[flat] = std::polar(std::exp(arg), k0 * (x + x0));
      }
  const double norm = pbsim::total_number(f);
  const double scale = std::sqrt(atoms / norm);
  for (auto& z : v) z *= scale;
  return f;
}

// Mean position along axis 0, <x> = sum x |psi|^2 dV / N.
inline double mean_position(const pbsim::ComplexField& f, int axis) {
  const auto& g = f.grid();
  const auto v = f.values();
  double num = 0.0, den = 0.0;
  for (long i = 0; i < g.point_count(); ++i) {
    const auto idx = g.unflatten(i);
    const double w = std::norm(v[static_cast<std::size_t>(i)]);
    num += g.coordinate(axis, idx[static_cast<std::size_t>(axis)]) * w;
    den += w;
  }
  return num / den;
}

}  // namespace testutil
