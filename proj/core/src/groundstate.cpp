#include "pbsim/groundstate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pbsim/errors.hpp"

namespace pbsim {

namespace {
constexpr double kPi = 3.14159265358979323846;

void renormalize(ComplexField& psi, double atoms) {
  const double n = total_number(psi);
  if (!(n > 0.0)) throw numeric_error("state norm vanished");
  const double s = std::sqrt(atoms / n);
  for (auto& v : psi.values()) v *= s;
}

std::vector<double> kinetic_energy_table(const PhysicsParams& p,
                                         const Grid& g) {
  std::vector<double> t(static_cast<std::size_t>(g.point_count()));
  for (long flat = 0; flat < g.point_count(); ++flat) {
    const auto idx = g.unflatten(flat);
    double k2 = 0.0;
    for (int axis = 0; axis < g.dims(); ++axis) {
      const double k = g.wavenumber(axis, idx[axis]);
      k2 += k * k;
    }
    t[static_cast<std::size_t>(flat)] =
        p.hbar() * p.hbar() * k2 / (2.0 * p.atom_mass());
  }
  return t;
}
}  // namespace

std::vector<double> trap_potential(const PhysicsParams& p, const Grid& g) {
  std::vector<double> v(static_cast<std::size_t>(g.point_count()));
  for (long flat = 0; flat < g.point_count(); ++flat) {
    const auto idx = g.unflatten(flat);
    double acc = 0.0;
    for (int axis = 0; axis < g.dims(); ++axis) {
      const double w = p.trap_freqs[axis];
      const double x = g.coordinate(axis, idx[axis]);
      acc += 0.5 * p.atom_mass() * w * w * x * x;
    }
    v[static_cast<std::size_t>(flat)] = acc;
  }
  return v;
}

double default_transverse_length(const PhysicsParams& p, int dims) {
  if (dims >= 3) throw config_error("no frozen axes in a 3D simulation");
  double prod = 1.0;
  int count = 0;
  for (int axis = dims; axis < 3; ++axis) {
    if (!(p.trap_freqs[axis] > 0.0))
      throw config_error(
          "frozen axis needs a trap frequency or an explicit transverse "
          "length");
    prod *= oscillator_length(p, axis);
    ++count;
  }
  return std::pow(prod, 1.0 / count);
}

double tf_chemical_potential_dim(const PhysicsParams& p, int dims,
                                 double u_eff) {
  if (!(u_eff > 0.0))
    throw config_error("Thomas-Fermi limit needs repulsive interactions");
  const double m = p.atom_mass();
  const double n_atoms = p.atom_number;
  double wprod = 1.0;
  for (int axis = 0; axis < dims; ++axis) {
    if (!(p.trap_freqs[axis] > 0.0))
      throw config_error("Thomas-Fermi limit needs a confining trap");
    wprod *= p.trap_freqs[axis];
  }
  switch (dims) {
    case 1: {
      const double base = 3.0 * n_atoms * u_eff * wprod / 4.0;
      return std::pow(base, 2.0 / 3.0) * std::cbrt(m / 2.0);
    }
    case 2:
      return std::sqrt(n_atoms * u_eff * m * wprod / kPi);
    case 3: {
      const double base = 15.0 * n_atoms * u_eff * wprod *
                          std::pow(m, 1.5) / (8.0 * kPi * std::sqrt(8.0));
      return std::pow(base, 0.4);
    }
    default:
      throw config_error("dims must be 1, 2 or 3");
  }
}

ComplexField thomas_fermi_profile(const PhysicsParams& p,
                                  std::shared_ptr<const Grid> grid,
                                  double transverse_length) {
  const int dims = grid->dims();
  if (dims < 3 && transverse_length <= 0.0)
    transverse_length = default_transverse_length(p, dims);
  const double u_eff =
      effective_interaction_strength(p, 1, 1, dims, transverse_length);
  const double mu = tf_chemical_potential_dim(p, dims, u_eff);
  const auto v = trap_potential(p, *grid);

  ComplexField psi(grid, Space::position);
  auto vals = psi.values();
  for (long flat = 0; flat < grid->point_count(); ++flat) {
    const double n = std::max(0.0, (mu - v[static_cast<std::size_t>(flat)]) / u_eff);
    vals[flat] = cplx{std::sqrt(n), 0.0};
  }
  renormalize(psi, p.atom_number);
  return psi;
}

EnergyBreakdown gp_energy(const ComplexField& psi, const PhysicsParams& p,
                          double u_eff) {
  const Grid& g = psi.grid();
  EnergyBreakdown e{0.0, 0.0, 0.0};

  ComplexField mom = to_momentum(psi);
  const auto t = kinetic_energy_table(p, g);
  const auto mv = mom.values();
  for (long flat = 0; flat < mom.size(); ++flat)
    e.kinetic += t[static_cast<std::size_t>(flat)] * std::norm(mv[flat]);
  e.kinetic *= g.momentum_volume_element();

  const auto v = trap_potential(p, g);
  const auto pv = psi.values();
  double etrap = 0.0, eint = 0.0;
  for (long flat = 0; flat < psi.size(); ++flat) {
    const double n = std::norm(pv[flat]);
    etrap += v[static_cast<std::size_t>(flat)] * n;
    eint += n * n;
  }
  e.trap = etrap * g.volume_element();
  e.interaction = 0.5 * u_eff * eint * g.volume_element();
  return e;
}

GroundStateResult solve_ground_state(const PhysicsParams& p,
                                     std::shared_ptr<const Grid> grid,
                                     const GroundStateOptions& opts) {
  p.validate();
  const int dims = grid->dims();
  double wmax = 0.0;
  for (int axis = 0; axis < dims; ++axis)
    wmax = std::max(wmax, p.trap_freqs[axis]);
  if (!(wmax > 0.0))
    throw config_error("ground state needs a confining trap");

  double sigma = opts.transverse_length;
  if (dims < 3 && sigma <= 0.0) sigma = default_transverse_length(p, dims);
  const double u_eff = dims == 3
                           ? interaction_strength(p, 1, 1)
                           : effective_interaction_strength(p, 1, 1, dims, sigma);

  // Initial guess: Thomas-Fermi profile when interacting, otherwise the
  // exact oscillator Gaussian.
  ComplexField psi(grid, Space::position);
  if (u_eff > 0.0) {
    psi = thomas_fermi_profile(p, grid, sigma);
  } else {
    auto vals = psi.values();
    for (long flat = 0; flat < grid->point_count(); ++flat) {
      const auto idx = grid->unflatten(flat);
      double arg = 0.0;
      for (int axis = 0; axis < dims; ++axis) {
        const double a = oscillator_length(p, axis);
        const double x = grid->coordinate(axis, idx[axis]);
        arg += x * x / (2.0 * a * a);
      }
      vals[flat] = cplx{std::exp(-arg), 0.0};
    }
    renormalize(psi, p.atom_number);
  }

  const auto vtrap = trap_potential(p, *grid);
  const auto ktable = kinetic_energy_table(p, *grid);
  ComplexField scratch(grid, Space::position);
  ComplexField backup(grid, Space::position);

  double dtau = opts.initial_step_factor / wmax;
  const double dtau_floor = dtau * 1e-12;
  std::vector<double> half_kin(ktable.size());
  auto rebuild_half_kin = [&] {
    for (std::size_t i = 0; i < ktable.size(); ++i)
      half_kin[i] = std::exp(-ktable[i] * dtau / (2.0 * p.hbar()));
  };
  rebuild_half_kin();

  auto apply_half_kin = [&](ComplexField& f) {
    transform_inplace(f, scratch, Space::momentum);
    auto vals = f.values();
    for (long i = 0; i < f.size(); ++i)
      vals[i] *= half_kin[static_cast<std::size_t>(i)];
    transform_inplace(f, scratch, Space::position);
  };

  double e_prev = gp_energy(psi, p, u_eff).total();
  bool converged = false;
  int iter = 0;
  double e_now = e_prev;
  for (; iter < opts.max_iters; ++iter) {
    backup = psi;
    apply_half_kin(psi);
    {
      auto vals = psi.values();
      for (long i = 0; i < psi.size(); ++i) {
        const double pot = vtrap[static_cast<std::size_t>(i)] +
                           u_eff * std::norm(vals[i]);
        vals[i] *= std::exp(-pot * dtau / p.hbar());
      }
    }
    apply_half_kin(psi);
    renormalize(psi, p.atom_number);
    if (has_non_finite(psi))
      throw numeric_error("imaginary-time state became non-finite");

    e_now = gp_energy(psi, p, u_eff).total();
    const double scale = std::max({std::abs(e_now), std::abs(e_prev), 1e-300});
    if (e_now > e_prev + 1e-13 * scale) {
      // Step overshot; energy must not rise. Retry smaller.
      psi = backup;
      dtau *= 0.5;
      if (dtau < dtau_floor)
        throw numeric_error("imaginary-time step collapsed before convergence");
      rebuild_half_kin();
      e_now = e_prev;
      continue;
    }
    if (std::abs(e_now - e_prev) <= opts.tolerance * scale) {
      converged = true;
      ++iter;
      break;
    }
    e_prev = e_now;
  }
  if (!converged)
    throw numeric_error("ground state not converged after " +
                        std::to_string(opts.max_iters) +
                        " iterations, last relative energy change " +
                        std::to_string(std::abs(e_now - e_prev) /
                                       std::max(std::abs(e_now), 1e-300)));

  // Chemical potential and eigen-residual from H_gp psi.
  ComplexField hpsi = spectral_laplacian(psi);
  {
    const double c = -p.hbar() * p.hbar() / (2.0 * p.atom_mass());
    auto hv = hpsi.values();
    const auto pv = psi.values();
    for (long i = 0; i < hpsi.size(); ++i) {
      hv[i] = c * hv[i] + (vtrap[static_cast<std::size_t>(i)] +
                           u_eff * std::norm(pv[i])) *
                              pv[i];
    }
  }
  const double mu =
      inner_product(psi, hpsi).real() / p.atom_number;
  double res2 = 0.0;
  {
    const auto hv = hpsi.values();
    const auto pv = psi.values();
    for (long i = 0; i < hpsi.size(); ++i) res2 += std::norm(hv[i] - mu * pv[i]);
    res2 *= grid->volume_element();
  }
  const double residual =
      std::sqrt(res2) / (std::abs(mu) * std::sqrt(p.atom_number));

  const EnergyBreakdown e = gp_energy(psi, p, u_eff);
  return GroundStateResult{std::move(psi), mu,        e.kinetic, e.trap,
                           e.interaction,  iter, residual};
}

}  // namespace pbsim
