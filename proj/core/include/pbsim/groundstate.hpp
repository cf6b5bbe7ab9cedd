#pragma once

#include <memory>
#include <vector>

#include "pbsim/field.hpp"
#include "pbsim/params.hpp"

namespace pbsim {

// Harmonic trap potential 0.5 M sum_i w_i^2 x_i^2 sampled on the grid,
// flat storage matching field layout. Units J.
std::vector<double> trap_potential(const PhysicsParams& p, const Grid& g);

// Gaussian width used to reduce the contact interaction to dims < 3:
// geometric mean of the oscillator lengths of the frozen axes. Throws
// config_error if a frozen axis has zero trap frequency.
double default_transverse_length(const PhysicsParams& p, int dims);

// Thomas-Fermi profile of the m = +1 condensate on the grid:
// |psi|^2 = max(0, mu_d - V) / U_d with the chemical potential chosen so
// the analytic profile holds atom_number atoms in d dimensions; phase
// zero; renormalized to atom_number after sampling. transverse_length 0
// means the default reduction width. Throws config_error for an ideal gas.
ComplexField thomas_fermi_profile(const PhysicsParams& p,
                                  std::shared_ptr<const Grid> grid,
                                  double transverse_length = 0.0);

// Analytic d-dimensional Thomas-Fermi chemical potential for interaction
// strength u_eff (J m^d). The 3D value coincides with
// tf_chemical_potential when u_eff is the bare strength.
double tf_chemical_potential_dim(const PhysicsParams& p, int dims,
                                 double u_eff);

struct GroundStateOptions {
  double tolerance = 1e-8;           // relative energy change per step
  int max_iters = 20000;
  double initial_step_factor = 1e-2; // dtau = factor / max trap frequency
  double transverse_length = 0.0;    // 0: default reduction width
};

struct GroundStateResult {
  ComplexField psi;            // m = +1 amplitude, position space, norm N
  double chemical_potential;   // <psi|H_gp|psi> / N  [J]
  double kinetic_energy;       // J
  double trap_energy;          // J
  double interaction_energy;   // J
  int iterations;
  double residual;             // ||H_gp psi - mu psi|| / (|mu| ||psi||)
  double total_energy() const {
    return kinetic_energy + trap_energy + interaction_energy;
  }
};

// Imaginary-time propagation of the single-component (m = +1) condensate:
// split-step with renormalization to N after every step, the imaginary
// step halved whenever the energy would rise, stopping when the relative
// energy change falls below tolerance. Throws numeric_error on
// non-convergence or non-finite state.
GroundStateResult solve_ground_state(const PhysicsParams& p,
                                     std::shared_ptr<const Grid> grid,
                                     const GroundStateOptions& opts = {});

// Energy components of a trial state under the single-component
// Gross-Pitaevskii functional; used by tests and diagnostics.
struct EnergyBreakdown {
  double kinetic;
  double trap;
  double interaction;
  double total() const { return kinetic + trap + interaction; }
};
EnergyBreakdown gp_energy(const ComplexField& psi, const PhysicsParams& p,
                          double u_eff);

}  // namespace pbsim
