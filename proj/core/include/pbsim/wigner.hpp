#pragma once

#include <cstdint>
#include <memory>

#include "pbsim/dynamics.hpp"

namespace pbsim {

struct WignerConfig {
  int trajectories = 100;
  std::uint64_t seed = 0;
  // Fraction of the momentum lattice that receives vacuum noise: a mode is
  // noised when |k_axis| <= fraction * k_max_axis on every axis. 1 = all.
  double mode_fraction = 1.0;
  int threads = 1;
  // When positive, mean density and momentum-density maps are also
  // accumulated at the step nearest this instant, so in-trap observables
  // can be read mid-run while the boundary record keeps integrating.
  double capture_time = 0.0;

  void validate() const;
};

// Deterministic complex Gaussian with <|eta|^2> = 1/2 (variance 1/4 per
// quadrature), keyed by (seed, trajectory, component, mode). Counter
// based: values never depend on how many other draws happened, so
// trajectory j is identical in any ensemble size.
cplx vacuum_noise(std::uint64_t seed, std::uint64_t trajectory, int component,
                  std::uint64_t mode);

// Number of momentum modes selected by mode_fraction on this grid.
long noised_mode_count(const Grid& g, double mode_fraction);

// One stochastic initial state: the condensate amplitude in m = +1 plus
// half a quantum of noise in every selected momentum mode of every
// component. Mean added population is 3 * noised_mode_count / 2 atoms.
SpinorField sample_initial(const ComplexField& condensate_mp1,
                           const WignerConfig& cfg, int trajectory);

// Trajectory-ensemble statistics on the grid, flat layout. Means are
// vacuum subtracted: position densities drop noised_modes / (2 V_box),
// momentum densities drop 1/(2 dVk) on every noised mode, so expectation
// values of an empty field vanish.
struct EnsembleMoments {
  std::shared_ptr<const Grid> grid;
  int trajectories = 0;
  long noised_modes = 0;
  std::array<std::vector<double>, 3> mean_density;
  std::array<std::vector<double>, 3> var_density;  // sample variance, n-1
  std::array<std::vector<double>, 3> mean_momentum_density;
};

// Mid-run snapshot moments (vacuum subtracted like EnsembleMoments).
struct CaptureMoments {
  double time = 0.0;
  std::array<std::vector<double>, 3> mean_density;
  std::array<std::vector<double>, 3> mean_momentum_density;
};

struct EnsembleRunResult {
  EnsembleMoments moments;
  BoundaryFluxRecord mean_flux;  // per-trajectory average
  std::array<double, 3> mean_removed{0.0, 0.0, 0.0};
  int completed = 0;
  CaptureMoments capture;  // filled when capture_time > 0
};

// Runs `trajectories` independent noisy evolutions and accumulates
// moments, the mean boundary flux and mean absorber losses.
EnsembleRunResult run_ensemble(const ComplexField& condensate_mp1,
                               const PhysicsParams& p,
                               const EvolutionConfig& evolution,
                               const WignerConfig& cfg);

}  // namespace pbsim
