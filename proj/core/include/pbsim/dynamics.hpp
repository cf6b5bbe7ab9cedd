#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include "pbsim/field.hpp"
#include "pbsim/params.hpp"

namespace pbsim {

// Spin-1 order parameter. Components are stored by magnetic quantum
// number, index m + 1, so psi[0] is m = -1, psi[1] is m = 0, psi[2] is
// m = +1.
struct SpinorField {
  explicit SpinorField(std::shared_ptr<const Grid> grid);

  std::array<ComplexField, 3> psi;
  double time = 0.0;

  const Grid& grid() const { return psi[0].grid(); }
  const std::shared_ptr<const Grid>& grid_ptr() const {
    return psi[0].grid_ptr();
  }
  ComplexField& component(int m) { return psi[m + 1]; }
  const ComplexField& component(int m) const { return psi[m + 1]; }
  double component_number(int m) const { return total_number(psi[m + 1]); }
  double total_atoms() const;
  bool finite() const;
};

struct AbsorberSpec {
  bool enabled = true;
  double width_fraction = 0.15;  // of the box length, per side, each axis
  double strength = 0.0;         // peak damping rate 1/s; 0 = automatic
};

struct FluxBinning {
  int bin_factor = 4;    // momentum modes merged per output bin and axis
  double time_bin = 0.0; // s; 0 = t_final / 64
};

struct EvolutionConfig {
  double dt = 0.0;       // s; rounded so steps divide t_final exactly
  double t_final = 0.0;  // s
  bool gravity_on = false;
  // Rabi coupling is switched off after this instant (continuous-wave
  // outcoupling runs it to t_final).
  double rabi_off_time = std::numeric_limits<double>::infinity();
  double transverse_length = 0.0;  // 0 = default width for dims < 3
  AbsorberSpec absorber;
  bool record_flux = true;
  FluxBinning flux;
  int check_every = 100;  // non-finite screen cadence, steps
  // When set, a numerical abort writes component snapshots
  // <prefix>_mm1/m0/mp1.pbs before throwing.
  std::filesystem::path diagnostic_prefix;

  void validate(const Grid& g) const;
};

// Transverse-momentum histogram of atoms removed at the open boundary,
// resolved in time. In 3D the vertical axis (last axis) is traced out
// into a mean vertical velocity per bin; 1D and 2D runs have vz = 0.
struct BoundaryFluxRecord {
  int bins_x = 0, bins_y = 0;
  double dk_x = 0.0, dk_y = 0.0;  // bin widths (rad/m)
  double k0_x = 0.0, k0_y = 0.0;  // center of bin 0
  double time_bin = 0.0;          // s
  int time_bins = 0;

  std::vector<double> atoms;      // [t][iy][ix], atoms removed per bin
  std::vector<double> vz_weight;  // same shape, sum of atoms * vz_down

  double bin_center_x(int ix) const { return k0_x + ix * dk_x; }
  double bin_center_y(int iy) const { return k0_y + iy * dk_y; }
  std::size_t flat(int t, int iy, int ix) const {
    return (static_cast<std::size_t>(t) * bins_y + iy) * bins_x + ix;
  }
  double vz_mean(int t, int iy, int ix) const;
  double atom_total() const;
  // Accumulates another record with identical geometry (ensemble sums).
  void accumulate(const BoundaryFluxRecord& other);
  void scale(double factor);
};

// Writes/reads the flux record as CSV: comment header carrying the bin
// geometry, then rows t_bin_center,kx,ky,atoms,vz_mean for nonempty bins.
void write_flux_csv(const std::filesystem::path& path,
                    const BoundaryFluxRecord& rec);
BoundaryFluxRecord read_flux_csv(const std::filesystem::path& path);

// One exact Rabi rotation exp(-i theta Jx) with theta = 2 rabi_freq dt,
// applied pointwise. Unitary to machine precision.
SpinorField rabi_rotation(const SpinorField& s, double rabi_freq, double dt);

// One explicit-Euler substep of the Penning-ionization mean-field loss.
// transverse_length 0 means the default reduction width for dims < 3.
SpinorField penning_loss_step(const SpinorField& s, const PhysicsParams& p,
                              double dt, double transverse_length = 0.0);

// Instantaneous total loss rate dN/dt (negative, atoms/s) implied by the
// molecular-channel amplitude; the analytic counterpart of what
// penning_loss_step removes.
double penning_loss_rate(const SpinorField& s, const PhysicsParams& p,
                         double transverse_length = 0.0);

// One full split step (kinetic half, diagonal potential + interaction +
// detuning, Rabi rotation, Penning loss, kinetic half, absorber). Pure
// convenience wrapper used by tests; evolve() runs the same kernel with
// cached tables.
SpinorField step(const SpinorField& s, const PhysicsParams& p,
                 const EvolutionConfig& cfg);

using StepObserver = std::function<void(const SpinorField&, int step)>;

struct EvolveResult {
  SpinorField state;
  BoundaryFluxRecord flux;
  // Atoms removed by the absorber per component, index m + 1.
  std::array<double, 3> removed{0.0, 0.0, 0.0};
  int steps = 0;
  double dt_used = 0.0;
};

// Propagates the state to t_final. The observer, when set, runs after
// every step. Throws numeric_error if the state leaves the realm of
// finite numbers.
EvolveResult evolve(SpinorField state, const PhysicsParams& p,
                    const EvolutionConfig& cfg,
                    const StepObserver& observer = {});

// Absorber damping-rate profile s(x) >= 0 (1/s) for the grid, flat
// layout. Zero in the interior, rising as sin^2 to `strength` at the
// boundary over width_fraction of the box on each side.
std::vector<double> absorber_profile(const Grid& g, double width_fraction,
                                     double strength);

// Automatic absorber peak strength for this grid resolution.
double absorber_auto_strength(const Grid& g, const PhysicsParams& p,
                              double width_fraction);

// Intensity fraction passing through the absorbing skin unabsorbed for
// atoms of the given speed; a sanity figure for choosing the strength.
double absorber_transmission(double strength, double width, double speed);

}  // namespace pbsim
