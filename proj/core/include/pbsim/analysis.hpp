#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <vector>

#include "pbsim/detector.hpp"
#include "pbsim/dynamics.hpp"
#include "pbsim/field.hpp"
#include "pbsim/params.hpp"

namespace pbsim {

// Inputs for the pair-production resonance condition. Densities are
// |psi|^2 values (m^-3, or m^-d for reduced-dimensional runs with u
// reduced accordingly).
struct ResonanceInput {
  double density_m1 = 0.0;  // trapped component
  double density_m0 = 0.0;  // outcoupled component
  double u = 0.0;           // J m^3, the m=+1 self/cross strength
  double kappa = 0.0;       // U(0,0) / U(1,1)
  double atom_mass = 0.0;   // kg
  double hbar = 0.0;        // J s
};

// Wavenumber of the energy-momentum resonance for pair scattering:
//   k = sqrt(2 M u (2 sqrt(n1 n0) - n1 - kappa n0)) / hbar.
// Empty when the radicand is negative (no resonance, e.g. weak
// outcoupling).
std::optional<double> resonant_wavenumber(const ResonanceInput& in);

// Interaction-energy change of a density grating of amplitude epsilon
// (density units) at wavenumber k on a background density n, integrated
// over x in [x0, x1] with composite Simpson quadrature:
//   dE = u (1 - kappa) * integral( 2 n eps cos(kx) - eps^2 cos^2(kx) ) dx
// times cross_section. Over whole periods this is -u (1-kappa) eps^2 V/2.
// intervals 0 picks an even count resolving the oscillation.
double interaction_energy_delta(double background_density, double epsilon,
                                double k, double u, double kappa, double x0,
                                double x1, double cross_section = 1.0,
                                long intervals = 0);

// One-dimensional momentum spectrum: |psi(k)|^2 summed over the transverse
// axes, in atoms per bin, with bin centers ascending in k.
struct Spectrum {
  std::vector<double> k;       // rad/m, ascending
  std::vector<double> weight;  // atoms per bin
  double bin_width = 0.0;
};
Spectrum momentum_spectrum(const ComplexField& field, int axis);
// Same marginalization for an already-averaged momentum density map
// (e.g. ensemble moments), flat grid layout.
Spectrum spectrum_from_momentum_density(const std::vector<double>& density,
                                        const Grid& g, int axis);

// CSV round-trip: `# spectrum bins=... bin_width=...` header, then
// `k,weight` rows (SI units).
void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& s);
Spectrum read_spectrum_csv(const std::filesystem::path& path);

struct GratingDetection {
  double k_peak = 0.0;        // rad/m, sub-bin refined
  double k_uncertainty = 0.0; // rad/m, half a bin
  double weight = 0.0;        // atoms in the peak bin
  double significance = 0.0;  // peak / background median
};

// Highest local maximum at |k| > exclusion_halfwidth, quadratically
// refined; empty when its significance over the background median falls
// below the threshold or no local maximum exists.
std::optional<GratingDetection> detect_grating(const Spectrum& spectrum,
                                               double exclusion_halfwidth,
                                               double significance_threshold = 5.0);

struct Region {
  double x0, x1, y0, y1;  // m, half-open box on the detector plane
  bool contains(double x, double y) const {
    return x >= x0 && x < x1 && y >= y0 && y < y1;
  }
  bool overlaps(const Region& other) const;
};

struct PeakReport {
  std::vector<std::array<double, 2>> peak_positions;  // centroids, m
  std::vector<double> fractions;      // of the total image counts
  double halo_radius = 0.0;           // m, 95th percentile containment
  bool has_grating = false;
  double grating_k = 0.0;             // rad/m, when supplied by the caller
  double grating_k_uncertainty = 0.0;
};

// Integrates the image over each (disjoint) region and reports fractions
// of the total counts plus the radial 95% containment. Throws
// numeric_error on an empty image, config_error on overlapping regions.
PeakReport peak_fractions(const DetectorImage& img,
                          const std::vector<Region>& regions);

// Four rectangles of half sizes (half_x, half_y) centered on the
// reflection images (+-xc, +-yc) of the brightest pixel with
// |x| >= min_abs_x and |y| >= min_abs_y.
std::vector<Region> symmetric_peak_regions(const DetectorImage& img,
                                           double min_abs_x, double min_abs_y,
                                           double half_x, double half_y);

// Column profile along `axis` (0 = x, 1 = y): image integrated across the
// other axis, atoms per pixel column. band_halfwidth > 0 restricts the
// transverse integration to |perp| <= band_halfwidth.
std::vector<double> axis_profile(const DetectorImage& img, int axis,
                                 double band_halfwidth = 0.0);

// Densities entering the resonance prediction, read off a simulated state:
// averaged over the RF-resonant shell (trap potential within band_fraction
// of hbar |detuning|), taken at the trap center, or taken at the point
// maximizing the resonance argument 2 sqrt(n1 n0) - n1 - kappa n0. The
// last one identifies the stall of the swept resonance, where stimulated
// scattering piles up and the outer peaks form.
enum class DensityProbe { surface_average, center, max_resonance };
struct ProbedDensities {
  double n1 = 0.0;
  double n0 = 0.0;
};
ProbedDensities probe_densities(const std::vector<double>& density_m1,
                                const std::vector<double>& density_m0,
                                const Grid& g, const PhysicsParams& p,
                                DensityProbe probe,
                                double band_fraction = 0.1);
ProbedDensities probe_densities(const SpinorField& state,
                                const PhysicsParams& p, DensityProbe probe,
                                double band_fraction = 0.1);

}  // namespace pbsim
