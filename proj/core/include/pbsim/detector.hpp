#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "pbsim/dynamics.hpp"
#include "pbsim/params.hpp"

namespace pbsim {

struct DetectorConfig {
  double fall_height = 0.04;    // m, trap center to detector plane
  double pixel_pitch = 150e-6;  // m
  double halfwidth = 8e-3;      // m, image covers [-halfwidth, halfwidth)
  double blur_width = 200e-6;   // m, Gaussian point-spread width
  bool blur_is_fwhm = false;    // width is sigma unless set
  double flat_epsilon = 1e-2;   // gain floor, relative to mean gain
  double max_masked_fraction = 0.05;

  void validate() const;
};

// Pixelated areal density (atoms / m^2) on the detector plane, centered:
// pixel (ix, iy) spans x in [(ix - nx/2) p, (ix - nx/2 + 1) p).
struct DetectorImage {
  int nx = 0, ny = 0;
  double pitch = 0.0;        // m
  double fall_height = 0.0;  // m
  double total_atoms = 0.0;  // deposited counts, including later blurring
  double masked_fraction = 0.0;
  std::vector<double> values;  // [iy][ix]

  static DetectorImage zeros(int nx, int ny, double pitch);
  std::size_t flat(int iy, int ix) const {
    return static_cast<std::size_t>(iy) * nx + ix;
  }
  double& at(int iy, int ix) { return values[flat(iy, ix)]; }
  double at(int iy, int ix) const { return values[flat(iy, ix)]; }
  double pixel_center_x(int ix) const { return (ix - nx / 2 + 0.5) * pitch; }
  double pixel_center_y(int iy) const { return (iy - ny / 2 + 0.5) * pitch; }
  // Sum of values * pitch^2: the counts currently on the image.
  double integral() const;
};

struct BallisticLanding {
  double t_fall;  // s
  double x, y;    // m, displacement on the detector plane
};

// Free fall through fall_height starting with transverse wavenumbers
// (kx, ky) and downward speed vz_down: solves
//   h = vz t + g t^2 / 2
// and displaces by hbar k t / M. Exact closed form.
BallisticLanding ballistic_landing(double kx, double ky, double vz_down,
                                   double fall_height, const PhysicsParams& p);

// Classical transport of every flux bin to the detector plane; atoms
// landing outside the image are dropped (tracked via total_atoms vs
// integral).
// Pixels per image side implied by the configured halfwidth and pitch.
int detector_pixel_count(const DetectorConfig& cfg);

DetectorImage propagate_to_detector(const BoundaryFluxRecord& flux,
                                    const PhysicsParams& p,
                                    const DetectorConfig& cfg);

// Separable Gaussian point-spread convolution, count preserving for mass
// away from the image edge.
DetectorImage gaussian_blur(const DetectorImage& img, double width,
                            bool width_is_fwhm);

// Divides by the gain map (normalized to unit mean); pixels with gain
// below epsilon are zeroed and counted. Throws numeric_error when the
// masked fraction exceeds the given limit.
DetectorImage flat_field_normalize(const DetectorImage& img,
                                   const DetectorImage& gain, double epsilon,
                                   double max_masked_fraction);

// Synthetic detector gain maps for pipeline exercises.
enum class FlatModel { uniform, ripple, blotches };
DetectorImage synthesize_flat(int nx, int ny, double pitch, FlatModel model,
                              double amplitude, std::uint64_t seed);

// Image CSV: one row per pixel row, comma separated, plus a key=value
// sidecar at <path>.meta carrying geometry and counters.
void write_image_csv(const std::filesystem::path& path,
                     const DetectorImage& img);
DetectorImage read_image_csv(const std::filesystem::path& path);

}  // namespace pbsim
