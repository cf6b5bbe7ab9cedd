#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>

#include "pbsim/analysis.hpp"
#include "pbsim/detector.hpp"
#include "pbsim/dynamics.hpp"
#include "pbsim/params.hpp"
#include "pbsim/wigner.hpp"

namespace pbsim {

// Whole-run configuration, parsed from a plain-text file of
// `section.key = value` lines (SI units, '#' comments). Unknown keys are
// rejected. The Penning rate constant has no default and must appear.
struct SimConfig {
  // physics
  double atom_number = 1e5;
  double trap_freq_hz[3] = {55.0, 1020.0, 1020.0};
  double rabi_freq_hz = 350.0;
  double detuning_hz = -2000.0;
  double gravity = constants::standard_gravity;
  double penning_rate = -1.0;  // m^3/s, required
  double a11_nm = 7.51, a00_nm = 5.56, a1m1_nm = 3.33, a_rest_nm = 7.51;

  // grid
  int dims = 2;
  int n[3] = {512, 128, 1};
  double length[3] = {0.0, 0.0, 0.0};  // m, required for simulation stages

  // groundstate
  double gs_tolerance = 1e-8;
  int gs_max_iters = 20000;
  double gs_step_factor = 1e-2;
  double transverse_length = 0.0;  // 0 = oscillator width of frozen axes

  // evolve
  double dt = 2e-6;
  double t_final = 10e-3;
  double rabi_off_time = 0.0;  // s; <= 0 means never switched off
  bool gravity_on = false;
  bool absorber_enabled = true;
  double absorber_width_fraction = 0.15;
  double absorber_strength = 0.0;  // 1/s; 0 = automatic
  int flux_bin_factor = 4;
  double flux_time_bin = 0.0;  // s; 0 = t_final / 64
  int check_every = 100;

  // wigner
  int trajectories = 100;
  double mode_fraction = 1.0;
  double capture_time = 0.0;  // s; 0 = off

  // detector
  double fall_height = 0.04;
  double pixel_pitch = 150e-6;
  double image_halfwidth = 6e-3;
  double blur_width = 200e-6;
  bool blur_is_fwhm = false;
  double flat_epsilon = 1e-2;
  double max_masked_fraction = 0.05;

  // analysis
  double exclusion_halfwidth = 4e5;  // rad/m around k = 0
  double significance_threshold = 5.0;
  std::string density_probe = "surface";  // or "center"
  double surface_band_fraction = 0.1;
  double peak_min_abs_x = 8e-4;
  double peak_min_abs_y = 1.5e-3;
  double peak_half_x = 8e-4;
  double peak_half_y = 8e-4;

  // flatfield
  std::string flat_model = "uniform";  // uniform | ripple | blotches
  double flat_amplitude = 0.3;

  std::uint64_t config_hash = 0;  // FNV-1a of the file bytes, 0 for defaults

  // Parses without validating, so callers can layer overrides first.
  static SimConfig from_file(const std::filesystem::path& path);
  // Applies one `section.key = value` assignment.
  void apply(const std::string& key, const std::string& value);
  // Checks cross-field consistency (positive spans, known enum strings,
  // required keys present). Throws config_error.
  void validate() const;
  // Prints every key as reparseable `key = value` lines.
  void dump(std::ostream& out) const;

  PhysicsParams make_params() const;
  std::shared_ptr<const Grid> make_grid() const;
  EvolutionConfig make_evolution() const;
  WignerConfig make_wigner(std::uint64_t seed, int threads) const;
  DetectorConfig make_detector() const;
  DensityProbe make_probe() const;
};

}  // namespace pbsim
