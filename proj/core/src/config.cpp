#include "pbsim/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <functional>
#include <ostream>
#include <sstream>
#include <vector>

#include "pbsim/errors.hpp"

namespace pbsim {

namespace {
constexpr double kTwoPi = 6.28318530717958647692;

double parse_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  while (end && *end == ' ') ++end;
  if (!end || *end != '\0' || value.empty())
    throw config_error("key '" + key + "' expects a number, got '" + value +
                       "'");
  return v;
}

int parse_int(const std::string& key, const std::string& value) {
  const double v = parse_double(key, value);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v)
    throw config_error("key '" + key + "' expects an integer, got '" + value +
                       "'");
  return i;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on")
    return true;
  if (value == "false" || value == "0" || value == "no" || value == "off")
    return false;
  throw config_error("key '" + key + "' expects a boolean, got '" + value +
                     "'");
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

struct Entry {
  const char* key;
  std::function<void(SimConfig&, const std::string&)> set;
  std::function<std::string(const SimConfig&)> get;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
std::string fmt(int v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }

#define NUM_ENTRY(key_name, field)                                        \
  Entry{key_name,                                                         \
        [](SimConfig& c, const std::string& v) {                          \
          c.field = parse_double(key_name, v);                            \
        },                                                                \
        [](const SimConfig& c) { return fmt(c.field); }}
#define INT_ENTRY(key_name, field)                                        \
  Entry{key_name,                                                         \
        [](SimConfig& c, const std::string& v) {                          \
          c.field = parse_int(key_name, v);                               \
        },                                                                \
        [](const SimConfig& c) { return fmt(c.field); }}
#define BOOL_ENTRY(key_name, field)                                       \
  Entry{key_name,                                                         \
        [](SimConfig& c, const std::string& v) {                          \
          c.field = parse_bool(key_name, v);                              \
        },                                                                \
        [](const SimConfig& c) { return fmt(c.field); }}
#define STR_ENTRY(key_name, field)                                        \
  Entry{key_name,                                                         \
        [](SimConfig& c, const std::string& v) { c.field = v; },          \
        [](const SimConfig& c) { return c.field; }}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      NUM_ENTRY("physics.atom_number", atom_number),
      NUM_ENTRY("physics.trap_freq_x_hz", trap_freq_hz[0]),
      NUM_ENTRY("physics.trap_freq_y_hz", trap_freq_hz[1]),
      NUM_ENTRY("physics.trap_freq_z_hz", trap_freq_hz[2]),
      NUM_ENTRY("physics.rabi_freq_hz", rabi_freq_hz),
      NUM_ENTRY("physics.detuning_hz", detuning_hz),
      NUM_ENTRY("physics.gravity", gravity),
      NUM_ENTRY("physics.penning_rate_m3_per_s", penning_rate),
      NUM_ENTRY("physics.scattering_a11_nm", a11_nm),
      NUM_ENTRY("physics.scattering_a00_nm", a00_nm),
      NUM_ENTRY("physics.scattering_a1m1_nm", a1m1_nm),
      NUM_ENTRY("physics.scattering_rest_nm", a_rest_nm),
      INT_ENTRY("grid.dims", dims),
      INT_ENTRY("grid.nx", n[0]),
      INT_ENTRY("grid.ny", n[1]),
      INT_ENTRY("grid.nz", n[2]),
      NUM_ENTRY("grid.length_x", length[0]),
      NUM_ENTRY("grid.length_y", length[1]),
      NUM_ENTRY("grid.length_z", length[2]),
      NUM_ENTRY("groundstate.tolerance", gs_tolerance),
      INT_ENTRY("groundstate.max_iters", gs_max_iters),
      NUM_ENTRY("groundstate.step_factor", gs_step_factor),
      NUM_ENTRY("groundstate.transverse_length", transverse_length),
      NUM_ENTRY("evolve.dt", dt),
      NUM_ENTRY("evolve.t_final", t_final),
      NUM_ENTRY("evolve.rabi_off_time", rabi_off_time),
      BOOL_ENTRY("evolve.gravity_on", gravity_on),
      BOOL_ENTRY("evolve.absorber_enabled", absorber_enabled),
      NUM_ENTRY("evolve.absorber_width_fraction", absorber_width_fraction),
      NUM_ENTRY("evolve.absorber_strength", absorber_strength),
      INT_ENTRY("evolve.flux_bin_factor", flux_bin_factor),
      NUM_ENTRY("evolve.flux_time_bin", flux_time_bin),
      INT_ENTRY("evolve.check_every", check_every),
      INT_ENTRY("wigner.trajectories", trajectories),
      NUM_ENTRY("wigner.mode_fraction", mode_fraction),
      NUM_ENTRY("wigner.capture_time", capture_time),
      NUM_ENTRY("detector.fall_height", fall_height),
      NUM_ENTRY("detector.pixel_pitch", pixel_pitch),
      NUM_ENTRY("detector.halfwidth", image_halfwidth),
      NUM_ENTRY("detector.blur_width", blur_width),
      BOOL_ENTRY("detector.blur_is_fwhm", blur_is_fwhm),
      NUM_ENTRY("detector.flat_epsilon", flat_epsilon),
      NUM_ENTRY("detector.max_masked_fraction", max_masked_fraction),
      NUM_ENTRY("analysis.exclusion_halfwidth", exclusion_halfwidth),
      NUM_ENTRY("analysis.significance_threshold", significance_threshold),
      STR_ENTRY("analysis.density_probe", density_probe),
      NUM_ENTRY("analysis.surface_band_fraction", surface_band_fraction),
      NUM_ENTRY("analysis.peak_min_abs_x", peak_min_abs_x),
      NUM_ENTRY("analysis.peak_min_abs_y", peak_min_abs_y),
      NUM_ENTRY("analysis.peak_half_x", peak_half_x),
      NUM_ENTRY("analysis.peak_half_y", peak_half_y),
      STR_ENTRY("flatfield.model", flat_model),
      NUM_ENTRY("flatfield.amplitude", flat_amplitude),
  };
  return table;
}

#undef NUM_ENTRY
#undef INT_ENTRY
#undef BOOL_ENTRY
#undef STR_ENTRY

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const char ch : bytes) {
    h ^= static_cast<unsigned char>(ch);
    h *= 1099511628211ULL;
  }
  return h;
}
}  // namespace

void SimConfig::apply(const std::string& key, const std::string& value) {
  for (const auto& e : entries()) {
    if (key == e.key) {
      e.set(*this, value);
      return;
    }
  }
  throw config_error("unknown config key '" + key + "'");
}

SimConfig SimConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file " + path.string());
  std::ostringstream all;
  all << in.rdbuf();
  const std::string text = all.str();

  SimConfig cfg;
  cfg.config_hash = fnv1a(text);
  std::istringstream lines(text);
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error(path.string() + ":" + std::to_string(lineno) +
                         ": expected 'key = value'");
    cfg.apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

void SimConfig::validate() const {
  if (penning_rate < 0.0)
    throw config_error(
        "missing required key 'physics.penning_rate_m3_per_s'");
  if (dims < 1 || dims > 3) throw config_error("grid.dims must be 1, 2 or 3");
  if (density_probe != "surface" && density_probe != "center")
    throw config_error("analysis.density_probe must be 'surface' or 'center'");
  if (flat_model != "uniform" && flat_model != "ripple" &&
      flat_model != "blotches")
    throw config_error(
        "flatfield.model must be 'uniform', 'ripple' or 'blotches'");
  if (!(flat_amplitude >= 0.0) || flat_amplitude >= 1.0)
    throw config_error("flatfield.amplitude must lie in [0, 1)");
  if (trajectories < 1)
    throw config_error("wigner.trajectories must be positive");
  make_params().validate();
}

void SimConfig::dump(std::ostream& out) const {
  for (const auto& e : entries()) out << e.key << " = " << e.get(*this) << "\n";
}

PhysicsParams SimConfig::make_params() const {
  PhysicsParams p;
  p.atom_number = atom_number;
  for (int axis = 0; axis < 3; ++axis)
    p.trap_freqs[axis] = kTwoPi * trap_freq_hz[axis];
  p.rabi_freq = kTwoPi * rabi_freq_hz;
  p.detuning = kTwoPi * detuning_hz;
  p.gravity = gravity;
  p.penning_rate = penning_rate;
  ScatteringMatrix s;
  for (int i = -1; i <= 1; ++i)
    for (int j = i; j <= 1; ++j) s.set(i, j, a_rest_nm * 1e-9);
  s.set(1, 1, a11_nm * 1e-9);
  s.set(0, 0, a00_nm * 1e-9);
  s.set(1, -1, a1m1_nm * 1e-9);
  p.scattering = s;
  return p;
}

std::shared_ptr<const Grid> SimConfig::make_grid() const {
  std::array<int, 3> shape{n[0], n[1], n[2]};
  std::array<double, 3> len{length[0], length[1], length[2]};
  for (int axis = 0; axis < dims; ++axis) {
    if (!(len[axis] > 0.0))
      throw config_error("grid.length_" + std::string(1, "xyz"[axis]) +
                         " must be positive");
  }
  return Grid::make(dims, shape, len);
}

EvolutionConfig SimConfig::make_evolution() const {
  EvolutionConfig e;
  e.dt = dt;
  e.t_final = t_final;
  e.rabi_off_time = rabi_off_time > 0.0
                        ? rabi_off_time
                        : std::numeric_limits<double>::infinity();
  e.gravity_on = gravity_on;
  e.transverse_length = transverse_length;
  e.absorber.enabled = absorber_enabled;
  e.absorber.width_fraction = absorber_width_fraction;
  e.absorber.strength = absorber_strength;
  e.flux.bin_factor = flux_bin_factor;
  e.flux.time_bin = flux_time_bin;
  e.check_every = check_every;
  return e;
}

WignerConfig SimConfig::make_wigner(std::uint64_t seed, int threads) const {
  WignerConfig w;
  w.trajectories = trajectories;
  w.seed = seed;
  w.mode_fraction = mode_fraction;
  w.threads = threads;
  w.capture_time = capture_time;
  return w;
}

DetectorConfig SimConfig::make_detector() const {
  DetectorConfig d;
  d.fall_height = fall_height;
  d.pixel_pitch = pixel_pitch;
  d.halfwidth = image_halfwidth;
  d.blur_width = blur_width;
  d.blur_is_fwhm = blur_is_fwhm;
  d.flat_epsilon = flat_epsilon;
  d.max_masked_fraction = max_masked_fraction;
  return d;
}

DensityProbe SimConfig::make_probe() const {
  return density_probe == "center" ? DensityProbe::center
                                   : DensityProbe::surface_average;
}

}  // namespace pbsim
