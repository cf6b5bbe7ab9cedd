// pbsim: command-line front end for the paired-beam simulator.
//
// Stages (groundstate -> run -> detector -> analyze) exchange data only
// through documented formats: PBSIM1 snapshots, flux/spectrum/image CSVs
// and key-value manifests. `pipeline` chains all stages from one config.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "pbsim/analysis.hpp"
#include "pbsim/config.hpp"
#include "pbsim/detector.hpp"
#include "pbsim/dynamics.hpp"
#include "pbsim/errors.hpp"
#include "pbsim/groundstate.hpp"
#include "pbsim/manifest.hpp"
#include "pbsim/snapshot.hpp"
#include "pbsim/wigner.hpp"

namespace fs = std::filesystem;
using pbsim::config_error;
using pbsim::numeric_error;

namespace {

struct StageTimer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> sets;
  std::uint64_t seed = 1234;
  int threads = 0;  // 0 = hardware concurrency
  std::string manifest_path;
};

int resolved_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

pbsim::SimConfig load_effective(const CommonOpts& o) {
  pbsim::SimConfig cfg;
  if (!o.config_path.empty()) cfg = pbsim::SimConfig::from_file(o.config_path);
  for (const std::string& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw config_error("--set expects key=value, got '" + kv + "'");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    cfg.apply(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
    // Fold overrides into the fingerprint so manifests distinguish runs.
    const std::string mix = pbsim::digest_hex(cfg.config_hash) + "|" + kv;
    cfg.config_hash = pbsim::fnv1a_bytes(mix.data(), mix.size());
  }
  return cfg;
}

void ensure_parent_dir(const fs::path& p) {
  const fs::path dir = p.parent_path();
  if (!dir.empty()) fs::create_directories(dir);
}

void maybe_write_manifest(const pbsim::RunManifest& m, const std::string& path) {
  if (path.empty()) return;
  ensure_parent_dir(path);
  m.write(path);
}

// --- small numeric helpers shared by run/pipeline ------------------------

std::vector<double> field_density(const pbsim::ComplexField& f) {
  std::vector<double> d(f.values().size());
  const auto v = f.values();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::norm(v[i]);
  return d;
}

// Stores a nonnegative density as a phase-less PBSIM1 snapshot so density
// maps can ride the existing snapshot format.
pbsim::ComplexField density_as_field(const std::vector<double>& density,
                                     std::shared_ptr<const pbsim::Grid> grid) {
  pbsim::ComplexField f(std::move(grid), pbsim::Space::position);
  auto v = f.values();
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = std::sqrt(std::max(0.0, density[i]));
  return f;
}

pbsim::ResonanceInput resonance_input(const pbsim::SimConfig& cfg,
                                      const pbsim::PhysicsParams& p, int dims,
                                      const pbsim::ProbedDensities& probed) {
  pbsim::ResonanceInput in;
  in.density_m1 = probed.n1;
  in.density_m0 = probed.n0;
  double width = cfg.transverse_length;
  if (dims < 3 && width <= 0.0)
    width = pbsim::default_transverse_length(p, dims);
  in.u = pbsim::effective_interaction_strength(p, 1, 1, dims, width);
  in.kappa = pbsim::kappa(p);
  in.atom_mass = p.atom_mass();
  in.hbar = p.hbar();
  return in;
}

pbsim::DetectorImage apply_gain(const pbsim::DetectorImage& img,
                                const pbsim::DetectorImage& gain) {
  if (img.nx != gain.nx || img.ny != gain.ny)
    throw config_error("gain map shape does not match the image");
  pbsim::DetectorImage out = img;
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] *= gain.values[i];
  return out;
}

// --- key-value report ------------------------------------------------------

struct Report {
  std::vector<std::pair<std::string, std::string>> rows;
  void add(const std::string& key, const std::string& value) {
    rows.emplace_back(key, value);
  }
  void add(const std::string& key, double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", value);
    add(key, std::string(buf));
  }
  void print() const {
    for (const auto& [k, v] : rows) std::printf("%s = %s\n", k.c_str(), v.c_str());
  }
  void write(const fs::path& path) const {
    std::ofstream out(path);
    if (!out) throw config_error("cannot write report " + path.string());
    for (const auto& [k, v] : rows) out << k << " = " << v << "\n";
  }
};

// --- stage implementations ---------------------------------------------

pbsim::GroundStateResult stage_groundstate(const pbsim::SimConfig& cfg) {
  pbsim::GroundStateOptions o;
  o.tolerance = cfg.gs_tolerance;
  o.max_iters = cfg.gs_max_iters;
  o.initial_step_factor = cfg.gs_step_factor;
  o.transverse_length = cfg.transverse_length;
  return pbsim::solve_ground_state(cfg.make_params(), cfg.make_grid(), o);
}

int cmd_groundstate(const CommonOpts& o, const std::string& out_path) {
  pbsim::SimConfig cfg = load_effective(o);
  cfg.validate();
  StageTimer timer;
  pbsim::GroundStateResult r = stage_groundstate(cfg);
  ensure_parent_dir(out_path);
  pbsim::write_snapshot(out_path, r.psi, 0.0);

  Report rep;
  rep.add("atoms", pbsim::total_number(r.psi));
  rep.add("chemical_potential_j", r.chemical_potential);
  rep.add("kinetic_energy_j", r.kinetic_energy);
  rep.add("trap_energy_j", r.trap_energy);
  rep.add("interaction_energy_j", r.interaction_energy);
  rep.add("iterations", static_cast<double>(r.iterations));
  rep.add("residual", r.residual);
  rep.print();

  pbsim::RunManifest m;
  m.config_hash = cfg.config_hash;
  m.seed = o.seed;
  auto& st = m.add_stage("groundstate");
  if (!o.config_path.empty()) st.add_input(o.config_path);
  st.add_output(out_path);
  st.wall_seconds = timer.seconds();
  maybe_write_manifest(m, o.manifest_path);
  return 0;
}

// Artifacts produced by the evolution stage, shared between `run` and
// `pipeline`.
struct RunArtifacts {
  pbsim::BoundaryFluxRecord flux;
  std::array<double, 3> removed{0, 0, 0};
  std::optional<pbsim::Spectrum> capture_spectrum;  // m=+1, weak axis
  std::optional<pbsim::ProbedDensities> capture_probe;
  double capture_time = 0.0;
  int trajectories = 1;
  std::vector<std::pair<std::string, pbsim::ComplexField>> snapshots;
  double final_time = 0.0;
};

RunArtifacts stage_run(const pbsim::SimConfig& cfg,
                       const pbsim::ComplexField& condensate, bool wigner,
                       std::uint64_t seed, int threads) {
  const pbsim::PhysicsParams p = cfg.make_params();
  pbsim::EvolutionConfig evo = cfg.make_evolution();
  const auto grid = condensate.grid_ptr();
  evo.validate(*grid);

  RunArtifacts art;
  if (wigner) {
    pbsim::WignerConfig w = cfg.make_wigner(seed, threads);
    pbsim::EnsembleRunResult res = pbsim::run_ensemble(condensate, p, evo, w);
    art.flux = std::move(res.mean_flux);
    art.removed = res.mean_removed;
    art.trajectories = res.completed;
    art.final_time = evo.t_final;
    if (w.capture_time > 0.0) {
      art.capture_time = res.capture.time;
      art.capture_spectrum = pbsim::spectrum_from_momentum_density(
          res.capture.mean_momentum_density[2], *grid, 0);
      // Vacuum subtraction can leave tiny negatives outside the cloud.
      auto clamp0 = [](std::vector<double> v) {
        for (double& x : v) x = std::max(0.0, x);
        return v;
      };
      const auto n1 = clamp0(res.capture.mean_density[2]);
      const auto n0 = clamp0(res.capture.mean_density[1]);
      art.capture_probe = pbsim::probe_densities(
          n1, n0, *grid, p, cfg.make_probe(), cfg.surface_band_fraction);
      art.snapshots.emplace_back("capture_mp1.pbs",
                                 density_as_field(n1, grid));
      art.snapshots.emplace_back("capture_m0.pbs", density_as_field(n0, grid));
    }
  } else {
    pbsim::SpinorField s(grid);
    s.component(1) = condensate;
    const long steps = std::max(1L, std::lround(evo.t_final / evo.dt));
    const double dt_used = evo.t_final / static_cast<double>(steps);
    const int capture_step =
        cfg.capture_time > 0.0
            ? static_cast<int>(std::clamp(
                  std::lround(cfg.capture_time / dt_used), 1L, steps))
            : -1;
    std::optional<pbsim::SpinorField> captured;
    pbsim::StepObserver obs;
    if (capture_step > 0)
      obs = [&](const pbsim::SpinorField& state, int step) {
        if (step == capture_step) captured = state;
      };
    pbsim::EvolveResult res = pbsim::evolve(std::move(s), p, evo, obs);
    art.flux = std::move(res.flux);
    art.removed = res.removed;
    art.final_time = res.state.time;
    if (captured) {
      art.capture_time = captured->time;
      art.capture_spectrum = pbsim::momentum_spectrum(captured->component(1), 0);
      art.capture_probe = pbsim::probe_densities(
          *captured, p, cfg.make_probe(), cfg.surface_band_fraction);
      art.snapshots.emplace_back("capture_mp1.pbs", captured->component(1));
      art.snapshots.emplace_back("capture_m0.pbs", captured->component(0));
    }
    art.snapshots.emplace_back("final_mm1.pbs", res.state.component(-1));
    art.snapshots.emplace_back("final_m0.pbs", res.state.component(0));
    art.snapshots.emplace_back("final_mp1.pbs", res.state.component(1));
  }
  return art;
}

int cmd_run(const CommonOpts& o, const std::string& input,
            const std::string& prefix, bool wigner) {
  pbsim::SimConfig cfg = load_effective(o);
  cfg.validate();
  StageTimer timer;
  pbsim::LoadedSnapshot in = pbsim::read_snapshot(input);
  ensure_parent_dir(prefix + "x");

  RunArtifacts art = stage_run(cfg, in.field, wigner, o.seed,
                               resolved_threads(o.threads));

  std::vector<std::string> outputs;
  const std::string flux_path = prefix + "flux.csv";
  pbsim::write_flux_csv(flux_path, art.flux);
  outputs.push_back(flux_path);
  if (art.capture_spectrum) {
    const std::string spath = prefix + "spectrum_mp1.csv";
    pbsim::write_spectrum_csv(spath, *art.capture_spectrum);
    outputs.push_back(spath);
  }
  for (const auto& [name, field] : art.snapshots) {
    const std::string path = prefix + name;
    const double t = name.rfind("capture", 0) == 0 ? art.capture_time
                                                   : art.final_time;
    pbsim::write_snapshot(path, field, t);
    outputs.push_back(path);
  }

  Report rep;
  rep.add("mode", wigner ? "wigner" : "meanfield");
  rep.add("trajectories", static_cast<double>(art.trajectories));
  rep.add("flux_atoms", art.flux.atom_total());
  rep.add("removed_mm1", art.removed[0]);
  rep.add("removed_m0", art.removed[1]);
  rep.add("removed_mp1", art.removed[2]);
  if (art.capture_probe) {
    rep.add("capture_time_s", art.capture_time);
    rep.add("capture_n1", art.capture_probe->n1);
    rep.add("capture_n0", art.capture_probe->n0);
  }
  rep.print();

  pbsim::RunManifest m;
  m.config_hash = cfg.config_hash;
  m.seed = o.seed;
  auto& st = m.add_stage(wigner ? "run-wigner" : "run");
  if (!o.config_path.empty()) st.add_input(o.config_path);
  st.add_input(input);
  for (const auto& path : outputs) st.add_output(path);
  st.wall_seconds = timer.seconds();
  maybe_write_manifest(m, o.manifest_path);
  return 0;
}

pbsim::DetectorImage stage_detector(const pbsim::SimConfig& cfg,
                                    const pbsim::BoundaryFluxRecord& flux,
                                    const pbsim::DetectorImage* gain,
                                    const pbsim::DetectorImage* flat) {
  const pbsim::DetectorConfig d = cfg.make_detector();
  pbsim::DetectorImage img =
      pbsim::propagate_to_detector(flux, cfg.make_params(), d);
  if (d.blur_width > 0.0)
    img = pbsim::gaussian_blur(img, d.blur_width, d.blur_is_fwhm);
  if (gain) img = apply_gain(img, *gain);
  if (flat)
    img = pbsim::flat_field_normalize(img, *flat, d.flat_epsilon,
                                      d.max_masked_fraction);
  return img;
}

int cmd_detector(const CommonOpts& o, const std::string& flux_path,
                 const std::string& out_path, const std::string& gain_path,
                 const std::string& flat_path) {
  pbsim::SimConfig cfg = load_effective(o);
  cfg.validate();
  StageTimer timer;
  const pbsim::BoundaryFluxRecord flux = pbsim::read_flux_csv(flux_path);
  std::optional<pbsim::DetectorImage> gain, flat;
  if (!gain_path.empty()) gain = pbsim::read_image_csv(gain_path);
  if (!flat_path.empty()) flat = pbsim::read_image_csv(flat_path);
  pbsim::DetectorImage img =
      stage_detector(cfg, flux, gain ? &*gain : nullptr,
                     flat ? &*flat : nullptr);
  ensure_parent_dir(out_path);
  pbsim::write_image_csv(out_path, img);

  Report rep;
  rep.add("pixels_per_side", static_cast<double>(img.nx));
  rep.add("atoms_arrived", img.total_atoms);
  rep.add("atoms_on_image", img.integral());
  rep.add("masked_fraction", img.masked_fraction);
  rep.print();

  pbsim::RunManifest m;
  m.config_hash = cfg.config_hash;
  m.seed = o.seed;
  auto& st = m.add_stage("detector");
  if (!o.config_path.empty()) st.add_input(o.config_path);
  st.add_input(flux_path);
  if (!gain_path.empty()) st.add_input(gain_path);
  if (!flat_path.empty()) st.add_input(flat_path);
  st.add_output(out_path);
  st.wall_seconds = timer.seconds();
  maybe_write_manifest(m, o.manifest_path);
  return 0;
}

pbsim::FlatModel parse_flat_model(const std::string& name) {
  if (name == "uniform") return pbsim::FlatModel::uniform;
  if (name == "ripple") return pbsim::FlatModel::ripple;
  if (name == "blotches") return pbsim::FlatModel::blotches;
  throw config_error("unknown flat-field model '" + name + "'");
}

int cmd_flatfield(const CommonOpts& o, const std::string& out_path) {
  pbsim::SimConfig cfg = load_effective(o);
  cfg.validate();
  StageTimer timer;
  const pbsim::DetectorConfig d = cfg.make_detector();
  const int npix = pbsim::detector_pixel_count(d);
  pbsim::DetectorImage flat =
      pbsim::synthesize_flat(npix, npix, d.pixel_pitch,
                             parse_flat_model(cfg.flat_model),
                             cfg.flat_amplitude, o.seed);
  ensure_parent_dir(out_path);
  pbsim::write_image_csv(out_path, flat);

  Report rep;
  rep.add("model", cfg.flat_model);
  rep.add("pixels_per_side", static_cast<double>(npix));
  rep.print();

  pbsim::RunManifest m;
  m.config_hash = cfg.config_hash;
  m.seed = o.seed;
  auto& st = m.add_stage("flatfield");
  if (!o.config_path.empty()) st.add_input(o.config_path);
  st.add_output(out_path);
  st.wall_seconds = timer.seconds();
  maybe_write_manifest(m, o.manifest_path);
  return 0;
}

void analyze_spectrum_into(const pbsim::SimConfig& cfg,
                           const pbsim::Spectrum& spec, Report& rep) {
  const auto det = pbsim::detect_grating(spec, cfg.exclusion_halfwidth,
                                         cfg.significance_threshold);
  rep.add("grating", det ? "yes" : "no");
  if (det) {
    rep.add("grating_k_rad_per_m", det->k_peak);
    rep.add("grating_k_uncertainty", det->k_uncertainty);
    rep.add("grating_weight_atoms", det->weight);
    rep.add("grating_significance", det->significance);
  }
}

void analyze_peaks_into(const pbsim::SimConfig& cfg,
                        const pbsim::DetectorImage& img, Report& rep) {
  const auto regions = pbsim::symmetric_peak_regions(
      img, cfg.peak_min_abs_x, cfg.peak_min_abs_y, cfg.peak_half_x,
      cfg.peak_half_y);
  const pbsim::PeakReport pk = pbsim::peak_fractions(img, regions);
  rep.add("peak_count", static_cast<double>(pk.fractions.size()));
  for (std::size_t i = 0; i < pk.fractions.size(); ++i) {
    const std::string base = "peak_" + std::to_string(i);
    rep.add(base + "_x_m", pk.peak_positions[i][0]);
    rep.add(base + "_y_m", pk.peak_positions[i][1]);
    rep.add(base + "_fraction", pk.fractions[i]);
  }
  rep.add("halo_radius_m", pk.halo_radius);
  rep.add("image_atoms", img.integral());
}

void analyze_resonance_into(const pbsim::SimConfig& cfg,
                            const pbsim::ProbedDensities& probed, int dims,
                            Report& rep) {
  const pbsim::PhysicsParams p = cfg.make_params();
  const auto in = resonance_input(cfg, p, dims, probed);
  rep.add("probe_n1", probed.n1);
  rep.add("probe_n0", probed.n0);
  const auto k = pbsim::resonant_wavenumber(in);
  if (k)
    rep.add("resonant_k_rad_per_m", *k);
  else
    rep.add("resonant_k_rad_per_m", "none");
  if (k) {
    // Kinetic energy of one scattered atom at the resonant wavenumber.
    const double ek = in.hbar * in.hbar * *k * *k / (2.0 * in.atom_mass);
    rep.add("resonant_kinetic_energy_j", ek);
  }
}

int cmd_analyze(const CommonOpts& o, const std::string& spectrum_path,
                const std::string& image_path, const std::string& state_m1,
                const std::string& state_m0) {
  pbsim::SimConfig cfg = load_effective(o);
  cfg.validate();
  Report rep;
  if (!spectrum_path.empty())
    analyze_spectrum_into(cfg, pbsim::read_spectrum_csv(spectrum_path), rep);
  if (!image_path.empty())
    analyze_peaks_into(cfg, pbsim::read_image_csv(image_path), rep);
  if (!state_m1.empty() || !state_m0.empty()) {
    if (state_m1.empty() || state_m0.empty())
      throw config_error("resonance analysis needs both --state-m1 and --state-m0");
    pbsim::LoadedSnapshot s1 = pbsim::read_snapshot(state_m1);
    pbsim::LoadedSnapshot s0 = pbsim::read_snapshot(state_m0);
    if (!s1.field.grid().same_shape(s0.field.grid()))
      throw config_error("state snapshots live on different grids");
    const auto probed = pbsim::probe_densities(
        field_density(s1.field), field_density(s0.field), s1.field.grid(),
        cfg.make_params(), cfg.make_probe(), cfg.surface_band_fraction);
    analyze_resonance_into(cfg, probed, s1.field.grid().dims(), rep);
  }
  if (rep.rows.empty())
    throw config_error(
        "analyze needs at least one of --spectrum, --image, --state-m1/--state-m0");
  rep.print();
  return 0;
}

int cmd_pipeline(const CommonOpts& o, const std::string& outdir,
                 bool semiclassical) {
  pbsim::SimConfig cfg = load_effective(o);
  cfg.validate();
  const fs::path dir(outdir);
  fs::create_directories(dir);

  pbsim::RunManifest m;
  m.config_hash = cfg.config_hash;
  m.seed = o.seed;
  Report rep;
  rep.add("code_version", pbsim::version());
  rep.add("mode", semiclassical ? "semiclassical" : "wigner");

  // 1. Ground state.
  StageTimer t_gs;
  pbsim::GroundStateResult gs = stage_groundstate(cfg);
  const fs::path gs_path = dir / "groundstate.pbs";
  pbsim::write_snapshot(gs_path, gs.psi, 0.0);
  {
    auto& st = m.add_stage("groundstate");
    if (!o.config_path.empty()) st.add_input(o.config_path);
    st.add_output(gs_path);
    st.wall_seconds = t_gs.seconds();
  }
  rep.add("atoms", pbsim::total_number(gs.psi));
  rep.add("chemical_potential_j", gs.chemical_potential);

  // 2. Evolution (truncated-Wigner ensemble unless --semiclassical).
  StageTimer t_run;
  RunArtifacts art = stage_run(cfg, gs.psi, !semiclassical, o.seed,
                               resolved_threads(o.threads));
  const fs::path flux_path = dir / "flux.csv";
  pbsim::write_flux_csv(flux_path, art.flux);
  std::vector<fs::path> run_outputs{flux_path};
  if (art.capture_spectrum) {
    const fs::path spath = dir / "spectrum_mp1.csv";
    pbsim::write_spectrum_csv(spath, *art.capture_spectrum);
    run_outputs.push_back(spath);
  }
  for (const auto& [name, field] : art.snapshots) {
    const fs::path path = dir / name;
    const double t = name.rfind("capture", 0) == 0 ? art.capture_time
                                                   : art.final_time;
    pbsim::write_snapshot(path, field, t);
    run_outputs.push_back(path);
  }
  {
    auto& st = m.add_stage(semiclassical ? "run" : "run-wigner");
    st.add_input(gs_path);
    for (const auto& path : run_outputs) st.add_output(path);
    st.wall_seconds = t_run.seconds();
  }
  rep.add("trajectories", static_cast<double>(art.trajectories));
  rep.add("flux_atoms", art.flux.atom_total());
  rep.add("removed_m0", art.removed[1]);

  // 3. Flat field synthesis.
  StageTimer t_flat;
  const pbsim::DetectorConfig dcfg = cfg.make_detector();
  const int npix = pbsim::detector_pixel_count(dcfg);
  pbsim::DetectorImage flat =
      pbsim::synthesize_flat(npix, npix, dcfg.pixel_pitch,
                             parse_flat_model(cfg.flat_model),
                             cfg.flat_amplitude, o.seed);
  const fs::path flat_path = dir / "flat.csv";
  pbsim::write_image_csv(flat_path, flat);
  {
    auto& st = m.add_stage("flatfield");
    st.add_output(flat_path);
    st.wall_seconds = t_flat.seconds();
  }

  // 4. Detector image: ballistics + blur, gain imprinted by the synthetic
  // flat and divided back out, as a real flat-field correction would.
  StageTimer t_det;
  pbsim::DetectorImage img = stage_detector(cfg, art.flux, &flat, &flat);
  const fs::path img_path = dir / "image.csv";
  pbsim::write_image_csv(img_path, img);
  {
    auto& st = m.add_stage("detector");
    st.add_input(flux_path);
    st.add_input(flat_path);
    st.add_output(img_path);
    st.wall_seconds = t_det.seconds();
  }
  rep.add("atoms_arrived", img.total_atoms);
  rep.add("atoms_on_image", img.integral());
  rep.add("masked_fraction", img.masked_fraction);

  // 5. Analysis: grating spectrum, resonance prediction, detector peaks.
  StageTimer t_an;
  if (art.capture_spectrum) analyze_spectrum_into(cfg, *art.capture_spectrum, rep);
  if (art.capture_probe)
    analyze_resonance_into(cfg, *art.capture_probe, cfg.dims, rep);
  analyze_peaks_into(cfg, img, rep);
  const fs::path rep_path = dir / "analysis.txt";
  rep.write(rep_path);
  {
    auto& st = m.add_stage("analyze");
    st.add_input(img_path);
    st.add_output(rep_path);
    st.wall_seconds = t_an.seconds();
  }

  m.write(dir / "manifest.txt");
  rep.print();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"paired-beam atom-laser simulator"};
  app.require_subcommand(0, 1);

  CommonOpts o;
  bool dump_config = false;
  bool show_version = false;
  app.add_option("--config", o.config_path, "configuration file");
  app.add_option("--set", o.sets, "override `key=value` (repeatable)");
  app.add_option("--seed", o.seed, "master RNG seed (default 1234)");
  app.add_option("--threads", o.threads, "worker threads (0 = all cores)");
  app.add_option("--manifest", o.manifest_path, "write a manifest here");
  app.add_flag("--dump-config", dump_config,
               "print the effective configuration and exit");
  app.add_flag("--version", show_version, "print the version and exit");

  auto* gs = app.add_subcommand("groundstate", "solve the trapped condensate");
  std::string gs_out = "groundstate.pbs";
  gs->add_option("--output", gs_out, "snapshot path (PBSIM1)");

  auto* run = app.add_subcommand("run", "evolve the outcoupling dynamics");
  std::string run_in, run_prefix = "run_";
  bool run_wigner = false;
  run->add_option("--input", run_in, "ground-state snapshot")->required();
  run->add_option("--output-prefix", run_prefix, "prefix for output files");
  run->add_flag("--wigner", run_wigner,
                "truncated-Wigner ensemble instead of one mean-field path");

  auto* det = app.add_subcommand("detector", "time-of-flight detector image");
  std::string det_flux, det_out = "image.csv", det_gain, det_flat;
  det->add_option("--flux", det_flux, "boundary flux CSV")->required();
  det->add_option("--output", det_out, "image CSV path");
  det->add_option("--apply-gain", det_gain, "imprint this gain map (simulation)");
  det->add_option("--flat", det_flat, "flat-field image to divide out");

  auto* an = app.add_subcommand("analyze", "grating/resonance/peak analysis");
  std::string an_spec, an_img, an_m1, an_m0;
  an->add_option("--spectrum", an_spec, "momentum spectrum CSV");
  an->add_option("--image", an_img, "detector image CSV");
  an->add_option("--state-m1", an_m1, "m=+1 snapshot for the resonance probe");
  an->add_option("--state-m0", an_m0, "m=0 snapshot for the resonance probe");

  auto* ff = app.add_subcommand("flatfield", "synthesize a detector flat");
  std::string ff_out = "flat.csv";
  ff->add_option("--output", ff_out, "flat-field image CSV path");

  auto* pl = app.add_subcommand("pipeline", "run all stages from one config");
  std::string pl_dir = "pipeline_out";
  bool pl_semi = false;
  pl->add_option("--output-dir", pl_dir, "directory for all artifacts");
  pl->add_flag("--semiclassical", pl_semi,
               "single noise-free trajectory instead of the ensemble");

  try {
    app.parse(argc, argv);

    if (show_version) {
      std::printf("pbsim %s\n", pbsim::version());
      return 0;
    }
    if (dump_config) {
      load_effective(o).dump(std::cout);
      return 0;
    }
    if (gs->parsed()) return cmd_groundstate(o, gs_out);
    if (run->parsed()) return cmd_run(o, run_in, run_prefix, run_wigner);
    if (det->parsed()) return cmd_detector(o, det_flux, det_out, det_gain, det_flat);
    if (an->parsed()) return cmd_analyze(o, an_spec, an_img, an_m1, an_m0);
    if (ff->parsed()) return cmd_flatfield(o, ff_out);
    if (pl->parsed()) return cmd_pipeline(o, pl_dir, pl_semi);
    throw CLI::CallForHelp();
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    std::fprintf(stderr, "pbsim-error: kind=config message=\"%s\"\n", e.what());
    return 2;
  } catch (const config_error& e) {
    std::fprintf(stderr, "pbsim-error: kind=config message=\"%s\"\n", e.what());
    return 2;
  } catch (const numeric_error& e) {
    std::fprintf(stderr, "pbsim-error: kind=numeric message=\"%s\"\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "pbsim-error: kind=internal message=\"%s\"\n", e.what());
    return 3;
  }
}
