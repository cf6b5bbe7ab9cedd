#include "pbsim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "pbsim/errors.hpp"
#include "pbsim/groundstate.hpp"
#include "pbsim/snapshot.hpp"

namespace pbsim {

namespace {
constexpr double kInvSqrt6 = 0.40824829046386301637;
constexpr double kInvSqrt2 = 0.70710678118654752440;

double resolve_transverse(const PhysicsParams& p, int dims, double sigma) {
  if (dims == 3) return 0.0;
  return sigma > 0.0 ? sigma : default_transverse_length(p, dims);
}

// Effective interaction matrix u[j+1][i+1] and Penning loss rate for the
// simulated dimensionality.
struct Couplings {
  double u[3][3];
  double rate;  // 54/5 * reduced two-body rate constant
};

Couplings make_couplings(const PhysicsParams& p, int dims, double sigma) {
  Couplings c{};
  const double reduction =
      dims == 3 ? 1.0
                : std::pow(std::sqrt(2.0 * 3.14159265358979323846) * sigma,
                           3 - dims);
  for (int j = -1; j <= 1; ++j)
    for (int i = -1; i <= 1; ++i)
      c.u[j + 1][i + 1] = interaction_strength(p, j, i) / reduction;
  c.rate = (54.0 / 5.0) * p.penning_rate / reduction;
  return c;
}
}  // namespace

SpinorField::SpinorField(std::shared_ptr<const Grid> grid)
    : psi{ComplexField(grid), ComplexField(grid), ComplexField(grid)} {}

double SpinorField::total_atoms() const {
  return component_number(-1) + component_number(0) + component_number(1);
}

bool SpinorField::finite() const {
  return !has_non_finite(psi[0]) && !has_non_finite(psi[1]) &&
         !has_non_finite(psi[2]);
}

void EvolutionConfig::validate(const Grid& g) const {
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw config_error("evolution dt must be positive");
  if (!(t_final >= dt))
    throw config_error("evolution t_final must be at least dt");
  if (!(rabi_off_time > 0.0))
    throw config_error("rabi off time must be positive");
  if (absorber.enabled) {
    if (!(absorber.width_fraction > 0.0) || absorber.width_fraction > 0.45)
      throw config_error("absorber width fraction must lie in (0, 0.45]");
    if (absorber.strength < 0.0)
      throw config_error("absorber strength must be non-negative");
  }
  if (record_flux && absorber.enabled) {
    if (flux.bin_factor < 1)
      throw config_error("flux bin factor must be at least 1");
    const int binned_axes = std::min(g.dims(), 2);
    for (int axis = 0; axis < binned_axes; ++axis)
      if (g.size(axis) % flux.bin_factor != 0)
        throw config_error("flux bin factor must divide the grid size");
    if (flux.time_bin < 0.0)
      throw config_error("flux time bin must be non-negative");
  }
  if (check_every < 1) throw config_error("check cadence must be positive");
  if (transverse_length < 0.0)
    throw config_error("transverse length must be non-negative");
}

double BoundaryFluxRecord::vz_mean(int t, int iy, int ix) const {
  const double a = atoms[flat(t, iy, ix)];
  return a > 0.0 ? vz_weight[flat(t, iy, ix)] / a : 0.0;
}

double BoundaryFluxRecord::atom_total() const {
  double acc = 0.0;
  for (double a : atoms) acc += a;
  return acc;
}

void BoundaryFluxRecord::accumulate(const BoundaryFluxRecord& other) {
  if (bins_x != other.bins_x || bins_y != other.bins_y ||
      time_bins != other.time_bins)
    throw config_error("flux record geometry mismatch");
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    atoms[i] += other.atoms[i];
    vz_weight[i] += other.vz_weight[i];
  }
}

void BoundaryFluxRecord::scale(double factor) {
  for (auto& a : atoms) a *= factor;
  for (auto& v : vz_weight) v *= factor;
}

void write_flux_csv(const std::filesystem::path& path,
                    const BoundaryFluxRecord& rec) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw config_error("cannot open " + path.string() + " for writing");
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "# flux bins_x=%d bins_y=%d dk_x=%.17g dk_y=%.17g "
                "k0_x=%.17g k0_y=%.17g time_bin=%.17g time_bins=%d\n",
                rec.bins_x, rec.bins_y, rec.dk_x, rec.dk_y, rec.k0_x, rec.k0_y,
                rec.time_bin, rec.time_bins);
  out << buf;
  out << "# columns: t_center_s,kx_rad_per_m,ky_rad_per_m,atoms,vz_mean_m_per_s\n";
  for (int t = 0; t < rec.time_bins; ++t)
    for (int iy = 0; iy < rec.bins_y; ++iy)
      for (int ix = 0; ix < rec.bins_x; ++ix) {
        const double a = rec.atoms[rec.flat(t, iy, ix)];
        if (a == 0.0) continue;
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      (t + 0.5) * rec.time_bin, rec.bin_center_x(ix),
                      rec.bin_center_y(iy), a, rec.vz_mean(t, iy, ix));
        out << buf;
      }
  if (!out) throw config_error("short write to " + path.string());
}

BoundaryFluxRecord read_flux_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw config_error("empty flux file " + path.string());
  BoundaryFluxRecord rec;
  if (std::sscanf(line.c_str(),
                  "# flux bins_x=%d bins_y=%d dk_x=%lg dk_y=%lg k0_x=%lg "
                  "k0_y=%lg time_bin=%lg time_bins=%d",
                  &rec.bins_x, &rec.bins_y, &rec.dk_x, &rec.dk_y, &rec.k0_x,
                  &rec.k0_y, &rec.time_bin, &rec.time_bins) != 8)
    throw config_error("malformed flux header in " + path.string());
  if (rec.bins_x < 1 || rec.bins_y < 1 || rec.time_bins < 1)
    throw config_error("bad flux geometry in " + path.string());
  rec.atoms.assign(static_cast<std::size_t>(rec.bins_x) * rec.bins_y *
                       rec.time_bins,
                   0.0);
  rec.vz_weight = rec.atoms;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    double t, kx, ky, a, vz;
    if (std::sscanf(line.c_str(), "%lg,%lg,%lg,%lg,%lg", &t, &kx, &ky, &a,
                    &vz) != 5)
      throw config_error("malformed flux row in " + path.string());
    const int it = std::clamp(static_cast<int>(t / rec.time_bin), 0,
                              rec.time_bins - 1);
    const int ix = std::clamp(
        static_cast<int>(std::lround((kx - rec.k0_x) / rec.dk_x)), 0,
        rec.bins_x - 1);
    const int iy =
        rec.bins_y == 1
            ? 0
            : std::clamp(static_cast<int>(std::lround((ky - rec.k0_y) / rec.dk_y)),
                         0, rec.bins_y - 1);
    rec.atoms[rec.flat(it, iy, ix)] += a;
    rec.vz_weight[rec.flat(it, iy, ix)] += a * vz;
  }
  return rec;
}

double absorber_auto_strength(const Grid& g, const PhysicsParams& p,
                              double width_fraction) {
  double v_max = 0.0;
  double w_min = std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < g.dims(); ++axis) {
    const double v =
        p.hbar() * (0.5 * g.max_wavenumber(axis)) / p.atom_mass();
    v_max = std::max(v_max, v);
    w_min = std::min(w_min, width_fraction * g.length(axis));
  }
  return 5.0 * v_max / w_min;
}

double absorber_transmission(double strength, double width, double speed) {
  // Mean ramp value is strength / 2 across the skin.
  return std::exp(-strength * width / speed);
}

std::vector<double> absorber_profile(const Grid& g, double width_fraction,
                                     double strength) {
  std::vector<double> s(static_cast<std::size_t>(g.point_count()), 0.0);
  constexpr double kHalfPi = 1.57079632679489661923;
  for (long flatidx = 0; flatidx < g.point_count(); ++flatidx) {
    const auto idx = g.unflatten(flatidx);
    double acc = 0.0;
    for (int axis = 0; axis < g.dims(); ++axis) {
      const double w = width_fraction * g.length(axis);
      const double edge = 0.5 * g.length(axis) -
                          std::abs(g.coordinate(axis, idx[axis]));
      if (edge < w) {
        const double xi = 1.0 - edge / w;
        const double ramp = std::sin(kHalfPi * xi);
        acc += strength * ramp * ramp;
      }
    }
    s[static_cast<std::size_t>(flatidx)] = acc;
  }
  return s;
}

namespace {

struct Workspace {
  std::shared_ptr<const Grid> grid;
  double dt = 0.0;
  double theta = 0.0;  // Rabi angle per step when coupling is on
  Couplings cpl{};
  double hbar = 0.0;
  double detuning = 0.0;
  std::vector<double> vtrap;         // J
  std::vector<double> grav;          // J, empty when gravity off
  std::vector<cplx> half_kin;        // exp(-i hbar k^2 dt / (4 M))
  bool absorber_on = false;
  std::vector<double> mask;          // exp(-s dt)
  std::vector<double> removal;       // 1 - mask^2
  std::vector<double> sqrt_removal;  // sqrt(1 - mask^2)
  ComplexField scratch;

  explicit Workspace(std::shared_ptr<const Grid> g)
      : grid(g), scratch(g) {}
};

Workspace make_workspace(const std::shared_ptr<const Grid>& grid,
                         const PhysicsParams& p, const EvolutionConfig& cfg,
                         double dt) {
  Workspace ws(grid);
  const Grid& g = *grid;
  ws.dt = dt;
  ws.hbar = p.hbar();
  ws.detuning = p.detuning;
  ws.theta = 2.0 * p.rabi_freq * dt;
  const double sigma = resolve_transverse(p, g.dims(), cfg.transverse_length);
  ws.cpl = make_couplings(p, g.dims(), sigma);
  ws.vtrap = trap_potential(p, g);
  if (cfg.gravity_on) {
    ws.grav.resize(static_cast<std::size_t>(g.point_count()));
    const int axis = g.dims() - 1;
    for (long flat = 0; flat < g.point_count(); ++flat) {
      const auto idx = g.unflatten(flat);
      ws.grav[static_cast<std::size_t>(flat)] =
          p.atom_mass() * p.gravity * g.coordinate(axis, idx[axis]);
    }
  }
  ws.half_kin.resize(static_cast<std::size_t>(g.point_count()));
  for (long flat = 0; flat < g.point_count(); ++flat) {
    const auto idx = g.unflatten(flat);
    double k2 = 0.0;
    for (int axis = 0; axis < g.dims(); ++axis) {
      const double k = g.wavenumber(axis, idx[axis]);
      k2 += k * k;
    }
    ws.half_kin[static_cast<std::size_t>(flat)] =
        std::polar(1.0, -p.hbar() * k2 * dt / (4.0 * p.atom_mass()));
  }
  ws.absorber_on = cfg.absorber.enabled;
  if (ws.absorber_on) {
    const double gamma0 =
        cfg.absorber.strength > 0.0
            ? cfg.absorber.strength
            : absorber_auto_strength(g, p, cfg.absorber.width_fraction);
    const auto profile =
        absorber_profile(g, cfg.absorber.width_fraction, gamma0);
    const std::size_t n = profile.size();
    ws.mask.resize(n);
    ws.removal.resize(n);
    ws.sqrt_removal.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      ws.mask[i] = std::exp(-profile[i] * dt);
      ws.removal[i] = std::max(0.0, 1.0 - ws.mask[i] * ws.mask[i]);
      ws.sqrt_removal[i] = std::sqrt(ws.removal[i]);
    }
  }
  return ws;
}

void apply_half_kinetic(SpinorField& s, Workspace& ws) {
  for (int c = 0; c < 3; ++c) {
    transform_inplace(s.psi[c], ws.scratch, Space::momentum);
    auto vals = s.psi[c].values();
    const cplx* hk = ws.half_kin.data();
    for (long i = 0; i < s.psi[c].size(); ++i) vals[i] *= hk[i];
    transform_inplace(s.psi[c], ws.scratch, Space::position);
  }
}

// Diagonal phases, Rabi rotation and Penning loss fused in one sweep.
void apply_pointwise(SpinorField& s, Workspace& ws, bool rabi_on) {
  const long n = s.psi[0].size();
  cplx* pm = s.psi[0].data();
  cplx* p0 = s.psi[1].data();
  cplx* pp = s.psi[2].data();
  const double* vtrap = ws.vtrap.data();
  const double* grav = ws.grav.empty() ? nullptr : ws.grav.data();
  const double dt = ws.dt;
  const double inv_hbar = 1.0 / ws.hbar;
  const auto& u = ws.cpl.u;
  const double rate = ws.cpl.rate;

  const double cth = std::cos(ws.theta);
  const double sth = std::sin(ws.theta);
  const cplx ra{0.5 * (1.0 + cth), 0.0};
  const cplx rd{0.5 * (cth - 1.0), 0.0};
  const cplx rb{0.0, -sth * kInvSqrt2};
  const bool do_rabi = rabi_on && ws.theta != 0.0;
  const bool do_penning = rate > 0.0;
  const double pf = rate * dt * kInvSqrt6;

  for (long i = 0; i < n; ++i) {
    cplx m = pm[i], z = p0[i], p = pp[i];
    const double nm = std::norm(m), n0 = std::norm(z), np = std::norm(p);
    const double zeeman = vtrap[i] + ws.hbar * ws.detuning;
    const double common = grav ? grav[i] : 0.0;
    const double ph_p =
        dt * (inv_hbar * (zeeman + common) +
              inv_hbar * (u[2][0] * nm + u[2][1] * n0 + u[2][2] * np));
    const double ph_0 =
        dt * (inv_hbar * common +
              inv_hbar * (u[1][0] * nm + u[1][1] * n0 + u[1][2] * np));
    const double ph_m =
        dt * (inv_hbar * (-zeeman + common) +
              inv_hbar * (u[0][0] * nm + u[0][1] * n0 + u[0][2] * np));
    m *= std::polar(1.0, -ph_m);
    z *= std::polar(1.0, -ph_0);
    p *= std::polar(1.0, -ph_p);

    if (do_rabi) {
      const cplx m2 = ra * m + rb * z + rd * p;
      const cplx z2 = rb * m + cth * z + rb * p;
      const cplx p2 = rd * m + rb * z + ra * p;
      m = m2;
      z = z2;
      p = p2;
    }

    if (do_penning) {
      const cplx mol = (2.0 * p * m - z * z) * kInvSqrt6;
      const cplx dp = -pf * mol * std::conj(m);
      const cplx dm = -pf * mol * std::conj(p);
      const cplx dz = pf * mol * std::conj(z);
      p += dp;
      m += dm;
      z += dz;
    }

    pm[i] = m;
    p0[i] = z;
    pp[i] = p;
  }
}

struct FluxAccumulator {
  BoundaryFluxRecord rec;
  std::vector<int> bin_x, bin_y;  // per mode index along axes 0, 1
  std::vector<double> vz_down;    // per mode index along the last axis (3D)
  ComplexField window, spectrum;
  double t_origin = 0.0;

  FluxAccumulator(const std::shared_ptr<const Grid>& grid,
                  const PhysicsParams& p, const FluxBinning& binning,
                  double t0, double t_final)
      : window(grid), spectrum(grid) {
    const Grid& g = *grid;
    t_origin = t0;
    rec.time_bin = binning.time_bin > 0.0 ? binning.time_bin : t_final / 64.0;
    rec.time_bins =
        std::max(1, static_cast<int>(std::ceil(t_final / rec.time_bin - 1e-9)));
    rec.bins_x = g.size(0) / binning.bin_factor;
    rec.dk_x = 2.0 * g.max_wavenumber(0) / rec.bins_x;
    rec.k0_x = -g.max_wavenumber(0) + 0.5 * rec.dk_x;
    if (g.dims() >= 2) {
      rec.bins_y = g.size(1) / binning.bin_factor;
      rec.dk_y = 2.0 * g.max_wavenumber(1) / rec.bins_y;
      rec.k0_y = -g.max_wavenumber(1) + 0.5 * rec.dk_y;
    } else {
      rec.bins_y = 1;
      rec.dk_y = 0.0;
      rec.k0_y = 0.0;
    }
    rec.atoms.assign(static_cast<std::size_t>(rec.bins_x) * rec.bins_y *
                         rec.time_bins,
                     0.0);
    rec.vz_weight = rec.atoms;

    bin_x.resize(g.size(0));
    for (int i = 0; i < g.size(0); ++i)
      bin_x[i] = std::clamp(
          static_cast<int>((g.wavenumber(0, i) + g.max_wavenumber(0)) /
                           rec.dk_x),
          0, rec.bins_x - 1);
    if (g.dims() >= 2) {
      bin_y.resize(g.size(1));
      for (int i = 0; i < g.size(1); ++i)
        bin_y[i] = std::clamp(
            static_cast<int>((g.wavenumber(1, i) + g.max_wavenumber(1)) /
                             rec.dk_y),
            0, rec.bins_y - 1);
    } else {
      bin_y.assign(1, 0);
    }
    if (g.dims() == 3) {
      vz_down.resize(g.size(2));
      for (int i = 0; i < g.size(2); ++i)
        vz_down[i] = -p.hbar() * g.wavenumber(2, i) / p.atom_mass();
    }
  }

  // Records the momentum content removed from psi0 this step. The window
  // amplitude sqrt(1 - mask^2) makes the binned total exactly the number
  // removed (Parseval).
  void record(const ComplexField& psi0, const Workspace& ws, double t_mid) {
    const Grid& g = psi0.grid();
    auto wv = window.values();
    const auto pv = psi0.values();
    for (long i = 0; i < psi0.size(); ++i)
      wv[i] = pv[i] * ws.sqrt_removal[static_cast<std::size_t>(i)];
    window.set_space(Space::position);
    to_momentum(window, spectrum);
    const int tb = std::clamp(
        static_cast<int>((t_mid - t_origin) / rec.time_bin), 0,
        rec.time_bins - 1);
    const double dvk = g.momentum_volume_element();
    const auto sv = spectrum.values();
    for (long i = 0; i < spectrum.size(); ++i) {
      const double val = std::norm(sv[i]) * dvk;
      if (val == 0.0) continue;
      const auto idx = g.unflatten(i);
      const std::size_t slot =
          rec.flat(tb, g.dims() >= 2 ? bin_y[idx[1]] : 0, bin_x[idx[0]]);
      rec.atoms[slot] += val;
      if (!vz_down.empty()) rec.vz_weight[slot] += val * vz_down[idx[2]];
    }
  }
};

void apply_absorber(SpinorField& s, Workspace& ws,
                    std::array<double, 3>& removed) {
  const double dv = s.grid().volume_element();
  for (int c = 0; c < 3; ++c) {
    auto vals = s.psi[c].values();
    double lost = 0.0;
    for (long i = 0; i < s.psi[c].size(); ++i) {
      lost += std::norm(vals[i]) * ws.removal[static_cast<std::size_t>(i)];
      vals[i] *= ws.mask[static_cast<std::size_t>(i)];
    }
    removed[c] += lost * dv;
  }
}

void step_once(SpinorField& s, Workspace& ws, bool rabi_on,
               FluxAccumulator* flux, std::array<double, 3>& removed,
               double t_mid) {
  apply_half_kinetic(s, ws);
  apply_pointwise(s, ws, rabi_on);
  apply_half_kinetic(s, ws);
  if (ws.absorber_on) {
    if (flux) flux->record(s.psi[1], ws, t_mid);
    apply_absorber(s, ws, removed);
  }
  s.time += ws.dt;
}

}  // namespace

SpinorField rabi_rotation(const SpinorField& s, double rabi_freq, double dt) {
  SpinorField out = s;
  const double theta = 2.0 * rabi_freq * dt;
  const double cth = std::cos(theta);
  const double sth = std::sin(theta);
  const cplx ra{0.5 * (1.0 + cth), 0.0};
  const cplx rd{0.5 * (cth - 1.0), 0.0};
  const cplx rb{0.0, -sth * kInvSqrt2};
  cplx* pm = out.psi[0].data();
  cplx* p0 = out.psi[1].data();
  cplx* pp = out.psi[2].data();
  for (long i = 0; i < out.psi[0].size(); ++i) {
    const cplx m = pm[i], z = p0[i], p = pp[i];
    pm[i] = ra * m + rb * z + rd * p;
    p0[i] = rb * m + cth * z + rb * p;
    pp[i] = rd * m + rb * z + ra * p;
  }
  return out;
}

SpinorField penning_loss_step(const SpinorField& s, const PhysicsParams& p,
                              double dt, double transverse_length) {
  SpinorField out = s;
  const int dims = s.grid().dims();
  const double sigma = resolve_transverse(p, dims, transverse_length);
  const Couplings cpl = make_couplings(p, dims, sigma);
  const double pf = cpl.rate * dt * kInvSqrt6;
  cplx* pm = out.psi[0].data();
  cplx* p0 = out.psi[1].data();
  cplx* pp = out.psi[2].data();
  for (long i = 0; i < out.psi[0].size(); ++i) {
    const cplx m = pm[i], z = p0[i], pl = pp[i];
    const cplx mol = (2.0 * pl * m - z * z) * kInvSqrt6;
    pp[i] = pl - pf * mol * std::conj(m);
    pm[i] = m - pf * mol * std::conj(pl);
    p0[i] = z + pf * mol * std::conj(z);
  }
  return out;
}

double penning_loss_rate(const SpinorField& s, const PhysicsParams& p,
                         double transverse_length) {
  const int dims = s.grid().dims();
  const double sigma = resolve_transverse(p, dims, transverse_length);
  const Couplings cpl = make_couplings(p, dims, sigma);
  const cplx* pm = s.psi[0].data();
  const cplx* p0 = s.psi[1].data();
  const cplx* pp = s.psi[2].data();
  double acc = 0.0;
  for (long i = 0; i < s.psi[0].size(); ++i) {
    const cplx mol = (2.0 * pp[i] * pm[i] - p0[i] * p0[i]) * kInvSqrt6;
    acc += std::norm(mol);
  }
  return -2.0 * cpl.rate * acc * s.grid().volume_element();
}

SpinorField step(const SpinorField& s, const PhysicsParams& p,
                 const EvolutionConfig& cfg) {
  cfg.validate(s.grid());
  Workspace ws = make_workspace(s.grid_ptr(), p, cfg, cfg.dt);
  SpinorField out = s;
  std::array<double, 3> removed{0.0, 0.0, 0.0};
  const bool rabi_on = out.time < cfg.rabi_off_time;
  step_once(out, ws, rabi_on, nullptr, removed, out.time + 0.5 * cfg.dt);
  return out;
}

EvolveResult evolve(SpinorField state, const PhysicsParams& p,
                    const EvolutionConfig& cfg, const StepObserver& observer) {
  p.validate();
  cfg.validate(state.grid());
  const long steps = std::lround(cfg.t_final / cfg.dt);
  if (steps < 1) throw config_error("evolution covers no steps");
  const double dt = cfg.t_final / static_cast<double>(steps);

  Workspace ws = make_workspace(state.grid_ptr(), p, cfg, dt);
  std::unique_ptr<FluxAccumulator> flux;
  if (ws.absorber_on && cfg.record_flux)
    flux = std::make_unique<FluxAccumulator>(state.grid_ptr(), p, cfg.flux,
                                             state.time, cfg.t_final);

  const double t0 = state.time;
  std::array<double, 3> removed{0.0, 0.0, 0.0};
  for (long i = 0; i < steps; ++i) {
    const double t_now = t0 + static_cast<double>(i) * dt;
    const bool rabi_on = t_now < cfg.rabi_off_time;
    step_once(state, ws, rabi_on, flux.get(), removed, t_now + 0.5 * dt);
    state.time = t0 + static_cast<double>(i + 1) * dt;
    if ((i + 1) % cfg.check_every == 0 || i + 1 == steps) {
      if (!state.finite()) {
        if (!cfg.diagnostic_prefix.empty()) {
          const char* suffix[3] = {"_mm1.pbs", "_m0.pbs", "_mp1.pbs"};
          for (int c = 0; c < 3; ++c)
            write_snapshot(cfg.diagnostic_prefix.string() + suffix[c],
                           state.psi[c], state.time);
        }
        throw numeric_error("state became non-finite at t = " +
                            std::to_string(state.time));
      }
    }
    if (observer) observer(state, static_cast<int>(i + 1));
  }

  EvolveResult result{std::move(state),
                      flux ? std::move(flux->rec) : BoundaryFluxRecord{},
                      removed, static_cast<int>(steps), dt};
  return result;
}

}  // namespace pbsim
