#include "pbsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>

#include "pbsim/errors.hpp"
#include "pbsim/groundstate.hpp"

namespace pbsim {

namespace {
constexpr double kTwoPi = 6.28318530717958647692;
}

std::optional<double> resonant_wavenumber(const ResonanceInput& in) {
  if (in.density_m1 < 0.0 || in.density_m0 < 0.0)
    throw config_error("densities must be non-negative");
  if (!(in.u > 0.0) || !(in.atom_mass > 0.0) || !(in.hbar > 0.0))
    throw config_error("resonance needs positive u, mass and hbar");
  const double cross = 2.0 * std::sqrt(in.density_m1 * in.density_m0);
  const double radicand = 2.0 * in.atom_mass * in.u *
                          (cross - in.density_m1 - in.kappa * in.density_m0);
  if (radicand < 0.0) return std::nullopt;
  return std::sqrt(radicand) / in.hbar;
}

double interaction_energy_delta(double background_density, double epsilon,
                                double k, double u, double kappa, double x0,
                                double x1, double cross_section,
                                long intervals) {
  if (epsilon < 0.0 || epsilon > background_density)
    throw config_error("grating amplitude must lie in [0, background]");
  if (!(x1 > x0)) throw config_error("domain must have positive length");
  if (intervals <= 0) {
    const double periods = std::abs(k) * (x1 - x0) / kTwoPi;
    intervals = std::max<long>(1024, static_cast<long>(64.0 * periods));
  }
  if (intervals % 2 != 0) ++intervals;

  const auto f = [&](double x) {
    const double c = std::cos(k * x);
    return 2.0 * background_density * epsilon * c - epsilon * epsilon * c * c;
  };
  const double h = (x1 - x0) / static_cast<double>(intervals);
  double acc = f(x0) + f(x1);
  for (long i = 1; i < intervals; ++i)
    acc += f(x0 + h * static_cast<double>(i)) * (i % 2 == 1 ? 4.0 : 2.0);
  const double integral = acc * h / 3.0;
  return u * (1.0 - kappa) * integral * cross_section;
}

namespace {
Spectrum marginalize(const Grid& g, int axis,
                     const std::function<double(long)>& weight_of) {
  const int n = g.size(axis);
  Spectrum out;
  out.k.resize(static_cast<std::size_t>(n));
  out.weight.assign(static_cast<std::size_t>(n), 0.0);
  out.bin_width = kTwoPi / g.length(axis);
  // Ascending order: FFT index i maps to shifted slot (i + n/2) mod n.
  for (int i = 0; i < n; ++i)
    out.k[static_cast<std::size_t>((i + n / 2) % n)] = g.wavenumber(axis, i);
  const double dvk = g.momentum_volume_element();
  for (long flat = 0; flat < g.point_count(); ++flat) {
    const auto idx = g.unflatten(flat);
    const int slot = (idx[axis] + n / 2) % n;
    out.weight[static_cast<std::size_t>(slot)] += weight_of(flat) * dvk;
  }
  return out;
}
}  // namespace

Spectrum momentum_spectrum(const ComplexField& field, int axis) {
  const Grid& g = field.grid();
  if (axis < 0 || axis >= g.dims())
    throw config_error("spectrum axis outside grid dimensionality");
  if (field.space() == Space::momentum) {
    const auto vals = field.values();
    return marginalize(g, axis,
                       [&](long flat) { return std::norm(vals[flat]); });
  }
  ComplexField mom = to_momentum(field);
  const auto vals = mom.values();
  return marginalize(g, axis,
                     [&](long flat) { return std::norm(vals[flat]); });
}

Spectrum spectrum_from_momentum_density(const std::vector<double>& density,
                                        const Grid& g, int axis) {
  if (axis < 0 || axis >= g.dims())
    throw config_error("spectrum axis outside grid dimensionality");
  if (density.size() != static_cast<std::size_t>(g.point_count()))
    throw config_error("momentum density size mismatch");
  return marginalize(g, axis, [&](long flat) {
    return density[static_cast<std::size_t>(flat)];
  });
}

void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& s) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw config_error("cannot write spectrum " + path.string());
  std::fprintf(f, "# spectrum bins=%zu bin_width=%.17g\n", s.k.size(),
               s.bin_width);
  std::fprintf(f, "k_rad_per_m,atoms_per_bin\n");
  for (std::size_t i = 0; i < s.k.size(); ++i)
    std::fprintf(f, "%.17g,%.17g\n", s.k[i], s.weight[i]);
  if (std::fclose(f) != 0)
    throw config_error("failed writing spectrum " + path.string());
}

Spectrum read_spectrum_csv(const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.c_str(), "r");
  if (!f) throw config_error("cannot open spectrum " + path.string());
  Spectrum s;
  std::size_t bins = 0;
  char line[256];
  if (!std::fgets(line, sizeof(line), f) ||
      std::sscanf(line, "# spectrum bins=%zu bin_width=%lg", &bins,
                  &s.bin_width) != 2) {
    std::fclose(f);
    throw config_error("malformed spectrum header in " + path.string());
  }
  if (!std::fgets(line, sizeof(line), f)) {  // column-name row
    std::fclose(f);
    throw config_error("truncated spectrum file " + path.string());
  }
  double k = 0.0, w = 0.0;
  while (std::fgets(line, sizeof(line), f)) {
    if (std::sscanf(line, "%lg,%lg", &k, &w) != 2) {
      std::fclose(f);
      throw config_error("malformed spectrum row in " + path.string());
    }
    s.k.push_back(k);
    s.weight.push_back(w);
  }
  std::fclose(f);
  if (s.k.size() != bins)
    throw config_error("spectrum row count mismatch in " + path.string());
  return s;
}

std::optional<GratingDetection> detect_grating(const Spectrum& spectrum,
                                               double exclusion_halfwidth,
                                               double significance_threshold) {
  const std::size_t n = spectrum.weight.size();
  if (n < 3) return std::nullopt;

  std::vector<double> background;
  background.reserve(n);
  long best = -1;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (std::abs(spectrum.k[i]) <= exclusion_halfwidth) continue;
    background.push_back(spectrum.weight[i]);
    const bool local_max = spectrum.weight[i] > spectrum.weight[i - 1] &&
                           spectrum.weight[i] >= spectrum.weight[i + 1];
    if (!local_max) continue;
    if (best < 0 || spectrum.weight[i] > spectrum.weight[static_cast<std::size_t>(best)])
      best = static_cast<long>(i);
  }
  if (best < 0 || background.empty()) return std::nullopt;
  const auto ub = static_cast<std::size_t>(best);
  const double peak = spectrum.weight[ub];
  if (!(peak > 0.0)) return std::nullopt;

  std::nth_element(background.begin(),
                   background.begin() + static_cast<long>(background.size()) / 2,
                   background.end());
  const double median = background[background.size() / 2];
  const double significance =
      median > 0.0 ? peak / median : std::numeric_limits<double>::infinity();
  if (significance < significance_threshold) return std::nullopt;

  // Quadratic refinement on the three bins around the maximum.
  const double wl = spectrum.weight[ub - 1];
  const double wr = spectrum.weight[ub + 1];
  const double denom = wl - 2.0 * peak + wr;
  double shift = 0.0;
  if (denom < 0.0) shift = 0.5 * (wl - wr) / denom;
  shift = std::clamp(shift, -0.5, 0.5);

  GratingDetection det;
  det.k_peak = spectrum.k[ub] + shift * spectrum.bin_width;
  det.k_uncertainty = 0.5 * spectrum.bin_width;
  det.weight = peak;
  det.significance = significance;
  return det;
}

bool Region::overlaps(const Region& other) const {
  return x0 < other.x1 && other.x0 < x1 && y0 < other.y1 && other.y0 < y1;
}

PeakReport peak_fractions(const DetectorImage& img,
                          const std::vector<Region>& regions) {
  for (std::size_t i = 0; i < regions.size(); ++i)
    for (std::size_t j = i + 1; j < regions.size(); ++j)
      if (regions[i].overlaps(regions[j]))
        throw config_error("peak regions must be disjoint");

  const double total = img.integral();
  if (!(total > 0.0)) throw numeric_error("detector image holds no counts");

  PeakReport report;
  report.fractions.assign(regions.size(), 0.0);
  report.peak_positions.assign(regions.size(), {0.0, 0.0});
  std::vector<double> wx(regions.size(), 0.0), wy(regions.size(), 0.0);

  struct RadialSample {
    double r2;
    double counts;
  };
  std::vector<RadialSample> radial;
  radial.reserve(img.values.size());
  const double area = img.pitch * img.pitch;

  for (int iy = 0; iy < img.ny; ++iy)
    for (int ix = 0; ix < img.nx; ++ix) {
      const double v = img.at(iy, ix);
      const double x = img.pixel_center_x(ix);
      const double y = img.pixel_center_y(iy);
      if (v > 0.0) radial.push_back({x * x + y * y, v * area});
      if (v == 0.0) continue;
      for (std::size_t r = 0; r < regions.size(); ++r) {
        if (!regions[r].contains(x, y)) continue;
        report.fractions[r] += v * area;
        wx[r] += v * area * x;
        wy[r] += v * area * y;
        break;
      }
    }

  for (std::size_t r = 0; r < regions.size(); ++r) {
    if (report.fractions[r] > 0.0) {
      report.peak_positions[r] = {wx[r] / report.fractions[r],
                                  wy[r] / report.fractions[r]};
    }
    report.fractions[r] /= total;
  }

  std::sort(radial.begin(), radial.end(),
            [](const RadialSample& a, const RadialSample& b) {
              return a.r2 < b.r2;
            });
  double acc = 0.0;
  const double target = 0.95 * total;
  for (const auto& s : radial) {
    acc += s.counts;
    if (acc >= target) {
      report.halo_radius = std::sqrt(s.r2);
      break;
    }
  }
  return report;
}

std::vector<Region> symmetric_peak_regions(const DetectorImage& img,
                                           double min_abs_x, double min_abs_y,
                                           double half_x, double half_y) {
  double best = -1.0;
  double xc = 0.0, yc = 0.0;
  for (int iy = 0; iy < img.ny; ++iy)
    for (int ix = 0; ix < img.nx; ++ix) {
      const double x = img.pixel_center_x(ix);
      const double y = img.pixel_center_y(iy);
      if (std::abs(x) < min_abs_x || std::abs(y) < min_abs_y) continue;
      if (img.at(iy, ix) > best) {
        best = img.at(iy, ix);
        xc = std::abs(x);
        yc = std::abs(y);
      }
    }
  if (best < 0.0)
    throw numeric_error("no detector signal outside the excluded band");
  std::vector<Region> regions;
  for (const double sx : {-1.0, 1.0})
    for (const double sy : {-1.0, 1.0})
      regions.push_back(Region{sx * xc - half_x, sx * xc + half_x,
                               sy * yc - half_y, sy * yc + half_y});
  for (std::size_t i = 0; i < regions.size(); ++i)
    for (std::size_t j = i + 1; j < regions.size(); ++j)
      if (regions[i].overlaps(regions[j]))
        throw config_error(
            "peak regions overlap; increase the exclusion band or shrink "
            "the boxes");
  return regions;
}

std::vector<double> axis_profile(const DetectorImage& img, int axis,
                                 double band_halfwidth) {
  if (axis != 0 && axis != 1) throw config_error("profile axis must be 0 or 1");
  const int n = axis == 0 ? img.nx : img.ny;
  const int m = axis == 0 ? img.ny : img.nx;
  std::vector<double> profile(static_cast<std::size_t>(n), 0.0);
  const double area = img.pitch * img.pitch;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      const int ix = axis == 0 ? i : j;
      const int iy = axis == 0 ? j : i;
      const double perp =
          axis == 0 ? img.pixel_center_y(iy) : img.pixel_center_x(ix);
      if (band_halfwidth > 0.0 && std::abs(perp) > band_halfwidth) continue;
      profile[static_cast<std::size_t>(i)] += img.at(iy, ix) * area;
    }
  return profile;
}

ProbedDensities probe_densities(const std::vector<double>& density_m1,
                                const std::vector<double>& density_m0,
                                const Grid& g, const PhysicsParams& p,
                                DensityProbe probe, double band_fraction) {
  if (density_m1.size() != static_cast<std::size_t>(g.point_count()) ||
      density_m0.size() != density_m1.size())
    throw config_error("density map size mismatch");

  if (probe == DensityProbe::center) {
    std::array<int, 3> c{g.size(0) / 2, g.size(1) / 2, g.size(2) / 2};
    const long flat = c[0] + static_cast<long>(g.size(0)) *
                                 (c[1] + static_cast<long>(g.size(1)) * c[2]);
    return {density_m1[static_cast<std::size_t>(flat)],
            density_m0[static_cast<std::size_t>(flat)]};
  }

  if (probe == DensityProbe::max_resonance) {
    const double kap = kappa(p);
    double best = -std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t i = 0; i < density_m1.size(); ++i) {
      const double n1 = density_m1[i], n0 = density_m0[i];
      const double f = 2.0 * std::sqrt(n1 * n0) - n1 - kap * n0;
      if (f > best) {
        best = f;
        arg = i;
      }
    }
    return {density_m1[arg], density_m0[arg]};
  }

  const double level = p.hbar() * std::abs(p.detuning);
  if (!(level > 0.0))
    throw config_error("surface probe needs a nonzero detuning");
  const auto v = trap_potential(p, g);
  double n1 = 0.0, n0 = 0.0;
  long count = 0;
  for (long flat = 0; flat < g.point_count(); ++flat) {
    if (std::abs(v[static_cast<std::size_t>(flat)] - level) >
        band_fraction * level)
      continue;
    n1 += density_m1[static_cast<std::size_t>(flat)];
    n0 += density_m0[static_cast<std::size_t>(flat)];
    ++count;
  }
  if (count == 0)
    throw numeric_error("no grid points on the resonant outcoupling surface");
  return {n1 / static_cast<double>(count), n0 / static_cast<double>(count)};
}

ProbedDensities probe_densities(const SpinorField& state,
                                const PhysicsParams& p, DensityProbe probe,
                                double band_fraction) {
  const Grid& g = state.grid();
  std::vector<double> n1(static_cast<std::size_t>(g.point_count()));
  std::vector<double> n0(n1.size());
  const auto p1 = state.component(1).values();
  const auto p0 = state.component(0).values();
  for (long i = 0; i < g.point_count(); ++i) {
    n1[static_cast<std::size_t>(i)] = std::norm(p1[i]);
    n0[static_cast<std::size_t>(i)] = std::norm(p0[i]);
  }
  return probe_densities(n1, n0, g, p, probe, band_fraction);
}

}  // namespace pbsim
