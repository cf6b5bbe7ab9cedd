#include "pbsim/detector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "pbsim/errors.hpp"

namespace pbsim {

namespace {
constexpr double kTwoPi = 6.28318530717958647692;

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double unit_double(std::uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}
}  // namespace

void DetectorConfig::validate() const {
  if (!(fall_height > 0.0)) throw config_error("fall height must be positive");
  if (!(pixel_pitch > 0.0)) throw config_error("pixel pitch must be positive");
  if (!(halfwidth > pixel_pitch))
    throw config_error("image halfwidth must exceed the pixel pitch");
  if (blur_width < 0.0) throw config_error("blur width must be non-negative");
  if (!(flat_epsilon > 0.0) || flat_epsilon >= 1.0)
    throw config_error("flat-field epsilon must lie in (0, 1)");
  if (!(max_masked_fraction >= 0.0) || max_masked_fraction > 1.0)
    throw config_error("masked fraction limit must lie in [0, 1]");
}

DetectorImage DetectorImage::zeros(int nx, int ny, double pitch) {
  DetectorImage img;
  img.nx = nx;
  img.ny = ny;
  img.pitch = pitch;
  img.values.assign(static_cast<std::size_t>(nx) * ny, 0.0);
  return img;
}

double DetectorImage::integral() const {
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc * pitch * pitch;
}

BallisticLanding ballistic_landing(double kx, double ky, double vz_down,
                                   double fall_height, const PhysicsParams& p) {
  const double g = p.gravity;
  if (!(g > 0.0)) throw config_error("ballistics needs positive gravity");
  if (!(fall_height > 0.0)) throw config_error("fall height must be positive");
  const double t =
      (-vz_down + std::sqrt(vz_down * vz_down + 2.0 * g * fall_height)) / g;
  const double scale = p.hbar() / p.atom_mass();
  return BallisticLanding{t, scale * kx * t, scale * ky * t};
}

int detector_pixel_count(const DetectorConfig& cfg) {
  return std::max(2, static_cast<int>(std::lround(2.0 * cfg.halfwidth /
                                                  cfg.pixel_pitch)));
}

DetectorImage propagate_to_detector(const BoundaryFluxRecord& flux,
                                    const PhysicsParams& p,
                                    const DetectorConfig& cfg) {
  cfg.validate();
  const int npix = detector_pixel_count(cfg);
  DetectorImage img = DetectorImage::zeros(npix, npix, cfg.pixel_pitch);
  img.fall_height = cfg.fall_height;
  const double area = cfg.pixel_pitch * cfg.pixel_pitch;

  for (int t = 0; t < flux.time_bins; ++t)
    for (int iy = 0; iy < flux.bins_y; ++iy)
      for (int ix = 0; ix < flux.bins_x; ++ix) {
        const double atoms = flux.atoms[flux.flat(t, iy, ix)];
        if (atoms == 0.0) continue;
        const BallisticLanding land = ballistic_landing(
            flux.bin_center_x(ix), flux.bins_y > 1 ? flux.bin_center_y(iy) : 0.0,
            flux.vz_mean(t, iy, ix), cfg.fall_height, p);
        img.total_atoms += atoms;
        const int px =
            static_cast<int>(std::floor((land.x + cfg.halfwidth) /
                                        cfg.pixel_pitch));
        const int py =
            static_cast<int>(std::floor((land.y + cfg.halfwidth) /
                                        cfg.pixel_pitch));
        if (px < 0 || px >= img.nx || py < 0 || py >= img.ny) continue;
        img.at(py, px) += atoms / area;
      }
  return img;
}

DetectorImage gaussian_blur(const DetectorImage& img, double width,
                            bool width_is_fwhm) {
  if (width < 0.0) throw config_error("blur width must be non-negative");
  if (width == 0.0) return img;
  const double sigma =
      width_is_fwhm ? width / (2.0 * std::sqrt(2.0 * std::log(2.0))) : width;
  const double sigma_pix = sigma / img.pitch;
  const int radius = std::max(1, static_cast<int>(std::ceil(5.0 * sigma_pix)));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double norm = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double w = std::exp(-0.5 * (i / sigma_pix) * (i / sigma_pix));
    kernel[static_cast<std::size_t>(i + radius)] = w;
    norm += w;
  }
  for (auto& w : kernel) w /= norm;

  DetectorImage tmp = img;
  // Rows, then columns; zero padding outside the image.
  for (int iy = 0; iy < img.ny; ++iy)
    for (int ix = 0; ix < img.nx; ++ix) {
      double acc = 0.0;
      for (int o = -radius; o <= radius; ++o) {
        const int j = ix + o;
        if (j < 0 || j >= img.nx) continue;
        acc += kernel[static_cast<std::size_t>(o + radius)] * img.at(iy, j);
      }
      tmp.at(iy, ix) = acc;
    }
  DetectorImage out = tmp;
  for (int iy = 0; iy < img.ny; ++iy)
    for (int ix = 0; ix < img.nx; ++ix) {
      double acc = 0.0;
      for (int o = -radius; o <= radius; ++o) {
        const int j = iy + o;
        if (j < 0 || j >= img.ny) continue;
        acc += kernel[static_cast<std::size_t>(o + radius)] * tmp.at(j, ix);
      }
      out.at(iy, ix) = acc;
    }
  return out;
}

DetectorImage flat_field_normalize(const DetectorImage& img,
                                   const DetectorImage& gain, double epsilon,
                                   double max_masked_fraction) {
  if (img.nx != gain.nx || img.ny != gain.ny)
    throw config_error("flat-field gain map shape mismatch");
  double mean = 0.0;
  for (double v : gain.values) mean += v;
  mean /= static_cast<double>(gain.values.size());
  if (!(mean > 0.0)) throw numeric_error("flat-field gain map has no signal");

  DetectorImage out = img;
  long masked = 0;
  for (std::size_t i = 0; i < img.values.size(); ++i) {
    const double rel = gain.values[i] / mean;
    if (rel < epsilon) {
      out.values[i] = 0.0;
      ++masked;
    } else {
      out.values[i] = img.values[i] / rel;
    }
  }
  out.masked_fraction =
      static_cast<double>(masked) / static_cast<double>(img.values.size());
  if (out.masked_fraction > max_masked_fraction)
    throw numeric_error("flat-field masking exceeds limit: " +
                        std::to_string(out.masked_fraction));
  return out;
}

DetectorImage synthesize_flat(int nx, int ny, double pitch, FlatModel model,
                              double amplitude, std::uint64_t seed) {
  if (nx < 1 || ny < 1) throw config_error("flat map needs positive shape");
  if (amplitude < 0.0 || amplitude >= 1.0)
    throw config_error("flat amplitude must lie in [0, 1)");
  DetectorImage img = DetectorImage::zeros(nx, ny, pitch);
  switch (model) {
    case FlatModel::uniform:
      for (auto& v : img.values) v = 1.0;
      break;
    case FlatModel::ripple:
      for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
          const double fx = static_cast<double>(ix) / nx;
          const double fy = static_cast<double>(iy) / ny;
          img.at(iy, ix) = 1.0 + amplitude * std::cos(kTwoPi * 3.0 * fx) *
                                     std::cos(kTwoPi * 2.0 * fy);
        }
      break;
    case FlatModel::blotches: {
      // Smooth random gain: a few dozen Gaussian bumps from a counter RNG.
      const int bumps = 40;
      for (int b = 0; b < bumps; ++b) {
        const double cx =
            unit_double(mix64(seed ^ (2 * b + 1))) * nx;
        const double cy =
            unit_double(mix64(seed ^ (2 * b + 2))) * ny;
        const double s =
            (0.05 + 0.10 * unit_double(mix64(seed ^ (1000 + b)))) *
            std::min(nx, ny);
        const double a =
            (2.0 * unit_double(mix64(seed ^ (2000 + b))) - 1.0);
        for (int iy = 0; iy < ny; ++iy)
          for (int ix = 0; ix < nx; ++ix) {
            const double dx = ix - cx, dy = iy - cy;
            img.at(iy, ix) += a * std::exp(-(dx * dx + dy * dy) / (2 * s * s));
          }
      }
      double lo = img.values[0], hi = img.values[0];
      for (double v : img.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      const double span = std::max(hi - lo, 1e-12);
      for (auto& v : img.values)
        v = 1.0 + amplitude * (2.0 * (v - lo) / span - 1.0);
      break;
    }
  }
  return img;
}

void write_image_csv(const std::filesystem::path& path,
                     const DetectorImage& img) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw config_error("cannot open " + path.string() + " for writing");
  char buf[40];
  for (int iy = 0; iy < img.ny; ++iy) {
    for (int ix = 0; ix < img.nx; ++ix) {
      std::snprintf(buf, sizeof(buf), "%.17g", img.at(iy, ix));
      out << buf << (ix + 1 == img.nx ? '\n' : ',');
    }
  }
  if (!out) throw config_error("short write to " + path.string());

  std::ofstream meta(path.string() + ".meta", std::ios::trunc);
  if (!meta) throw config_error("cannot write sidecar for " + path.string());
  char line[160];
  std::snprintf(line, sizeof(line),
                "nx=%d\nny=%d\npitch=%.17g\nfall_height=%.17g\n"
                "total_atoms=%.17g\nmasked_fraction=%.17g\n",
                img.nx, img.ny, img.pitch, img.fall_height, img.total_atoms,
                img.masked_fraction);
  meta << line;
}

DetectorImage read_image_csv(const std::filesystem::path& path) {
  std::ifstream meta(path.string() + ".meta");
  if (!meta) throw config_error("missing sidecar " + path.string() + ".meta");
  DetectorImage img;
  std::string line;
  while (std::getline(meta, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq);
    const double val = std::strtod(line.c_str() + eq + 1, nullptr);
    if (key == "nx") img.nx = static_cast<int>(val);
    else if (key == "ny") img.ny = static_cast<int>(val);
    else if (key == "pitch") img.pitch = val;
    else if (key == "fall_height") img.fall_height = val;
    else if (key == "total_atoms") img.total_atoms = val;
    else if (key == "masked_fraction") img.masked_fraction = val;
    else throw config_error("unknown key '" + key + "' in image sidecar");
  }
  if (img.nx < 1 || img.ny < 1 || !(img.pitch > 0.0))
    throw config_error("bad image geometry in sidecar of " + path.string());
  img.values.assign(static_cast<std::size_t>(img.nx) * img.ny, 0.0);

  std::ifstream in(path);
  if (!in) throw config_error("cannot open " + path.string());
  for (int iy = 0; iy < img.ny; ++iy) {
    if (!std::getline(in, line))
      throw config_error("truncated image CSV " + path.string());
    std::istringstream row(line);
    std::string cell;
    for (int ix = 0; ix < img.nx; ++ix) {
      if (!std::getline(row, cell, ','))
        throw config_error("short row in image CSV " + path.string());
      img.at(iy, ix) = std::strtod(cell.c_str(), nullptr);
    }
  }
  return img;
}

}  // namespace pbsim
