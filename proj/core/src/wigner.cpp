#include "pbsim/wigner.hpp"

#include <cmath>
#include <thread>
#include <vector>

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

double to_unit(std::uint64_t x) {
  // (0, 1], so the logarithm below stays finite.
  return (static_cast<double>(x >> 11) + 1.0) * 0x1.0p-53;
}

bool mode_selected(const Grid& g, const std::array<int, 3>& idx,
                   double fraction) {
  for (int axis = 0; axis < g.dims(); ++axis) {
    const double kmax = g.max_wavenumber(axis);
    if (std::abs(g.wavenumber(axis, idx[axis])) >
        fraction * kmax * (1.0 + 1e-12))
      return false;
  }
  return true;
}
}  // namespace

void WignerConfig::validate() const {
  if (trajectories < 1) throw config_error("trajectory count must be positive");
  if (!(mode_fraction > 0.0) || mode_fraction > 1.0)
    throw config_error("mode fraction must lie in (0, 1]");
  if (threads < 1) throw config_error("thread count must be positive");
  if (capture_time < 0.0) throw config_error("capture time must be non-negative");
}

cplx vacuum_noise(std::uint64_t seed, std::uint64_t trajectory, int component,
                  std::uint64_t mode) {
  std::uint64_t h = mix64(seed ^ 0x243f6a8885a308d3ULL);
  h = mix64(h ^ trajectory);
  h = mix64(h ^ static_cast<std::uint64_t>(component + 1));
  h = mix64(h ^ mode);
  const double u1 = to_unit(mix64(h ^ 0x13198a2e03707344ULL));
  const double u2 = to_unit(mix64(h ^ 0xa4093822299f31d0ULL));
  const double r = std::sqrt(-0.5 * std::log(u1));
  return {r * std::cos(kTwoPi * u2), r * std::sin(kTwoPi * u2)};
}

long noised_mode_count(const Grid& g, double mode_fraction) {
  long count = 0;
  for (long flat = 0; flat < g.point_count(); ++flat)
    if (mode_selected(g, g.unflatten(flat), mode_fraction)) ++count;
  return count;
}

SpinorField sample_initial(const ComplexField& condensate_mp1,
                           const WignerConfig& cfg, int trajectory) {
  cfg.validate();
  if (condensate_mp1.space() != Space::position)
    throw config_error("condensate amplitude must be in position space");
  const auto grid = condensate_mp1.grid_ptr();
  const Grid& g = *grid;
  const double amp = 1.0 / std::sqrt(g.momentum_volume_element());

  SpinorField out(grid);
  out.time = 0.0;
  for (int c = 0; c < 3; ++c) {
    ComplexField mom = c == 2 ? to_momentum(condensate_mp1)
                              : ComplexField(grid, Space::momentum);
    auto mv = mom.values();
    for (long flat = 0; flat < mom.size(); ++flat) {
      if (!mode_selected(g, g.unflatten(flat), cfg.mode_fraction)) continue;
      mv[flat] += amp * vacuum_noise(cfg.seed,
                                     static_cast<std::uint64_t>(trajectory), c,
                                     static_cast<std::uint64_t>(flat));
    }
    out.psi[c] = to_position(mom);
  }
  return out;
}

namespace {
struct Accumulator {
  std::array<std::vector<double>, 3> density_sum;
  std::array<std::vector<double>, 3> density_sumsq;
  std::array<std::vector<double>, 3> momentum_sum;
  std::array<std::vector<double>, 3> cap_density_sum;
  std::array<std::vector<double>, 3> cap_momentum_sum;
  BoundaryFluxRecord flux_sum;
  std::array<double, 3> removed_sum{0.0, 0.0, 0.0};
  double cap_time_sum = 0.0;
  bool flux_init = false;
  int count = 0;

  explicit Accumulator(long points, bool with_capture) {
    for (int c = 0; c < 3; ++c) {
      density_sum[c].assign(static_cast<std::size_t>(points), 0.0);
      density_sumsq[c].assign(static_cast<std::size_t>(points), 0.0);
      momentum_sum[c].assign(static_cast<std::size_t>(points), 0.0);
      if (with_capture) {
        cap_density_sum[c].assign(static_cast<std::size_t>(points), 0.0);
        cap_momentum_sum[c].assign(static_cast<std::size_t>(points), 0.0);
      }
    }
  }

  void add_capture(const SpinorField& s) {
    for (int c = 0; c < 3; ++c) {
      const auto pv = s.psi[c].values();
      for (long i = 0; i < s.psi[c].size(); ++i)
        cap_density_sum[c][static_cast<std::size_t>(i)] += std::norm(pv[i]);
      ComplexField mom = to_momentum(s.psi[c]);
      const auto mv = mom.values();
      for (long i = 0; i < mom.size(); ++i)
        cap_momentum_sum[c][static_cast<std::size_t>(i)] += std::norm(mv[i]);
    }
    cap_time_sum += s.time;
  }

  void add(const EvolveResult& r) {
    for (int c = 0; c < 3; ++c) {
      const auto pv = r.state.psi[c].values();
      for (long i = 0; i < r.state.psi[c].size(); ++i) {
        const double n = std::norm(pv[i]);
        density_sum[c][static_cast<std::size_t>(i)] += n;
        density_sumsq[c][static_cast<std::size_t>(i)] += n * n;
      }
      ComplexField mom = to_momentum(r.state.psi[c]);
      const auto mv = mom.values();
      for (long i = 0; i < mom.size(); ++i)
        momentum_sum[c][static_cast<std::size_t>(i)] += std::norm(mv[i]);
      removed_sum[c] += r.removed[c];
    }
    if (!r.flux.atoms.empty()) {
      if (!flux_init) {
        flux_sum = r.flux;
        flux_init = true;
      } else {
        flux_sum.accumulate(r.flux);
      }
    }
    ++count;
  }

  void merge(const Accumulator& other) {
    for (int c = 0; c < 3; ++c) {
      for (std::size_t i = 0; i < density_sum[c].size(); ++i) {
        density_sum[c][i] += other.density_sum[c][i];
        density_sumsq[c][i] += other.density_sumsq[c][i];
        momentum_sum[c][i] += other.momentum_sum[c][i];
      }
      for (std::size_t i = 0; i < cap_density_sum[c].size(); ++i) {
        cap_density_sum[c][i] += other.cap_density_sum[c][i];
        cap_momentum_sum[c][i] += other.cap_momentum_sum[c][i];
      }
      removed_sum[c] += other.removed_sum[c];
    }
    cap_time_sum += other.cap_time_sum;
    if (other.flux_init) {
      if (!flux_init) {
        flux_sum = other.flux_sum;
        flux_init = true;
      } else {
        flux_sum.accumulate(other.flux_sum);
      }
    }
    count += other.count;
  }
};
}  // namespace

EnsembleRunResult run_ensemble(const ComplexField& condensate_mp1,
                               const PhysicsParams& p,
                               const EvolutionConfig& evolution,
                               const WignerConfig& cfg) {
  cfg.validate();
  const auto grid = condensate_mp1.grid_ptr();
  const long points = grid->point_count();
  const int workers = std::min(cfg.threads, cfg.trajectories);
  const bool with_capture = cfg.capture_time > 0.0;

  long capture_step = 0;
  if (with_capture) {
    const long steps = std::lround(evolution.t_final / evolution.dt);
    const double dt_used = evolution.t_final / static_cast<double>(steps);
    capture_step =
        std::clamp(std::lround(cfg.capture_time / dt_used), 1l, steps);
  }

  std::vector<Accumulator> parts;
  parts.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) parts.emplace_back(points, with_capture);

  auto run_range = [&](int w, int begin, int end) {
    Accumulator& acc = parts[static_cast<std::size_t>(w)];
    StepObserver observer;
    if (with_capture)
      observer = [&acc, capture_step](const SpinorField& s, int step) {
        if (step == capture_step) acc.add_capture(s);
      };
    for (int traj = begin; traj < end; ++traj) {
      SpinorField s = sample_initial(condensate_mp1, cfg, traj);
      EvolveResult r = evolve(std::move(s), p, evolution, observer);
      acc.add(r);
    }
  };

  if (workers == 1) {
    run_range(0, 0, cfg.trajectories);
  } else {
    std::vector<std::thread> pool;
    const int per = (cfg.trajectories + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const int begin = w * per;
      const int end = std::min(cfg.trajectories, begin + per);
      if (begin >= end) break;
      pool.emplace_back(run_range, w, begin, end);
    }
    for (auto& t : pool) t.join();
  }

  Accumulator total(points, with_capture);
  for (const auto& part : parts) total.merge(part);
  const int n = total.count;
  if (n < 1) throw numeric_error("ensemble produced no trajectories");

  EnsembleRunResult out;
  out.completed = n;
  out.moments.grid = grid;
  out.moments.trajectories = n;
  out.moments.noised_modes = noised_mode_count(*grid, cfg.mode_fraction);

  const double vacuum_pos =
      static_cast<double>(out.moments.noised_modes) / (2.0 * grid->box_volume());
  const double vacuum_mom = 0.5 / grid->momentum_volume_element();
  for (int c = 0; c < 3; ++c) {
    auto& mean = out.moments.mean_density[c];
    auto& var = out.moments.var_density[c];
    auto& mom = out.moments.mean_momentum_density[c];
    mean.resize(static_cast<std::size_t>(points));
    var.resize(static_cast<std::size_t>(points));
    mom.resize(static_cast<std::size_t>(points));
    for (long i = 0; i < points; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      const double m1 = total.density_sum[c][ui] / n;
      mean[ui] = m1 - vacuum_pos;
      var[ui] = n > 1
                    ? std::max(0.0, (total.density_sumsq[c][ui] - n * m1 * m1) /
                                        (n - 1))
                    : 0.0;
      mom[ui] = total.momentum_sum[c][ui] / n;
      if (mode_selected(*grid, grid->unflatten(i), cfg.mode_fraction))
        mom[ui] -= vacuum_mom;
    }
    out.mean_removed[c] = total.removed_sum[c] / n;
  }
  if (total.flux_init) {
    out.mean_flux = std::move(total.flux_sum);
    out.mean_flux.scale(1.0 / n);
  }
  if (with_capture) {
    out.capture.time = total.cap_time_sum / n;
    for (int c = 0; c < 3; ++c) {
      auto& den = out.capture.mean_density[c];
      auto& mom = out.capture.mean_momentum_density[c];
      den.resize(static_cast<std::size_t>(points));
      mom.resize(static_cast<std::size_t>(points));
      for (long i = 0; i < points; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        den[ui] = total.cap_density_sum[c][ui] / n - vacuum_pos;
        mom[ui] = total.cap_momentum_sum[c][ui] / n;
        if (mode_selected(*grid, grid->unflatten(i), cfg.mode_fraction))
          mom[ui] -= vacuum_mom;
      }
    }
  }
  return out;
}

}  // namespace pbsim
