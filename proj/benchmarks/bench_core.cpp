// Microbenchmarks for the hot evolution kernels. Trajectory throughput is
// dominated by the spectral transforms and the fused pointwise update, so
// those are tracked individually alongside one full split step.

#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>

#include "pbsim/dynamics.hpp"
#include "pbsim/field.hpp"
#include "pbsim/grid.hpp"
#include "pbsim/params.hpp"
#include "pbsim/wigner.hpp"

namespace {

pbsim::PhysicsParams bench_params() {
  pbsim::PhysicsParams p;
  p.atom_number = 1e5;
  p.trap_freqs = {2.0 * M_PI * 55.0, 2.0 * M_PI * 1020.0,
                  2.0 * M_PI * 1020.0};
  p.rabi_freq = 2.0 * M_PI * 350.0;
  p.detuning = -2.0 * M_PI * 2000.0;
  p.penning_rate = 9.3e-21;
  p.scattering = pbsim::ScatteringMatrix::helium();
  return p;
}

std::shared_ptr<const pbsim::Grid> bench_grid() {
  return pbsim::Grid::make_2d(256, 128, 240e-6, 60e-6);
}

pbsim::SpinorField bench_state() {
  const auto g = bench_grid();
  pbsim::SpinorField s(g);
  const auto& xs = g->coordinates(0);
  const auto& ys = g->coordinates(1);
  auto v = s.component(1).values();
  for (int iy = 0; iy < g->size(1); ++iy)
    for (int ix = 0; ix < g->size(0); ++ix)
      v[static_cast<std::size_t>(iy) * g->size(0) + ix] =
          std::exp(-(xs[ix] * xs[ix] / 9e-9 + ys[iy] * ys[iy] / 4e-10));
  return s;
}

void bm_transform_roundtrip(benchmark::State& state) {
  auto f = bench_state().component(1);
  for (auto _ : state) {
    auto k = pbsim::to_momentum(f);
    auto x = pbsim::to_position(k);
    benchmark::DoNotOptimize(x.values().data());
  }
}
BENCHMARK(bm_transform_roundtrip);

void bm_rabi_rotation(benchmark::State& state) {
  const auto s = bench_state();
  const auto p = bench_params();
  for (auto _ : state) {
    auto out = pbsim::rabi_rotation(s, p.rabi_freq, 2e-6);
    benchmark::DoNotOptimize(out.psi[0].values().data());
  }
}
BENCHMARK(bm_rabi_rotation);

void bm_penning_step(benchmark::State& state) {
  const auto s = bench_state();
  const auto p = bench_params();
  for (auto _ : state) {
    auto out = pbsim::penning_loss_step(s, p, 2e-6);
    benchmark::DoNotOptimize(out.psi[0].values().data());
  }
}
BENCHMARK(bm_penning_step);

void bm_full_step(benchmark::State& state) {
  const auto p = bench_params();
  pbsim::EvolutionConfig cfg;
  cfg.dt = 2e-6;
  cfg.t_final = 2e-6;
  auto s = bench_state();
  for (auto _ : state) {
    s = pbsim::step(s, p, cfg);
    benchmark::DoNotOptimize(s.psi[1].values().data());
  }
}
BENCHMARK(bm_full_step);

void bm_vacuum_noise_sampling(benchmark::State& state) {
  const auto g = bench_grid();
  pbsim::ComplexField cond(g, pbsim::Space::position);
  pbsim::WignerConfig w;
  w.seed = 7;
  int traj = 0;
  for (auto _ : state) {
    auto s = pbsim::sample_initial(cond, w, traj++);
    benchmark::DoNotOptimize(s.psi[2].values().data());
  }
}
BENCHMARK(bm_vacuum_noise_sampling);

}  // namespace

BENCHMARK_MAIN();
