#include "pbsim/field.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "pbsim/errors.hpp"

namespace pbsim {

namespace detail {
void* aligned_alloc_bytes(std::size_t bytes) {
  void* p = fftw_malloc(bytes == 0 ? 1 : bytes);
  if (!p) throw std::bad_alloc();
  return p;
}
void aligned_free_bytes(void* p) noexcept { fftw_free(p); }
}  // namespace detail

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

// Plans are cached per grid shape and direction. FFTW planning is not
// thread safe; execution through fftw_execute_dft on distinct arrays is.
// Plans are created on scratch buffers from fftw_malloc, matching the
// alignment of field storage, and reused via the new-array interface.
struct PlanKey {
  int dims;
  int n0, n1, n2;
  int sign;
  auto operator<=>(const PlanKey&) const = default;
};

class PlanCache {
 public:
  fftw_plan get(const Grid& g, int sign) {
    PlanKey key{g.dims(), g.size(0), g.size(1), g.size(2), sign};
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;

    const long total = g.point_count();
    fftw_complex* in = fftw_alloc_complex(total);
    fftw_complex* out = fftw_alloc_complex(total);
    // Axis 0 is contiguous in our layout; FFTW wants the contiguous axis
    // last, so axis order is reversed here.
    fftw_plan plan = nullptr;
    switch (g.dims()) {
      case 1:
        plan = fftw_plan_dft_1d(g.size(0), in, out, sign, FFTW_MEASURE);
        break;
      case 2:
        plan = fftw_plan_dft_2d(g.size(1), g.size(0), in, out, sign,
                                FFTW_MEASURE);
        break;
      case 3:
        plan = fftw_plan_dft_3d(g.size(2), g.size(1), g.size(0), in, out, sign,
                                FFTW_MEASURE);
        break;
    }
    fftw_free(in);
    fftw_free(out);
    if (!plan) throw numeric_error("fftw plan creation failed");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<PlanKey, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

void execute_dft(const Grid& g, int sign, const cplx* in, cplx* out) {
  fftw_plan plan = plan_cache().get(g, sign);
  fftw_execute_dft(plan,
                   reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

void transform_into(const ComplexField& f, ComplexField& out, Space target) {
  if (f.space() == target)
    throw config_error("field is already in the requested space");
  if (!f.grid().same_shape(out.grid()))
    throw config_error("transform output grid shape mismatch");
  const Grid& g = f.grid();
  const int sign = target == Space::momentum ? FFTW_FORWARD : FFTW_BACKWARD;
  execute_dft(g, sign, f.data(), out.data());
  const double element = target == Space::momentum
                             ? g.volume_element()
                             : g.momentum_volume_element();
  const double scale = element / std::pow(kTwoPi, 0.5 * g.dims());
  for (auto& v : out.values()) v *= scale;
  out.set_space(target);
}

}  // namespace

ComplexField::ComplexField(std::shared_ptr<const Grid> grid, Space space)
    : grid_(std::move(grid)), space_(space) {
  data_.resize(static_cast<std::size_t>(grid_->point_count()), cplx{0.0, 0.0});
}

void ComplexField::fill(cplx value) {
  for (auto& v : data_) v = value;
}

void ComplexField::swap_storage(ComplexField& other) {
  if (!grid_->same_shape(other.grid()))
    throw config_error("swap_storage grid shape mismatch");
  data_.swap(other.data_);
  std::swap(space_, other.space_);
}

ComplexField to_momentum(const ComplexField& f) {
  ComplexField out(f.grid_ptr(), Space::momentum);
  transform_into(f, out, Space::momentum);
  return out;
}

ComplexField to_position(const ComplexField& f) {
  ComplexField out(f.grid_ptr(), Space::position);
  transform_into(f, out, Space::position);
  return out;
}

void to_momentum(const ComplexField& f, ComplexField& out) {
  transform_into(f, out, Space::momentum);
}

void to_position(const ComplexField& f, ComplexField& out) {
  transform_into(f, out, Space::position);
}

void transform_inplace(ComplexField& f, ComplexField& scratch, Space target) {
  transform_into(f, scratch, target);
  f.swap_storage(scratch);
}

double total_number(const ComplexField& f) {
  const double element = f.space() == Space::position
                             ? f.grid().volume_element()
                             : f.grid().momentum_volume_element();
  double acc = 0.0;
  for (const auto& v : f.values()) acc += std::norm(v);
  return acc * element;
}

cplx inner_product(const ComplexField& a, const ComplexField& b) {
  if (!a.grid().same_shape(b.grid()) || a.space() != b.space())
    throw config_error("inner_product requires matching grid and space");
  const double element = a.space() == Space::position
                             ? a.grid().volume_element()
                             : a.grid().momentum_volume_element();
  cplx acc{0.0, 0.0};
  const auto av = a.values();
  const auto bv = b.values();
  for (long i = 0; i < a.size(); ++i) acc += std::conj(av[i]) * bv[i];
  return acc * element;
}

ComplexField spectral_laplacian(const ComplexField& f) {
  if (f.space() != Space::position)
    throw config_error("spectral_laplacian expects a position-space field");
  const Grid& g = f.grid();
  ComplexField work = to_momentum(f);
  auto vals = work.values();
  for (long flat = 0; flat < work.size(); ++flat) {
    const auto idx = g.unflatten(flat);
    double k2 = 0.0;
    for (int axis = 0; axis < g.dims(); ++axis) {
      const double k = g.wavenumber(axis, idx[axis]);
      k2 += k * k;
    }
    vals[flat] *= -k2;
  }
  return to_position(work);
}

bool has_non_finite(const ComplexField& f) {
  for (const auto& v : f.values()) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return true;
  }
  return false;
}

}  // namespace pbsim
