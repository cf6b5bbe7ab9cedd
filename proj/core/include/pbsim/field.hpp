#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "pbsim/grid.hpp"

namespace pbsim {

using cplx = std::complex<double>;

namespace detail {
// Allocator backed by fftw_malloc so field storage always satisfies the
// alignment the transform plans were created with.
template <class T>
struct FftwAllocator {
  using value_type = T;
  FftwAllocator() = default;
  template <class U>
  FftwAllocator(const FftwAllocator<U>&) {}
  T* allocate(std::size_t n);
  void deallocate(T* p, std::size_t) noexcept;
  bool operator==(const FftwAllocator&) const { return true; }
};
void* aligned_alloc_bytes(std::size_t bytes);
void aligned_free_bytes(void* p) noexcept;

template <class T>
T* FftwAllocator<T>::allocate(std::size_t n) {
  return static_cast<T*>(aligned_alloc_bytes(n * sizeof(T)));
}
template <class T>
void FftwAllocator<T>::deallocate(T* p, std::size_t) noexcept {
  aligned_free_bytes(p);
}
}  // namespace detail

using aligned_cvector = std::vector<cplx, detail::FftwAllocator<cplx>>;

enum class Space { position, momentum };

// A complex scalar field sampled on a Grid, tagged with the space its
// samples live in. Values have units m^(-d/2) in position space and
// m^(d/2) in momentum space so that sum |f|^2 * volume_element is an atom
// number in either space.
class ComplexField {
 public:
  explicit ComplexField(std::shared_ptr<const Grid> grid,
                        Space space = Space::position);

  const Grid& grid() const { return *grid_; }
  const std::shared_ptr<const Grid>& grid_ptr() const { return grid_; }
  Space space() const { return space_; }
  void set_space(Space s) { space_ = s; }

  std::span<cplx> values() { return {data_.data(), data_.size()}; }
  std::span<const cplx> values() const { return {data_.data(), data_.size()}; }
  cplx* data() { return data_.data(); }
  const cplx* data() const { return data_.data(); }
  long size() const { return static_cast<long>(data_.size()); }

  void fill(cplx value);
  void swap_storage(ComplexField& other);

 private:
  std::shared_ptr<const Grid> grid_;
  Space space_;
  aligned_cvector data_;
};

// Unitary transforms between position and momentum representation:
//   to_momentum: g(k) = sum_x f(x) e^{-i k x} dV / (2 pi)^(d/2)
//   to_position: f(x) = sum_k g(k) e^{+i k x} dVk / (2 pi)^(d/2)
// The pair is an exact round trip and preserves sum |f|^2 * element
// (Parseval). Throws config_error if the input is already in the target
// space.
ComplexField to_momentum(const ComplexField& f);
ComplexField to_position(const ComplexField& f);

// As above but writing into `out` (same grid shape, any prior content).
void to_momentum(const ComplexField& f, ComplexField& out);
void to_position(const ComplexField& f, ComplexField& out);

// In-place flavor; `scratch` must share the grid shape and is clobbered.
void transform_inplace(ComplexField& f, ComplexField& scratch, Space target);

// sum |f|^2 * element in the field's own space; equals the atom number for
// a wavefunction.
double total_number(const ComplexField& f);

// sum conj(a) b * element. Fields must share grid and space.
cplx inner_product(const ComplexField& a, const ComplexField& b);

// Spectral Laplacian of a position-space field (exact for band-limited
// samples): transforms, multiplies by -k^2, transforms back.
ComplexField spectral_laplacian(const ComplexField& f);

// True if any sample is NaN or Inf.
bool has_non_finite(const ComplexField& f);

}  // namespace pbsim
