#pragma once

#include <array>
#include <memory>
#include <vector>

namespace pbsim {

// Uniform periodic lattice in 1, 2 or 3 dimensions. Sizes must be powers of
// two. Coordinates are centered, x_i = (i - n/2) dx, so the trap center
// lies on a lattice point. Wavenumbers follow FFT storage order,
// (2 pi / L) * {0, 1, ..., n/2 - 1, -n/2, ..., -1}.
//
// Flat storage is row-major with axis 0 fastest:
//   flat = i0 + n0 * (i1 + n1 * i2).
class Grid {
 public:
  static std::shared_ptr<const Grid> make_1d(int n0, double length0);
  static std::shared_ptr<const Grid> make_2d(int n0, int n1, double length0,
                                             double length1);
  static std::shared_ptr<const Grid> make_3d(int n0, int n1, int n2,
                                             double length0, double length1,
                                             double length2);
  static std::shared_ptr<const Grid> make(int dims, std::array<int, 3> n,
                                          std::array<double, 3> length);

  int dims() const { return dims_; }
  int size(int axis) const { return n_[axis]; }
  long point_count() const { return total_; }
  double length(int axis) const { return length_[axis]; }
  double spacing(int axis) const { return length_[axis] / n_[axis]; }

  // Real-space volume element dx0*dx1*... and its momentum-space
  // counterpart (2 pi / L0)*(2 pi / L1)*...
  double volume_element() const { return dv_; }
  double momentum_volume_element() const { return dvk_; }
  double box_volume() const { return dv_ * total_; }

  double coordinate(int axis, int index) const { return coord_[axis][index]; }
  double wavenumber(int axis, int index) const { return wavenum_[axis][index]; }
  const std::vector<double>& coordinates(int axis) const {
    return coord_[axis];
  }
  const std::vector<double>& wavenumbers(int axis) const {
    return wavenum_[axis];
  }
  double max_wavenumber(int axis) const;

  // Decomposes a flat index into per-axis indices (axis 0 fastest).
  std::array<int, 3> unflatten(long flat) const;

  bool same_shape(const Grid& other) const;

 private:
  Grid(int dims, std::array<int, 3> n, std::array<double, 3> length);

  int dims_;
  std::array<int, 3> n_;
  std::array<double, 3> length_;
  long total_;
  double dv_;
  double dvk_;
  std::array<std::vector<double>, 3> coord_;
  std::array<std::vector<double>, 3> wavenum_;
};

}  // namespace pbsim
