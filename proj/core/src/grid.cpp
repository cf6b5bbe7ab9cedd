#include "pbsim/grid.hpp"

#include <cmath>
#include <string>

#include "pbsim/errors.hpp"

namespace pbsim {

namespace {
constexpr double kTwoPi = 6.28318530717958647692;

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }
}  // namespace

Grid::Grid(int dims, std::array<int, 3> n, std::array<double, 3> length)
    : dims_(dims), n_(n), length_(length) {
  if (dims < 1 || dims > 3) throw config_error("grid dims must be 1, 2 or 3");
  total_ = 1;
  dv_ = 1.0;
  dvk_ = 1.0;
  for (int axis = 0; axis < 3; ++axis) {
    if (axis >= dims) {
      n_[axis] = 1;
      length_[axis] = 0.0;
      continue;
    }
    if (!power_of_two(n_[axis]))
      throw config_error("grid size on axis " + std::to_string(axis) +
                         " must be a power of two, got " +
                         std::to_string(n_[axis]));
    if (!(length_[axis] > 0.0))
      throw config_error("grid length on axis " + std::to_string(axis) +
                         " must be positive");
    total_ *= n_[axis];
    dv_ *= spacing(axis);
    dvk_ *= kTwoPi / length_[axis];

    coord_[axis].resize(n_[axis]);
    wavenum_[axis].resize(n_[axis]);
    const double dx = spacing(axis);
    const double dk = kTwoPi / length_[axis];
    for (int i = 0; i < n_[axis]; ++i) {
      coord_[axis][i] = (i - n_[axis] / 2) * dx;
      wavenum_[axis][i] = (i < n_[axis] / 2 ? i : i - n_[axis]) * dk;
    }
  }
}

std::shared_ptr<const Grid> Grid::make(int dims, std::array<int, 3> n,
                                       std::array<double, 3> length) {
  return std::shared_ptr<const Grid>(new Grid(dims, n, length));
}

std::shared_ptr<const Grid> Grid::make_1d(int n0, double length0) {
  return make(1, {n0, 1, 1}, {length0, 0.0, 0.0});
}

std::shared_ptr<const Grid> Grid::make_2d(int n0, int n1, double length0,
                                          double length1) {
  return make(2, {n0, n1, 1}, {length0, length1, 0.0});
}

std::shared_ptr<const Grid> Grid::make_3d(int n0, int n1, int n2,
                                          double length0, double length1,
                                          double length2) {
  return make(3, {n0, n1, n2}, {length0, length1, length2});
}

double Grid::max_wavenumber(int axis) const {
  return kTwoPi / length_[axis] * (n_[axis] / 2);
}

std::array<int, 3> Grid::unflatten(long flat) const {
  std::array<int, 3> idx{0, 0, 0};
  idx[0] = static_cast<int>(flat % n_[0]);
  flat /= n_[0];
  idx[1] = static_cast<int>(flat % n_[1]);
  idx[2] = static_cast<int>(flat / n_[1]);
  return idx;
}

bool Grid::same_shape(const Grid& other) const {
  if (dims_ != other.dims_) return false;
  for (int axis = 0; axis < dims_; ++axis) {
    if (n_[axis] != other.n_[axis]) return false;
    if (length_[axis] != other.length_[axis]) return false;
  }
  return true;
}

}  // namespace pbsim
