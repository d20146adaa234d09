#include "bloch/lattice.hpp"

#include <cmath>

namespace bloch {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

void check_common(int nmax, int grid_size) {
  if (nmax < 1) throw ConfigError("nmax must be >= 1");
  if (!is_power_of_two(grid_size))
    throw ConfigError("grid_size must be a power of two");
  if (grid_size < 4 * nmax + 2)
    throw ConfigError("grid too coarse: grid_size must be >= 4*nmax + 2");
}

}  // namespace

TorusLattice TorusLattice::make_1d(double period, int nmax, int grid_size) {
  check_common(nmax, grid_size);
  if (!(period > 0.0)) throw ConfigError("period must be positive");
  TorusLattice lat;
  lat.dim_ = 1;
  lat.nmax_ = nmax;
  lat.grid_ = grid_size;
  lat.e1_ = Complex(period, 0.0);
  lat.e2_ = Complex(0.0, 0.0);
  lat.area_ = period;
  lat.f1_ = Eigen::Vector2d(1.0 / period, 0.0);
  lat.f2_ = Eigen::Vector2d::Zero();
  return lat;
}

TorusLattice TorusLattice::make_2d(Complex e1, Complex e2, int nmax,
                                   int grid_size) {
  check_common(nmax, grid_size);
  const double det = (std::conj(e1) * e2).imag();
  if (!(det > 0.0))
    throw ConfigError("degenerate lattice: Im(conj(e1)*e2) must be positive");
  TorusLattice lat;
  lat.dim_ = 2;
  lat.nmax_ = nmax;
  lat.grid_ = grid_size;
  lat.e1_ = e1;
  lat.e2_ = e2;
  lat.area_ = det;
  // Rows of the inverse of the column matrix [e1 e2].
  lat.f1_ = Eigen::Vector2d(e2.imag(), -e2.real()) / det;
  lat.f2_ = Eigen::Vector2d(-e1.imag(), e1.real()) / det;
  return lat;
}

int TorusLattice::mode_count() const {
  const int m = modes_per_axis();
  return dim_ == 1 ? m : m * m;
}

int TorusLattice::grid_count() const {
  return dim_ == 1 ? grid_ : grid_ * grid_;
}

int TorusLattice::mode_index(int n1, int n2) const {
  const int m = modes_per_axis();
  if (dim_ == 1) return n1 + nmax_;
  return (n1 + nmax_) * m + (n2 + nmax_);
}

std::array<int, 2> TorusLattice::mode_of(int index) const {
  const int m = modes_per_axis();
  if (dim_ == 1) return {index - nmax_, 0};
  return {index / m - nmax_, index % m - nmax_};
}

bool TorusLattice::mode_in_range(int n1, int n2) const {
  if (std::abs(n1) > nmax_) return false;
  return dim_ == 1 || std::abs(n2) <= nmax_;
}

Eigen::Vector2d TorusLattice::dual(int m) const {
  return m == 0 ? f1_ : f2_;
}

Eigen::Vector2d TorusLattice::wavevector(int mode_idx) const {
  const auto n = mode_of(mode_idx);
  if (dim_ == 1) return kTwoPi * n[0] * f1_;
  return kTwoPi * (n[0] * f1_ + n[1] * f2_);
}

int TorusLattice::grid_index(int p, int q) const {
  return dim_ == 1 ? p : p * grid_ + q;
}

std::array<int, 2> TorusLattice::grid_of(int index) const {
  if (dim_ == 1) return {index, 0};
  return {index / grid_, index % grid_};
}

Complex TorusLattice::grid_point(int p, int q) const {
  const double s = static_cast<double>(p) / grid_;
  if (dim_ == 1) return Complex(s * e1_.real(), 0.0);
  const double t = static_cast<double>(q) / grid_;
  return s * e1_ + t * e2_;
}

bool TorusLattice::operator==(const TorusLattice& o) const {
  return dim_ == o.dim_ && nmax_ == o.nmax_ && grid_ == o.grid_ &&
         e1_ == o.e1_ && e2_ == o.e2_;
}

}  // namespace bloch
