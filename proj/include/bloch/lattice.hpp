#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "bloch/core.hpp"

namespace bloch {

// Flat torus M = C / (Z e1 + Z e2) in the standard Euclidean chart z = x + iy,
// or M = R / (period Z) in one dimension.  Fourier modes are indexed by the
// square block |n_j| <= nmax; quadrature lives on a uniform grid in lattice
// coordinates (s,t) in [0,1)^dim with grid_size samples per direction.
class TorusLattice {
 public:
  TorusLattice() = default;  // unit circle placeholder; use the factories
  static TorusLattice make_1d(double period, int nmax, int grid_size);
  static TorusLattice make_2d(Complex e1, Complex e2, int nmax, int grid_size);

  int dim() const { return dim_; }
  int nmax() const { return nmax_; }
  int grid_size() const { return grid_; }

  Complex e1() const { return e1_; }
  Complex e2() const { return e2_; }
  double period() const { return e1_.real(); }

  // dim 2: Im(conj(e1) e2); dim 1: the period.
  double area() const { return area_; }

  int modes_per_axis() const { return 2 * nmax_ + 1; }
  int mode_count() const;
  int grid_count() const;

  // Flattened index of the mode (n1,n2); n2 ignored in dim 1.
  int mode_index(int n1, int n2 = 0) const;
  std::array<int, 2> mode_of(int index) const;
  bool mode_in_range(int n1, int n2 = 0) const;

  // Dual basis f_m with <f_m, e_j> = delta_mj (dim 1: f = 1/period on the x axis).
  Eigen::Vector2d dual(int m) const;

  // Wavevector 2*pi*(n1 f1 + n2 f2) of the periodic mode exp(i<xi,x>).
  Eigen::Vector2d wavevector(int mode_idx) const;

  // Grid flattening: g = p*G + q with (s,t) = (p,q)/G; dim 1 uses p only.
  int grid_index(int p, int q = 0) const;
  std::array<int, 2> grid_of(int index) const;

  // Euclidean position of a grid node (dim 2: s*e1 + t*e2 as a complex number).
  Complex grid_point(int p, int q = 0) const;

  bool operator==(const TorusLattice& o) const;
  bool operator!=(const TorusLattice& o) const { return !(*this == o); }

 private:
  int dim_ = 1;
  int nmax_ = 1;
  int grid_ = 8;
  Complex e1_{1.0, 0.0};
  Complex e2_{0.0, 1.0};
  double area_ = 1.0;
  Eigen::Vector2d f1_{1.0, 0.0};
  Eigen::Vector2d f2_{0.0, 1.0};
};

}  // namespace bloch
