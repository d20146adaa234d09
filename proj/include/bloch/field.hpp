#pragma once

#include <Eigen/Dense>
#include <optional>

#include "bloch/lattice.hpp"

namespace bloch {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

// Scalar field on the torus, stored both as quadrature-grid samples and as
// Fourier coefficients on the truncated mode set.  Coefficients are the DFT of
// the samples restricted to |n_j| <= nmax; spectral operations (derivatives,
// convolutions in assembly) act on the band-limited representation.
class PeriodicScalarField {
 public:
  static PeriodicScalarField zero(const TorusLattice& lat);
  static PeriodicScalarField constant(const TorusLattice& lat, Complex c);
  // amplitude * cos(2*pi*harmonic*s_axis) in lattice coordinates.
  static PeriodicScalarField cosine(const TorusLattice& lat, int axis,
                                    double amplitude, int harmonic = 1);
  static PeriodicScalarField from_samples(const TorusLattice& lat,
                                          const VectorXcd& samples);
  static PeriodicScalarField from_coeffs(const TorusLattice& lat,
                                         const VectorXcd& coeffs);

  const TorusLattice& lattice() const { return lat_; }
  const VectorXcd& coeffs() const { return coeffs_; }
  const VectorXcd& samples() const { return samples_; }
  VectorXcd to_samples() const { return samples_; }

  Complex coeff(int n1, int n2 = 0) const;
  Complex mean() const { return coeffs_[lat_.mode_index(0, 0)]; }

  bool real_flag() const { return real_flag_; }
  // Max violation of c_{-n} = conj(c_n) over the mode set.
  double reality_defect() const;
  // Relative consistency of the stored samples/coefficient pair under the DFT,
  // measured on the mode set.
  double fourier_consistency() const;
  // Max mismatch between stored samples and the band-limited synthesis.
  double band_limit_defect() const;

  // Euclidean partial derivative (axis 0: d/dx, axis 1: d/dy), spectral.
  PeriodicScalarField derivative(int axis) const;

  double max_abs() const;

 private:
  PeriodicScalarField(TorusLattice lat, VectorXcd coeffs, VectorXcd samples);

  TorusLattice lat_;
  VectorXcd coeffs_;
  VectorXcd samples_;
  bool real_flag_ = false;
};

PeriodicScalarField operator+(const PeriodicScalarField& a,
                              const PeriodicScalarField& b);
PeriodicScalarField operator-(const PeriodicScalarField& a,
                              const PeriodicScalarField& b);
PeriodicScalarField operator*(Complex c, const PeriodicScalarField& f);

// Unnormalized DFT helpers in lattice coordinates (bins laid out like the grid).
VectorXcd grid_to_bins(const TorusLattice& lat, const VectorXcd& samples);
VectorXcd bins_to_grid(const TorusLattice& lat, const VectorXcd& bins);

// Fourier coefficients of a grid function on the difference set |k_j| <= kmax,
// flattened as (k1+kmax)*(2*kmax+1) + (k2+kmax).  Requires kmax < grid/2.
VectorXcd difference_coefficients(const TorusLattice& lat,
                                  const VectorXcd& samples, int kmax);

// Area-weighted quadrature of grid samples: area * mean(samples).
Complex quadrature(const TorusLattice& lat, const VectorXcd& samples);
// integral of |f|^2 over the torus (Euclidean measure).
double integral_abs2(const PeriodicScalarField& f);
// bilinear integral of f^2 (no conjugation).
Complex integral_square(const PeriodicScalarField& f);

}  // namespace bloch
