#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "bloch/core.hpp"

namespace bloch {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

struct HermitianSpectrum {
  VectorXd eigenvalues;  // ascending
  std::optional<MatrixXcd> eigenvectors;

  VectorXd lowest(int k) const {
    return eigenvalues.head(std::min<int>(k, eigenvalues.size()));
  }
};

// Dense Hermitian eigendecomposition.  Throws NumericalError if the input
// fails the Hermiticity check ||A - A*|| <= 1e-12 ||A||.
HermitianSpectrum eigh(const MatrixXcd& A, bool want_vectors = true);

// det(A) = exp(log_magnitude + i*phase), phase in (-pi, pi].  A numerically
// singular pivot yields log_magnitude = -inf.
struct LogDet {
  double log_magnitude = 0.0;
  double phase = 0.0;

  bool singular() const { return !std::isfinite(log_magnitude); }
  Complex value() const {
    if (singular()) return Complex(0.0, 0.0);
    return std::exp(log_magnitude) * Complex(std::cos(phase), std::sin(phase));
  }
};

LogDet logdet(const MatrixXcd& A);

struct NewtonResult {
  Complex z;
  int iterations = 0;
  double residual = 0.0;  // |f(z)|
  double step = 0.0;      // |last Newton step|
};

// Complex Newton iteration with a finite-difference derivative (relative step
// 1e-6).  Converged when |step| <= tol * max(1, |z|); throws NumericalError on
// non-convergence or derivative underflow.  Scale-invariant in f.
NewtonResult newton_zero(const std::function<Complex(Complex)>& f, Complex z0,
                         double tol = 1e-10, int max_iter = 50);

struct LaurentFit {
  std::vector<int> powers;
  VectorXcd coefficients;   // aligned with powers
  double max_residual = 0.0;

  Complex coeff_of(int power) const;
};

// Least-squares fit of y ~ sum_p c_p * lambda^p over the given powers
// (default {1, -1}).  Requires >= 2x more samples than coefficients and
// distinct lambdas; throws NumericalError on rank deficiency.
LaurentFit fit_laurent(const std::vector<std::pair<Complex, Complex>>& samples,
                       std::vector<int> powers = {1, -1});

}  // namespace bloch
