#include "bloch/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bloch {

HermitianSpectrum eigh(const MatrixXcd& A, bool want_vectors) {
  if (A.rows() != A.cols()) throw NumericalError("eigh: matrix not square");
  const double scale = A.norm();
  if (scale > 0.0 && (A - A.adjoint()).norm() > 1e-12 * scale)
    throw NumericalError("eigh: matrix not Hermitian");
  Eigen::SelfAdjointEigenSolver<MatrixXcd> solver(
      A, want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw NumericalError("eigh: eigensolver failed to converge");
  HermitianSpectrum out;
  out.eigenvalues = solver.eigenvalues();
  if (want_vectors) out.eigenvectors = solver.eigenvectors();
  return out;
}

LogDet logdet(const MatrixXcd& A) {
  if (A.rows() != A.cols()) throw NumericalError("logdet: matrix not square");
  if (!A.allFinite()) throw NumericalError("logdet: non-finite entries");
  if (A.rows() == 0) return LogDet{0.0, 0.0};
  Eigen::PartialPivLU<MatrixXcd> lu(A);
  LogDet out;
  double phase = lu.permutationP().determinant() < 0 ? kPi : 0.0;
  double logmag = 0.0;
  const auto diag = lu.matrixLU().diagonal();
  for (int i = 0; i < diag.size(); ++i) {
    const double a = std::abs(diag[i]);
    if (a == 0.0) {
      out.log_magnitude = -std::numeric_limits<double>::infinity();
      out.phase = 0.0;
      return out;
    }
    logmag += std::log(a);
    phase += std::arg(diag[i]);
  }
  out.log_magnitude = logmag;
  out.phase = std::remainder(phase, kTwoPi);
  if (out.phase <= -kPi) out.phase += kTwoPi;
  return out;
}

NewtonResult newton_zero(const std::function<Complex(Complex)>& f, Complex z0,
                         double tol, int max_iter) {
  Complex z = z0;
  NewtonResult res;
  for (int it = 0; it < max_iter; ++it) {
    const Complex fz = f(z);
    const double h = 1e-6 * std::max(1.0, std::abs(z));
    const Complex df = (f(z + h) - fz) / h;
    const double fscale = std::max(std::abs(fz), 1e-300);
    if (std::abs(df) < 1e-14 * fscale / std::max(1.0, std::abs(z)))
      throw NumericalError("newton_zero: derivative underflow");
    const Complex step = fz / df;
    z -= step;
    res.z = z;
    res.iterations = it + 1;
    res.step = std::abs(step);
    if (res.step <= tol * std::max(1.0, std::abs(z))) {
      res.residual = std::abs(f(z));
      return res;
    }
  }
  throw NumericalError("newton_zero: no convergence after max_iter");
}

Complex LaurentFit::coeff_of(int power) const {
  for (size_t i = 0; i < powers.size(); ++i)
    if (powers[i] == power) return coefficients[static_cast<int>(i)];
  return Complex(0.0, 0.0);
}

LaurentFit fit_laurent(const std::vector<std::pair<Complex, Complex>>& samples,
                       std::vector<int> powers) {
  const int m = static_cast<int>(samples.size());
  const int n = static_cast<int>(powers.size());
  if (m < 2 * n)
    throw NumericalError("fit_laurent: need at least 2x more samples than coefficients");
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      if (samples[i].first == samples[j].first)
        throw NumericalError("fit_laurent: sample abscissae must be distinct");
  MatrixXcd V(m, n);
  VectorXcd y(m);
  for (int i = 0; i < m; ++i) {
    y[i] = samples[i].second;
    for (int j = 0; j < n; ++j)
      V(i, j) = std::pow(samples[i].first, powers[j]);
  }
  Eigen::ColPivHouseholderQR<MatrixXcd> qr(V);
  if (qr.rank() < n) throw NumericalError("fit_laurent: rank-deficient design");
  LaurentFit fit;
  fit.powers = std::move(powers);
  fit.coefficients = qr.solve(y);
  fit.max_residual = (V * fit.coefficients - y).cwiseAbs().maxCoeff();
  return fit;
}

}  // namespace bloch
