#pragma once

// Test-only reference implementations, independent of the library code paths
// they validate.

#include <Eigen/Dense>
#include <algorithm>
#include <complex>
#include <vector>

namespace oracles {

using Complex = std::complex<double>;

// Hermitian eigenvalues via real cyclic Jacobi on the doubled real-symmetric
// embedding [[Re A, -Im A], [Im A, Re A]]; every eigenvalue of A appears twice.
inline Eigen::VectorXd jacobi_eigenvalues(const Eigen::MatrixXcd& A) {
  const int n = static_cast<int>(A.rows());
  Eigen::MatrixXd S(2 * n, 2 * n);
  S.topLeftCorner(n, n) = A.real();
  S.topRightCorner(n, n) = -A.imag();
  S.bottomLeftCorner(n, n) = A.imag();
  S.bottomRightCorner(n, n) = A.real();
  S = 0.5 * (S + S.transpose().eval());

  const int m = 2 * n;
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < m; ++p)
      for (int q = p + 1; q < m; ++q) off += S(p, q) * S(p, q);
    if (off < 1e-26 * std::max(1.0, S.squaredNorm())) break;
    for (int p = 0; p < m; ++p)
      for (int q = p + 1; q < m; ++q) {
        const double apq = S(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double tau = (S(q, q) - S(p, p)) / (2.0 * apq);
        const double t = (tau >= 0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (int k = 0; k < m; ++k) {
          const double skp = S(k, p), skq = S(k, q);
          S(k, p) = c * skp - s * skq;
          S(k, q) = s * skp + c * skq;
        }
        for (int k = 0; k < m; ++k) {
          const double spk = S(p, k), sqk = S(q, k);
          S(p, k) = c * spk - s * sqk;
          S(q, k) = s * spk + c * sqk;
        }
      }
  }
  std::vector<double> diag(m);
  for (int i = 0; i < m; ++i) diag[i] = S(i, i);
  std::sort(diag.begin(), diag.end());
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) out[i] = 0.5 * (diag[2 * i] + diag[2 * i + 1]);
  return out;
}

// Determinant by Laplace expansion along the first row (n <= 8 or so).
inline Complex cofactor_det(const Eigen::MatrixXcd& A) {
  const int n = static_cast<int>(A.rows());
  if (n == 1) return A(0, 0);
  Complex acc(0.0, 0.0);
  for (int j = 0; j < n; ++j) {
    Eigen::MatrixXcd minor(n - 1, n - 1);
    for (int r = 1; r < n; ++r) {
      int cc = 0;
      for (int c = 0; c < n; ++c) {
        if (c == j) continue;
        minor(r - 1, cc++) = A(r, c);
      }
    }
    const Complex term = A(0, j) * cofactor_det(minor);
    acc += (j % 2 == 0) ? term : -term;
  }
  return acc;
}

}  // namespace oracles
