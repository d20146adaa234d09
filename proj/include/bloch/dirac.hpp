#pragma once

#include <string>
#include <vector>

#include "bloch/forms.hpp"
#include "bloch/numerics.hpp"

namespace bloch {

// Conventions (see docs/conventions.md, version 1):
//   chart z = x + iy,  del = (d_x - i d_y)/2,  delbar = (d_x + i d_y)/2;
//   Bloch spinor psi = exp(2 pi i (k1 x + k2 y)) phi with k in C^2;
//   per-generator quasimomenta kappa_j = 2 pi (k1 Re e_j + k2 Im e_j);
//   mode wavevector w(n,k) = xi_n + 2 pi k.
// On a plane wave exp(i(w_x x + w_y y)):
inline Complex symbol_del(const Eigen::Vector2cd& w) {
  return 0.5 * (Complex(0, 1) * w[0] + w[1]);
}
inline Complex symbol_delbar(const Eigen::Vector2cd& w) {
  return 0.5 * (Complex(0, 1) * w[0] - w[1]);
}

FluxVector flux_of_wavevector(const TorusLattice& lat,
                              const Eigen::Vector2cd& k);

class BlochDiracOperator;

namespace detail {
BlochDiracOperator assemble_dirac_frame(const TorusLattice& lat,
                                        const PeriodicScalarField& potential,
                                        const FluxVector& kappa,
                                        const FluxVector& effective,
                                        Complex energy);
}

// Galerkin matrix of the operator [[U - E, del], [-delbar, conj(U) - E]] on
// Bloch spinors, 2|modes| x 2|modes|, interleaved components (row 2m: first
// equation at mode m).  U acts by convolution through its raw coefficients;
// the symbols are exact, so constant potentials give a block-diagonal matrix.
class BlochDiracOperator {
 public:
  const MatrixXcd& matrix() const { return matrix_; }
  const TorusLattice& lattice() const { return lattice_; }
  const FluxVector& flux() const { return flux_; }
  const FluxVector& reduced_flux() const { return reduced_; }
  Complex energy() const { return energy_; }

  double hermiticity_defect() const;

 private:
  friend BlochDiracOperator detail::assemble_dirac_frame(
      const TorusLattice&, const PeriodicScalarField&, const FluxVector&,
      const FluxVector&, Complex);
  TorusLattice lattice_;
  FluxVector flux_;
  FluxVector reduced_;
  Complex energy_{0.0, 0.0};
  MatrixXcd matrix_;
};

BlochDiracOperator assemble_dirac(const TorusLattice& lat,
                                  const PeriodicScalarField& potential,
                                  const FluxVector& kappa, Complex energy);

// Assembly on the covering sheet: the flux is used as given, keeping the mode
// window centered on the n = 0 resonance.  This is the frame for analytic
// continuation along the asymptotic ends, where Re(kappa) grows without bound
// and the reduced window would slide off the resonant mode.
BlochDiracOperator assemble_dirac_cover(const TorusLattice& lat,
                                        const PeriodicScalarField& potential,
                                        const FluxVector& kappa, Complex energy);

// log det relative to the free operator (U = 0) at the same (kappa, E); the
// free determinant is the product of the per-mode factors E^2 + del*delbar.
// Throws NumericalError when the reference is singular.  The default evaluates
// in the reduced (quotient) frame; the cover variant continues analytically.
LogDet dirac_reldet(const TorusLattice& lat,
                    const PeriodicScalarField& potential,
                    const FluxVector& kappa, Complex energy);
LogDet dirac_reldet_cover(const TorusLattice& lat,
                          const PeriodicScalarField& potential,
                          const FluxVector& kappa, Complex energy);

struct SpectralCurvePoint {
  Eigen::Vector2cd k;
  double det_residual = 0.0;     // |relative determinant| at k
  VectorXcd kernel;              // unit-norm coefficient vector, 2|modes|
  double kernel_residual = 0.0;  // ||M v|| / ||M||_F
  MultiplierMap mu;
  int branch = +1;               // +1: k2 ~ +i k1, -1: k2 ~ -i k1
  Complex lambda;                // local parameter at the asymptotic end
};

struct TraceOptions {
  double newton_tol = 1e-12;
  int newton_max_iter = 60;
  int max_halvings = 6;
  double residual_tol = 1e-8;
  double guard_growth = 1.5;
  bool want_kernels = true;
};

struct CurveTrace {
  std::vector<SpectralCurvePoint> points;
  bool truncated = false;
  std::string truncation_reason;
};

// Continuation along one asymptotic branch of the zero-energy spectral curve:
// k1 real sweeps so that |lambda| covers [lambda_min, lambda_max] in `steps`
// samples; k2 is solved by Newton on the relative determinant, seeded by the
// free curve dressed with the mean of U^2 and continued point to point.  The
// k1 step is halved on failure (up to max_halvings), then the trace truncates.
CurveTrace trace_curve(const TorusLattice& lat,
                       const PeriodicScalarField& potential, int branch,
                       double lambda_min, double lambda_max, int steps,
                       const TraceOptions& opts = {});

// Default Newton-basin edge 8 (1 + ||U||_inf).
double default_lambda_min(const PeriodicScalarField& potential);

MultiplierMap multipliers(const TorusLattice& lat,
                          const SpectralCurvePoint& point);

struct C0Fit {
  Complex c0;               // coefficient of conj(v)/lambda in log mu(v)
  Complex leading;          // coefficient of lambda (should approximate v)
  double max_residual = 0.0;
};

// Fits the unwrapped log-multiplier lambda -> 2 pi i <k, v> of the lattice
// vector v to leading * lambda + c * lambda^{-1} and converts c to the
// normalized coefficient C0 (which the curve relates to -(1/Area) int U^2).
C0Fit fit_c0(const std::vector<SpectralCurvePoint>& trace, Complex v);

// Z2-quadratic forms on H_1(M; Z_2); values indexed by w = a e1 + b e2.
struct QuadraticFormZ2 {
  std::array<int, 4> values{0, 0, 0, 0};  // index a + 2b

  int operator()(int a, int b) const { return values[(a & 1) + 2 * (b & 1)]; }
  // q(w1+w2) = q(w1) + q(w2) + w1.w2 mod 2, with e1.e2 = 1, ei.ei = 0.
  bool quadratic() const;
};

// q = q0 + nu with q0 = (0; 1, 1, 1) and nu the multiplier homomorphism.
QuadraticFormZ2 spinor_form(int nu1, int nu2);

// Hermitian zero-mode data at real multipliers: for real U and kappa in
// {0, pi}^2 the Dirac matrix is Hermitian; the eigenvector of smallest |E| is
// an exact kernel vector of the operator with potential U - E.
struct RealMultiplierKernel {
  VectorXcd coeffs;      // 2|modes|, unit norm
  double energy = 0.0;   // the subtracted shift
  double kernel_residual = 0.0;
};

RealMultiplierKernel kernel_at_real_multipliers(const TorusLattice& lat,
                                                const PeriodicScalarField& U,
                                                const FluxVector& kappa);

}  // namespace bloch
