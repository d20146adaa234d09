#pragma once

#include <vector>

#include "bloch/forms.hpp"
#include "bloch/numerics.hpp"

namespace bloch {

// Data of the operator family L(kappa) = (-i grad + A0 + sum_m kappa_m
// omega_m)^2 + U on the flat torus.  A0 components and form exact parts are
// optional; forms default to the dual basis.
struct SchrodingerProblem {
  TorusLattice lattice;
  PeriodicScalarField potential;
  std::vector<PeriodicScalarField> base_potential;  // per-axis, may be empty
  std::vector<HarmonicOneForm> forms;

  static SchrodingerProblem standard(const TorusLattice& lat,
                                     PeriodicScalarField potential);
};

// Fourier-Galerkin matrix of L(kappa) in the plane-wave basis exp(i<xi_n, x>).
// The flux enters reduced to Re(kappa) in [-pi, pi); the diagonal is the exact
// bilinear square (xi_n + a_const).(xi_n + a_const), off-diagonal entries are
// convolution coefficients of the potential and the non-constant form parts.
class BlochSchrodingerOperator {
 public:
  const MatrixXcd& matrix() const { return matrix_; }
  const TorusLattice& lattice() const { return lattice_; }
  const FluxVector& flux() const { return flux_; }
  const FluxVector& reduced_flux() const { return reduced_; }

  double hermiticity_defect() const;  // ||M - M*|| / ||M||
  HermitianSpectrum spectrum(bool want_vectors = false) const;

 private:
  friend BlochSchrodingerOperator assemble_schrodinger(
      const SchrodingerProblem&, const FluxVector&);
  TorusLattice lattice_;
  FluxVector flux_;
  FluxVector reduced_;
  MatrixXcd matrix_;
};

BlochSchrodingerOperator assemble_schrodinger(const SchrodingerProblem& prob,
                                              const FluxVector& kappa);

// Independent assembly of the Bloch-substituted -Delta + U with dual-basis
// forms: kinetic diagonal plus the raw coefficient convolution of U.  Kept as
// a second code path for the flux-vs-quasimomentum equivalence check.
MatrixXcd assemble_bloch_direct(const TorusLattice& lat,
                                const PeriodicScalarField& potential,
                                const FluxVector& kappa);

// Frobenius norm of the difference between the magnetic assembly with constant
// vector potential A_l = kappa_l at zero flux and the direct Bloch assembly at
// quasimomenta kappa.  Expects Re(kappa) in the fundamental cell.
double two_route_assembly_check(const TorusLattice& lat,
                                const PeriodicScalarField& potential,
                                const FluxVector& kappa);

struct DispersionRow {
  FluxVector kappa;
  int band = 0;
  double energy = 0.0;
};

// Lowest `bands` eigenvalues over a real flux grid, ascending per point.
std::vector<DispersionRow> dispersion_sweep(const SchrodingerProblem& prob,
                                            const std::vector<FluxVector>& grid,
                                            int bands, int threads = 1);

// Max deviation of the lowest `levels` eigenvalues when the first form gains
// the exact part d(phi).
double gauge_check(const SchrodingerProblem& prob, const FluxVector& kappa,
                   const PeriodicScalarField& phi, int levels = 10);

// Relative determinant det(L(kappa) - E) / det(-Delta + epsilon) with
// epsilon = 1; the reference is the free kinetic diagonal at zero flux.
inline constexpr double kDeterminantEpsilon = 1.0;
LogDet schrodinger_reldet(const BlochSchrodingerOperator& op, Complex energy);

struct VarietySliceSample {
  double energy = 0.0;
  LogDet det;
};

struct VarietySlice {
  FluxVector kappa;
  std::vector<VarietySliceSample> samples;
  std::vector<double> zeros;  // refined zeros in E (real part), ascending
};

// Scans the relative determinant over [e_lo, e_hi], brackets crossings (sign
// changes and deep local minima of the log-magnitude), refines with Newton.
VarietySlice bloch_variety_slice(const SchrodingerProblem& prob,
                                 const FluxVector& kappa, double e_lo,
                                 double e_hi, int samples);

}  // namespace bloch
