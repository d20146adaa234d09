#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bloch/dirac.hpp"

namespace bloch {

// Bloch spinor (psi1, psi2) with real +-1 multipliers, stored as the Fourier
// coefficients of the periodic parts together with the flux kappa in pi*Z^2.
// The bilinear densities psi1^2, conj(psi2)^2, psi1*conj(psi2) are then
// strictly doubly periodic and alias-free on the quadrature grid.
class SpinorField {
 public:
  static SpinorField from_kernel(const TorusLattice& lat,
                                 const FluxVector& kappa,
                                 const VectorXcd& kernel);
  static SpinorField from_components(const TorusLattice& lat,
                                     const FluxVector& kappa, VectorXcd phi1,
                                     VectorXcd phi2);

  const TorusLattice& lattice() const { return lat_; }
  const FluxVector& flux() const { return kappa_; }
  MultiplierMap multiplier_map() const { return MultiplierMap::from_flux(kappa_); }
  std::array<int, 2> nu() const { return nu_; }  // multiplier homomorphism

  const VectorXcd& phi1() const { return phi1_; }
  const VectorXcd& phi2() const { return phi2_; }

  // Full Bloch spinors sampled on a grid of the given size (a power of two at
  // least as fine as the lattice grid); grid layout row p, column q.
  MatrixXcd psi1_grid(int G) const;
  MatrixXcd psi2_grid(int G) const;

  // Max periodicity violation of the bilinear densities across a 2x2 lift.
  double density_periodicity_defect() const;

  // Quaternionic rotation alpha*psi + beta*J psi, J(psi1,psi2) =
  // (-conj(psi2), conj(psi1)); preserves the multiplier map.
  SpinorField rotated(Complex alpha, Complex beta) const;

 private:
  SpinorField(TorusLattice lat, FluxVector kappa, VectorXcd phi1,
              VectorXcd phi2);

  TorusLattice lat_;
  FluxVector kappa_;
  std::array<int, 2> nu_{0, 0};
  VectorXcd phi1_, phi2_;
};

// Max grid residual of the Dirac equation: U psi1 + del psi2 and
// -delbar psi1 + conj(U) psi2, spectral differentiation.
double dirac_residual(const PeriodicScalarField& U, const SpinorField& psi);

// Max over cells and matrix entries of |delbar f - del g| for the surface
// integrand f dz + g dzbar; vanishes exactly when psi is a Dirac zero mode.
double closedness_residual(const SpinorField& psi);

struct ImmersionMesh {
  TorusLattice lattice;
  int grid = 0;                      // base grid G; vertices are (G+1)^2
  std::vector<Eigen::Vector3d> vertices;  // index p*(G+1)+q, closure included
  Eigen::Vector3d period1 = Eigen::Vector3d::Zero();
  Eigen::Vector3d period2 = Eigen::Vector3d::Zero();
  double period_spread = 0.0;        // path-independence defect of the periods
  Eigen::MatrixXd e2alpha;           // conformal factor (|psi1|^2+|psi2|^2)^2
  Eigen::MatrixXd mean_curvature;    // H = 2 U exp(-alpha); NaN where degenerate
  std::vector<uint8_t> degenerate;   // e^alpha below threshold
  Complex mu1{1.0, 0.0}, mu2{1.0, 0.0};

  const Eigen::Vector3d& at(int p, int q) const {
    return vertices[static_cast<size_t>(p) * (grid + 1) + q];
  }
};

struct IntegrationOptions {
  int base_p = 0, base_q = 0;
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  double closedness_threshold = 1e-6;
  bool column_first = false;  // verification route; default integrates rows first
  double degenerate_threshold = 1e-10;
};

// Accumulated spectral line integrals of the Hermitian-matrix integrand; the
// integrals are exact for the band-limited densities, so the two integration
// orders differ only by the closedness defect.
ImmersionMesh integrate_immersion(const PeriodicScalarField& U,
                                  const SpinorField& psi,
                                  const IntegrationOptions& opts = {});

struct WillmoreValues {
  double direct = 0.0;     // 4 * int U^2
  double geometric = 0.0;  // int H^2 e^{2 alpha}, from the mesh when given
};

WillmoreValues willmore(const PeriodicScalarField& U,
                        const ImmersionMesh* mesh = nullptr);

// R^3 <-> anti-Hermitian matrix coding used by the integrand, and the SO(3)
// rotation induced by the SU(2) element [[conj(a), conj(b)], [-b, a]] acting
// on spinors; exposed for the equivariance checks.
Eigen::Matrix2cd encode_r3(const Eigen::Vector3d& x);
Eigen::Vector3d decode_r3(const Eigen::Matrix2cd& m);
Eigen::Matrix3d rotation_from_su2(Complex alpha, Complex beta);

void write_obj(const ImmersionMesh& mesh, std::ostream& out);

}  // namespace bloch
