#pragma once

#include <optional>
#include <vector>

#include "bloch/field.hpp"

namespace bloch {

// Closed 1-form omega_m = <A_m, dx> + d(phi_m): a constant (harmonic) part plus
// an optional exact part carried explicitly so gauge changes are a testable
// toggle.  With A_m the dual basis vector, the periods over the generators are
// exactly delta_mj; the exact part contributes none.
struct HarmonicOneForm {
  Eigen::Vector2d coeff = Eigen::Vector2d::Zero();
  std::optional<PeriodicScalarField> exact;
};

// Dual-basis forms (no exact parts), one per generator.
std::vector<HarmonicOneForm> standard_forms(const TorusLattice& lat);

// Discrete line integral of the form along generator path s -> s*e_{gen}.
Complex form_period(const TorusLattice& lat, const HarmonicOneForm& form,
                    int generator);

// Quasimomenta (kappa_1, ..., kappa_dim), complex in general.
class FluxVector {
 public:
  FluxVector() = default;
  static FluxVector of(Complex k1) { return FluxVector(1, k1, 0.0); }
  static FluxVector of(Complex k1, Complex k2) { return FluxVector(2, k1, k2); }

  int dim() const { return dim_; }
  Complex operator[](int m) const { return v_[m]; }
  Complex& operator[](int m) { return v_[m]; }

  bool physical() const;  // all components real
  FluxVector shifted(int generator, double amount) const;

 private:
  FluxVector(int dim, Complex k1, Complex k2) : dim_(dim), v_{k1, k2} {}
  int dim_ = 1;
  std::array<Complex, 2> v_{Complex(0, 0), Complex(0, 0)};
};

// Reduction of Re(kappa_m) to the fundamental cell [-pi, pi); shifts are the
// dropped integer multiples of 2*pi.  Assemblies factor through this quotient,
// which is what makes spectra functions of the multiplier map alone.
struct ReducedFlux {
  FluxVector reduced;
  std::array<int, 2> shifts{0, 0};
};
ReducedFlux reduce_flux(const FluxVector& kappa);

// Multipliers mu_m = exp(i kappa_m) of the deck transformations.
class MultiplierMap {
 public:
  static MultiplierMap from_flux(const FluxVector& kappa);
  int dim() const { return dim_; }
  Complex operator[](int m) const { return mu_[m]; }

 private:
  int dim_ = 1;
  std::array<Complex, 2> mu_{Complex(1, 0), Complex(1, 0)};
};

// Bloch function psi = exp(i sum kappa_m h_m) phi sampled over copies_1 x
// copies_2 fundamental domains (h_m are the linear coordinate lifts with unit
// periods).  Grid index (p,q) covers s in [0, copies_1), t in [0, copies_2).
struct BlochLift {
  TorusLattice lattice;
  FluxVector flux;
  int copies1 = 1;
  int copies2 = 1;
  VectorXcd samples;  // flattened (p * copies2*G + q)

  Complex at(int p, int q = 0) const;
};

BlochLift lift_bloch(const TorusLattice& lat, const FluxVector& kappa,
                     const PeriodicScalarField& phi, int copies1,
                     int copies2 = 1);

// Max violation of psi(T_k x) = exp(i kappa_k) psi(x) over inner copies.
double floquet_defect(const BlochLift& lift);

}  // namespace bloch
