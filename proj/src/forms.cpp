#include "bloch/forms.hpp"

#include <cmath>

namespace bloch {

std::vector<HarmonicOneForm> standard_forms(const TorusLattice& lat) {
  std::vector<HarmonicOneForm> forms(lat.dim());
  for (int m = 0; m < lat.dim(); ++m) forms[m].coeff = lat.dual(m);
  return forms;
}

Complex form_period(const TorusLattice& lat, const HarmonicOneForm& form,
                    int generator) {
  if (generator < 0 || generator >= lat.dim())
    throw ConfigError("form_period: bad generator");
  const Complex e = generator == 0 ? lat.e1() : lat.e2();
  const Eigen::Vector2d dir(e.real(), e.imag());
  // Trapezoid over one full period of a smooth periodic integrand: the
  // constant part integrates exactly, the exact part spectrally.
  const int G = lat.grid_size();
  Complex acc(0.0, 0.0);
  for (int j = 0; j < G; ++j) {
    Complex val = Complex(form.coeff.dot(dir), 0.0);
    if (form.exact) {
      const auto& phi = *form.exact;
      // gradient of phi contracted with the direction, at the path point
      // x = (j/G) * e_gen, i.e. lattice coordinates (j/G, 0) or (0, j/G).
      const int p = generator == 0 ? j : 0;
      const int q = generator == 0 ? 0 : j;
      const int gi = lat.grid_index(p, q);
      const Complex dx = phi.derivative(0).samples()[gi];
      const Complex dy = lat.dim() == 2 ? phi.derivative(1).samples()[gi]
                                        : Complex(0.0, 0.0);
      val += dx * dir[0] + dy * dir[1];
    }
    acc += val;
  }
  return acc / static_cast<double>(G);
}

bool FluxVector::physical() const {
  for (int m = 0; m < dim_; ++m)
    if (v_[m].imag() != 0.0) return false;
  return true;
}

FluxVector FluxVector::shifted(int generator, double amount) const {
  FluxVector out = *this;
  out.v_[generator] += amount;
  return out;
}

ReducedFlux reduce_flux(const FluxVector& kappa) {
  ReducedFlux out;
  out.reduced = kappa;
  for (int m = 0; m < kappa.dim(); ++m) {
    const int shift =
        static_cast<int>(std::floor((kappa[m].real() + kPi) / kTwoPi));
    out.shifts[m] = shift;
    out.reduced[m] = kappa[m] - kTwoPi * shift;
  }
  return out;
}

MultiplierMap MultiplierMap::from_flux(const FluxVector& kappa) {
  MultiplierMap m;
  m.dim_ = kappa.dim();
  for (int j = 0; j < kappa.dim(); ++j)
    m.mu_[j] = std::exp(Complex(0.0, 1.0) * kappa[j]);
  return m;
}

Complex BlochLift::at(int p, int q) const {
  const int G = lattice.grid_size();
  if (lattice.dim() == 1) return samples[p];
  return samples[p * copies2 * G + q];
}

BlochLift lift_bloch(const TorusLattice& lat, const FluxVector& kappa,
                     const PeriodicScalarField& phi, int copies1,
                     int copies2) {
  if (kappa.dim() != lat.dim()) throw ConfigError("lift_bloch: flux dim mismatch");
  if (phi.lattice() != lat) throw ConfigError("lift_bloch: lattice mismatch");
  if (copies1 < 2 || (lat.dim() == 2 && copies2 < 2))
    throw ConfigError("lift_bloch: need at least 2 copies per direction");
  const int G = lat.grid_size();
  BlochLift lift;
  lift.lattice = lat;
  lift.flux = kappa;
  lift.copies1 = copies1;
  lift.copies2 = lat.dim() == 2 ? copies2 : 1;
  const Complex I(0.0, 1.0);
  if (lat.dim() == 1) {
    lift.samples.resize(copies1 * G);
    for (int p = 0; p < copies1 * G; ++p) {
      const double s = static_cast<double>(p) / G;
      lift.samples[p] = std::exp(I * kappa[0] * s) * phi.samples()[p % G];
    }
  } else {
    lift.samples.resize(copies1 * G * copies2 * G);
    for (int p = 0; p < copies1 * G; ++p) {
      const double s = static_cast<double>(p) / G;
      for (int q = 0; q < copies2 * G; ++q) {
        const double t = static_cast<double>(q) / G;
        lift.samples[p * copies2 * G + q] =
            std::exp(I * (kappa[0] * s + kappa[1] * t)) *
            phi.samples()[lat.grid_index(p % G, q % G)];
      }
    }
  }
  return lift;
}

double floquet_defect(const BlochLift& lift) {
  const TorusLattice& lat = lift.lattice;
  const int G = lat.grid_size();
  const Complex mu1 = std::exp(Complex(0.0, 1.0) * lift.flux[0]);
  double defect = 0.0;
  if (lat.dim() == 1) {
    for (int p = 0; p + G < lift.copies1 * G; ++p)
      defect = std::max(defect,
                        std::abs(lift.at(p + G) - mu1 * lift.at(p)));
    return defect;
  }
  const Complex mu2 = std::exp(Complex(0.0, 1.0) * lift.flux[1]);
  for (int p = 0; p < lift.copies1 * G; ++p)
    for (int q = 0; q < lift.copies2 * G; ++q) {
      if (p + G < lift.copies1 * G)
        defect = std::max(
            defect, std::abs(lift.at(p + G, q) - mu1 * lift.at(p, q)));
      if (q + G < lift.copies2 * G)
        defect = std::max(
            defect, std::abs(lift.at(p, q + G) - mu2 * lift.at(p, q)));
    }
  return defect;
}

}  // namespace bloch
