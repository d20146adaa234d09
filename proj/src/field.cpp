#include "bloch/field.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>

namespace bloch {

namespace {

// Forward DFT (sum with e^{-2 pi i n g / G}) along each axis, unnormalized.
VectorXcd dft_forward_raw(const TorusLattice& lat, const VectorXcd& in) {
  const int G = lat.grid_size();
  Eigen::FFT<double> fft;
  if (lat.dim() == 1) {
    VectorXcd out(G);
    fft.fwd(out, in);
    return out;
  }
  VectorXcd work = in;
  VectorXcd line(G), tline(G);
  // rows: fixed p, q varies (contiguous)
  for (int p = 0; p < G; ++p) {
    line = work.segment(p * G, G);
    fft.fwd(tline, line);
    work.segment(p * G, G) = tline;
  }
  // columns: fixed q, p varies
  for (int q = 0; q < G; ++q) {
    for (int p = 0; p < G; ++p) line[p] = work[p * G + q];
    fft.fwd(tline, line);
    for (int p = 0; p < G; ++p) work[p * G + q] = tline[p];
  }
  return work;
}

}  // namespace

VectorXcd grid_to_bins(const TorusLattice& lat, const VectorXcd& samples) {
  if (samples.size() != lat.grid_count())
    throw ConfigError("wrong sample count for lattice grid");
  return dft_forward_raw(lat, samples) / static_cast<double>(lat.grid_count());
}

VectorXcd bins_to_grid(const TorusLattice& lat, const VectorXcd& bins) {
  if (bins.size() != lat.grid_count())
    throw ConfigError("wrong bin count for lattice grid");
  // Inverse sum via conjugation of the forward transform, no scaling.
  return dft_forward_raw(lat, bins.conjugate()).conjugate();
}

namespace {

int wrap_bin(int n, int G) {
  int b = n % G;
  return b < 0 ? b + G : b;
}

VectorXcd coeffs_from_bins(const TorusLattice& lat, const VectorXcd& bins) {
  const int G = lat.grid_size();
  VectorXcd c(lat.mode_count());
  for (int i = 0; i < lat.mode_count(); ++i) {
    const auto n = lat.mode_of(i);
    const int b = lat.dim() == 1
                      ? wrap_bin(n[0], G)
                      : wrap_bin(n[0], G) * G + wrap_bin(n[1], G);
    c[i] = bins[b];
  }
  return c;
}

VectorXcd bins_from_coeffs(const TorusLattice& lat, const VectorXcd& coeffs) {
  const int G = lat.grid_size();
  VectorXcd bins = VectorXcd::Zero(lat.grid_count());
  for (int i = 0; i < lat.mode_count(); ++i) {
    const auto n = lat.mode_of(i);
    const int b = lat.dim() == 1
                      ? wrap_bin(n[0], G)
                      : wrap_bin(n[0], G) * G + wrap_bin(n[1], G);
    bins[b] = coeffs[i];
  }
  return bins;
}

bool detect_real(const VectorXcd& samples) {
  double scale = samples.cwiseAbs().maxCoeff();
  if (scale == 0.0) return true;
  double im = 0.0;
  for (int i = 0; i < samples.size(); ++i)
    im = std::max(im, std::abs(samples[i].imag()));
  return im <= 1e-13 * std::max(1.0, scale);
}

}  // namespace

PeriodicScalarField::PeriodicScalarField(TorusLattice lat, VectorXcd coeffs,
                                         VectorXcd samples)
    : lat_(std::move(lat)),
      coeffs_(std::move(coeffs)),
      samples_(std::move(samples)) {
  real_flag_ = detect_real(samples_);
}

PeriodicScalarField PeriodicScalarField::zero(const TorusLattice& lat) {
  return {lat, VectorXcd::Zero(lat.mode_count()),
          VectorXcd::Zero(lat.grid_count())};
}

PeriodicScalarField PeriodicScalarField::constant(const TorusLattice& lat,
                                                  Complex c) {
  VectorXcd coeffs = VectorXcd::Zero(lat.mode_count());
  coeffs[lat.mode_index(0, 0)] = c;
  return {lat, std::move(coeffs),
          VectorXcd::Constant(lat.grid_count(), c)};
}

PeriodicScalarField PeriodicScalarField::cosine(const TorusLattice& lat,
                                                int axis, double amplitude,
                                                int harmonic) {
  if (axis < 0 || axis >= lat.dim()) throw ConfigError("cosine: bad axis");
  if (harmonic < 1 || harmonic > lat.nmax())
    throw ConfigError("cosine: harmonic outside mode set");
  VectorXcd coeffs = VectorXcd::Zero(lat.mode_count());
  const int n1 = axis == 0 ? harmonic : 0;
  const int n2 = axis == 0 ? 0 : harmonic;
  coeffs[lat.mode_index(n1, n2)] = 0.5 * amplitude;
  coeffs[lat.mode_index(-n1, -n2)] = 0.5 * amplitude;
  return from_coeffs(lat, coeffs);
}

PeriodicScalarField PeriodicScalarField::from_samples(const TorusLattice& lat,
                                                      const VectorXcd& samples) {
  if (samples.size() != lat.grid_count())
    throw ConfigError("wrong sample count for lattice grid");
  return {lat, coeffs_from_bins(lat, grid_to_bins(lat, samples)), samples};
}

PeriodicScalarField PeriodicScalarField::from_coeffs(const TorusLattice& lat,
                                                     const VectorXcd& coeffs) {
  if (coeffs.size() != lat.mode_count())
    throw ConfigError("wrong coefficient count for lattice mode set");
  return {lat, coeffs, bins_to_grid(lat, bins_from_coeffs(lat, coeffs))};
}

Complex PeriodicScalarField::coeff(int n1, int n2) const {
  if (!lat_.mode_in_range(n1, n2)) return Complex(0.0, 0.0);
  return coeffs_[lat_.mode_index(n1, n2)];
}

double PeriodicScalarField::reality_defect() const {
  double d = 0.0;
  for (int i = 0; i < lat_.mode_count(); ++i) {
    const auto n = lat_.mode_of(i);
    const Complex a = coeffs_[i];
    const Complex b = coeffs_[lat_.mode_index(-n[0], -n[1])];
    d = std::max(d, std::abs(a - std::conj(b)));
  }
  return d;
}

double PeriodicScalarField::fourier_consistency() const {
  const VectorXcd again = coeffs_from_bins(lat_, grid_to_bins(lat_, samples_));
  const double scale = std::max(1e-300, coeffs_.cwiseAbs().maxCoeff());
  return (again - coeffs_).cwiseAbs().maxCoeff() / scale;
}

double PeriodicScalarField::band_limit_defect() const {
  const VectorXcd synth =
      bins_to_grid(lat_, bins_from_coeffs(lat_, coeffs_));
  return (synth - samples_).cwiseAbs().maxCoeff();
}

PeriodicScalarField PeriodicScalarField::derivative(int axis) const {
  if (axis < 0 || axis > 1) throw ConfigError("derivative: bad axis");
  VectorXcd c(lat_.mode_count());
  for (int i = 0; i < lat_.mode_count(); ++i) {
    const Eigen::Vector2d xi = lat_.wavevector(i);
    c[i] = Complex(0.0, xi[axis]) * coeffs_[i];
  }
  return from_coeffs(lat_, c);
}

double PeriodicScalarField::max_abs() const {
  return samples_.cwiseAbs().maxCoeff();
}

PeriodicScalarField operator+(const PeriodicScalarField& a,
                              const PeriodicScalarField& b) {
  if (a.lattice() != b.lattice())
    throw ConfigError("field addition: lattice mismatch");
  return PeriodicScalarField::from_coeffs(a.lattice(), a.coeffs() + b.coeffs());
}

PeriodicScalarField operator-(const PeriodicScalarField& a,
                              const PeriodicScalarField& b) {
  if (a.lattice() != b.lattice())
    throw ConfigError("field subtraction: lattice mismatch");
  return PeriodicScalarField::from_coeffs(a.lattice(), a.coeffs() - b.coeffs());
}

PeriodicScalarField operator*(Complex c, const PeriodicScalarField& f) {
  return PeriodicScalarField::from_coeffs(f.lattice(), c * f.coeffs());
}

VectorXcd difference_coefficients(const TorusLattice& lat,
                                  const VectorXcd& samples, int kmax) {
  const int G = lat.grid_size();
  if (2 * kmax >= G)
    throw ConfigError("difference_coefficients: kmax too large for grid");
  const VectorXcd bins = grid_to_bins(lat, samples);
  const int m = 2 * kmax + 1;
  VectorXcd out(lat.dim() == 1 ? m : m * m);
  if (lat.dim() == 1) {
    for (int k = -kmax; k <= kmax; ++k) out[k + kmax] = bins[wrap_bin(k, G)];
  } else {
    for (int k1 = -kmax; k1 <= kmax; ++k1)
      for (int k2 = -kmax; k2 <= kmax; ++k2)
        out[(k1 + kmax) * m + (k2 + kmax)] =
            bins[wrap_bin(k1, G) * G + wrap_bin(k2, G)];
  }
  return out;
}

Complex quadrature(const TorusLattice& lat, const VectorXcd& samples) {
  if (samples.size() != lat.grid_count())
    throw ConfigError("wrong sample count for lattice grid");
  return samples.mean() * lat.area();
}

double integral_abs2(const PeriodicScalarField& f) {
  const VectorXcd& s = f.samples();
  double acc = 0.0;
  for (int i = 0; i < s.size(); ++i) acc += std::norm(s[i]);
  return acc / s.size() * f.lattice().area();
}

Complex integral_square(const PeriodicScalarField& f) {
  const VectorXcd& s = f.samples();
  Complex acc(0.0, 0.0);
  for (int i = 0; i < s.size(); ++i) acc += s[i] * s[i];
  return acc / static_cast<double>(s.size()) * f.lattice().area();
}

}  // namespace bloch
