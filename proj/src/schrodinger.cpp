#include "bloch/schrodinger.hpp"
#include <limits>

#include <algorithm>
#include <cmath>

#include "bloch/parallel.hpp"

namespace bloch {

namespace {

using Eigen::Vector2cd;

int diff_index(const TorusLattice& lat, int k1, int k2) {
  const int kmax = 2 * lat.nmax();
  const int m = 2 * kmax + 1;
  return lat.dim() == 1 ? k1 + kmax : (k1 + kmax) * m + (k2 + kmax);
}

void check_problem(const SchrodingerProblem& prob) {
  const auto& lat = prob.lattice;
  if (prob.potential.lattice() != lat)
    throw ConfigError("assemble: potential lattice mismatch");
  if (!prob.base_potential.empty() &&
      static_cast<int>(prob.base_potential.size()) != lat.dim())
    throw ConfigError("assemble: base potential needs one component per axis");
  for (const auto& c : prob.base_potential)
    if (c.lattice() != lat) throw ConfigError("assemble: base potential lattice mismatch");
  if (static_cast<int>(prob.forms.size()) != lat.dim())
    throw ConfigError("assemble: need one form per generator");
  for (const auto& f : prob.forms)
    if (f.exact && f.exact->lattice() != lat)
      throw ConfigError("assemble: form exact part lattice mismatch");
}

}  // namespace

SchrodingerProblem SchrodingerProblem::standard(const TorusLattice& lat,
                                                PeriodicScalarField potential) {
  SchrodingerProblem prob{lat, std::move(potential), {}, standard_forms(lat)};
  return prob;
}

BlochSchrodingerOperator assemble_schrodinger(const SchrodingerProblem& prob,
                                              const FluxVector& kappa) {
  check_problem(prob);
  const TorusLattice& lat = prob.lattice;
  if (kappa.dim() != lat.dim()) throw ConfigError("assemble: flux dim mismatch");
  const int dim = lat.dim();
  const int B = lat.mode_count();
  const auto red = reduce_flux(kappa);
  const FluxVector& kr = red.reduced;

  // Constant part of the total one-form: flux contraction with the harmonic
  // coefficients plus the mean of the base potential.
  Vector2cd a0 = Vector2cd::Zero();
  for (int m = 0; m < dim; ++m) {
    a0[0] += kr[m] * prob.forms[m].coeff[0];
    a0[1] += kr[m] * prob.forms[m].coeff[1];
  }
  if (!prob.base_potential.empty())
    for (int j = 0; j < dim; ++j) a0[j] += prob.base_potential[j].mean();

  // Non-constant vector-potential components, as band-limited fields.
  std::vector<PeriodicScalarField> var;
  bool has_var = false;
  for (int j = 0; j < dim; ++j) {
    VectorXcd c = VectorXcd::Zero(B);
    if (!prob.base_potential.empty()) {
      c += prob.base_potential[j].coeffs();
      c[lat.mode_index(0, 0)] = 0.0;
    }
    for (int m = 0; m < dim; ++m)
      if (prob.forms[m].exact)
        c += kr[m] * prob.forms[m].exact->derivative(j).coeffs();
    if (c.cwiseAbs().maxCoeff() > 0.0) has_var = true;
    var.push_back(PeriodicScalarField::from_coeffs(lat, c));
  }

  // Convolution data: U enters through its raw coefficients; the a-dependent
  // scalar terms 2 a0.var + var.var - i div(var) and the first-order term
  // need the quadrature grid (products are alias-free for grid >= 4 nmax + 2).
  const int kmax = 2 * lat.nmax();
  const int diff_count =
      dim == 1 ? (2 * kmax + 1) : (2 * kmax + 1) * (2 * kmax + 1);
  VectorXcd co_scalar = VectorXcd::Zero(diff_count);
  std::vector<VectorXcd> co_var(dim, VectorXcd::Zero(diff_count));
  for (int i = 0; i < lat.mode_count(); ++i) {
    const auto n = lat.mode_of(i);
    co_scalar[diff_index(lat, n[0], n[1])] += prob.potential.coeffs()[i];
  }
  if (has_var) {
    VectorXcd g = VectorXcd::Zero(lat.grid_count());
    const Complex I(0.0, 1.0);
    for (int j = 0; j < dim; ++j) {
      const VectorXcd& vj = var[j].samples();
      const VectorXcd dvj = var[j].derivative(j).samples();
      for (int x = 0; x < g.size(); ++x)
        g[x] += 2.0 * a0[j] * vj[x] + vj[x] * vj[x] - I * dvj[x];
      co_var[j] = difference_coefficients(lat, vj, kmax);
    }
    co_scalar += difference_coefficients(lat, g, kmax);
  }

  BlochSchrodingerOperator op;
  op.lattice_ = lat;
  op.flux_ = kappa;
  op.reduced_ = kr;
  op.matrix_.resize(B, B);
  for (int col = 0; col < B; ++col) {
    const Eigen::Vector2d xi = lat.wavevector(col);
    const Vector2cd w(xi[0] + a0[0], xi[1] + a0[1]);
    const Complex kinetic = w[0] * w[0] + w[1] * w[1];
    const auto nc = lat.mode_of(col);
    for (int row = 0; row < B; ++row) {
      const auto nr = lat.mode_of(row);
      const int d1 = nr[0] - nc[0];
      const int d2 = nr[1] - nc[1];
      Complex entry = co_scalar[diff_index(lat, d1, d2)];
      if (has_var)
        for (int j = 0; j < dim; ++j)
          entry += 2.0 * co_var[j][diff_index(lat, d1, d2)] * xi[j];
      if (row == col) entry += kinetic;
      op.matrix_(row, col) = entry;
    }
  }
  return op;
}

double BlochSchrodingerOperator::hermiticity_defect() const {
  const double scale = matrix_.norm();
  if (scale == 0.0) return 0.0;
  return (matrix_ - matrix_.adjoint()).norm() / scale;
}

HermitianSpectrum BlochSchrodingerOperator::spectrum(bool want_vectors) const {
  return eigh(matrix_, want_vectors);
}

MatrixXcd assemble_bloch_direct(const TorusLattice& lat,
                                const PeriodicScalarField& potential,
                                const FluxVector& kappa) {
  if (potential.lattice() != lat)
    throw ConfigError("assemble: potential lattice mismatch");
  const int B = lat.mode_count();
  const auto red = reduce_flux(kappa);
  Eigen::Vector2cd a0 = Eigen::Vector2cd::Zero();
  for (int m = 0; m < lat.dim(); ++m) {
    a0[0] += red.reduced[m] * lat.dual(m)[0];
    a0[1] += red.reduced[m] * lat.dual(m)[1];
  }
  MatrixXcd M = MatrixXcd::Zero(B, B);
  for (int col = 0; col < B; ++col) {
    const Eigen::Vector2d xi = lat.wavevector(col);
    const Complex w0 = xi[0] + a0[0];
    const Complex w1 = xi[1] + a0[1];
    const auto nc = lat.mode_of(col);
    for (int row = 0; row < B; ++row) {
      const auto nr = lat.mode_of(row);
      M(row, col) = potential.coeff(nr[0] - nc[0], nr[1] - nc[1]);
    }
    M(col, col) += w0 * w0 + w1 * w1;
  }
  return M;
}

double two_route_assembly_check(const TorusLattice& lat,
                                const PeriodicScalarField& potential,
                                const FluxVector& kappa) {
  // Route 1: constant vector potential with components sum_m kappa_m f_m,
  // assembled by the general magnetic machinery at zero flux.
  Eigen::Vector2cd a = Eigen::Vector2cd::Zero();
  for (int m = 0; m < lat.dim(); ++m) {
    a[0] += kappa[m] * lat.dual(m)[0];
    a[1] += kappa[m] * lat.dual(m)[1];
  }
  SchrodingerProblem prob = SchrodingerProblem::standard(lat, potential);
  for (int j = 0; j < lat.dim(); ++j)
    prob.base_potential.push_back(PeriodicScalarField::constant(lat, a[j]));
  const FluxVector zero = lat.dim() == 1 ? FluxVector::of(0.0)
                                         : FluxVector::of(0.0, 0.0);
  const MatrixXcd A = assemble_schrodinger(prob, zero).matrix();
  // Route 2: Bloch substitution at quasimomenta kappa.
  const MatrixXcd Bm = assemble_bloch_direct(lat, potential, kappa);
  return (A - Bm).norm();
}

std::vector<DispersionRow> dispersion_sweep(const SchrodingerProblem& prob,
                                            const std::vector<FluxVector>& grid,
                                            int bands, int threads) {
  for (const auto& k : grid)
    if (!k.physical())
      throw ConfigError("dispersion_sweep: flux grid must be real");
  if (bands < 1) throw ConfigError("dispersion_sweep: bands must be >= 1");
  const int points = static_cast<int>(grid.size());
  std::vector<DispersionRow> rows(static_cast<size_t>(points) * bands);
  parallel_for(points, resolve_threads(threads), [&](int i) {
    const auto op = assemble_schrodinger(prob, grid[i]);
    const VectorXd ev = op.spectrum(false).lowest(bands);
    for (int b = 0; b < bands; ++b) {
      DispersionRow& r = rows[static_cast<size_t>(i) * bands + b];
      r.kappa = grid[i];
      r.band = b;
      r.energy = b < ev.size() ? ev[b] : std::nan("");
    }
  });
  return rows;
}

double gauge_check(const SchrodingerProblem& prob, const FluxVector& kappa,
                   const PeriodicScalarField& phi, int levels) {
  SchrodingerProblem gauged = prob;
  if (gauged.forms.empty()) throw ConfigError("gauge_check: no forms");
  if (gauged.forms[0].exact)
    gauged.forms[0].exact = *gauged.forms[0].exact + phi;
  else
    gauged.forms[0].exact = phi;
  const VectorXd a = assemble_schrodinger(prob, kappa).spectrum(false).lowest(levels);
  const VectorXd b =
      assemble_schrodinger(gauged, kappa).spectrum(false).lowest(levels);
  return (a - b).cwiseAbs().maxCoeff();
}

LogDet schrodinger_reldet(const BlochSchrodingerOperator& op, Complex energy) {
  const TorusLattice& lat = op.lattice();
  const int B = lat.mode_count();
  MatrixXcd M = op.matrix();
  M.diagonal().array() -= energy;
  LogDet ld = logdet(M);
  if (ld.singular()) return ld;
  double ref = 0.0;
  for (int i = 0; i < B; ++i)
    ref += std::log(lat.wavevector(i).squaredNorm() + kDeterminantEpsilon);
  ld.log_magnitude -= ref;
  return ld;
}

namespace {

// Zero extraction machinery for real-energy slices.  Sign-change brackets are
// narrowed by bisection and polished by Newton; intervals holding an even
// number of crossings (nearly degenerate pairs) are re-scanned recursively
// around the magnitude minimum until the crossings separate.
struct ZeroHunt {
  const BlochSchrodingerOperator& op;
  std::vector<double> zeros;

  double signed_value(double e) const {
    const LogDet d = schrodinger_reldet(op, Complex(e, 0.0));
    if (d.singular()) return 0.0;
    return std::cos(d.phase) >= 0.0 ? std::exp(d.log_magnitude)
                                    : -std::exp(d.log_magnitude);
  }

  void refine_bracket(double a, double b, double va, double vb) {
    for (int it = 0; it < 64; ++it) {
      if (b - a <= 1e-15 * std::max(1.0, std::abs(a) + std::abs(b))) break;
      const double m = 0.5 * (a + b);
      const double vm = signed_value(m);
      if (vm == 0.0) {
        a = b = m;
        break;
      }
      if (va * vm < 0.0) {
        b = m;
        vb = vm;
      } else {
        a = m;
        va = vm;
      }
    }
    double z = 0.5 * (a + b);
    try {
      const auto f = [&](Complex e) { return schrodinger_reldet(op, e).value(); };
      const auto res = newton_zero(f, Complex(z, 0.0), 1e-12, 40);
      if (std::abs(res.z.real() - z) <= 1e-6 * std::max(1.0, std::abs(z)) &&
          std::abs(res.z.imag()) <= 1e-8 * std::max(1.0, std::abs(z)))
        z = res.z.real();
    } catch (const NumericalError&) {
      // keep the bisection value
    }
    zeros.push_back(z);
  }

  void hunt(double a, double b, int depth) {
    constexpr int kFine = 96;
    double prev_e = a;
    double prev_v = signed_value(a);
    bool crossing = false;
    double min_e = a;
    double min_v = std::abs(prev_v);
    double max_v = std::abs(prev_v);
    for (int j = 1; j <= kFine; ++j) {
      const double e = a + (b - a) * j / kFine;
      const double v = signed_value(e);
      if (prev_v == 0.0 || prev_v * v < 0.0) {
        refine_bracket(prev_e, e, prev_v, v);
        crossing = true;
      }
      if (std::abs(v) < min_v) {
        min_v = std::abs(v);
        min_e = e;
      }
      max_v = std::max(max_v, std::abs(v));
      prev_e = e;
      prev_v = v;
    }
    if (crossing) return;
    const double width = (b - a) / kFine;
    if (depth < 6 && width > 1e-13 * std::max(1.0, std::abs(min_e))) {
      hunt(std::max(a, min_e - width), std::min(b, min_e + width), depth + 1);
      return;
    }
    // bottomed out: accept a deep non-crossing minimum as an even-order zero
    if (min_v > 0.0 && max_v > 0.0 && min_v <= 1e-10 * max_v)
      zeros.push_back(min_e);
  }
};

}  // namespace

VarietySlice bloch_variety_slice(const SchrodingerProblem& prob,
                                 const FluxVector& kappa, double e_lo,
                                 double e_hi, int samples) {
  if (samples < 8) throw ConfigError("bloch_variety_slice: too few samples");
  if (!(e_hi > e_lo)) throw ConfigError("bloch_variety_slice: empty range");
  const auto op = assemble_schrodinger(prob, kappa);
  VarietySlice slice;
  slice.kappa = kappa;
  slice.samples.resize(samples);
  for (int i = 0; i < samples; ++i) {
    const double e = e_lo + (e_hi - e_lo) * i / (samples - 1);
    slice.samples[i] = {e, schrodinger_reldet(op, Complex(e, 0.0))};
  }
  // Candidate intervals: sign changes of the (real) determinant, plus local
  // minima of the log magnitude, which catch closely spaced or double zeros.
  const auto signed_value = [](const LogDet& d) {
    if (d.singular()) return 0.0;
    return std::cos(d.phase) >= 0.0 ? std::exp(d.log_magnitude)
                                    : -std::exp(d.log_magnitude);
  };
  std::vector<std::pair<double, double>> intervals;
  for (int i = 0; i + 1 < samples; ++i) {
    const double va = signed_value(slice.samples[i].det);
    const double vb = signed_value(slice.samples[i + 1].det);
    if (va == 0.0 || va * vb < 0.0)
      intervals.emplace_back(slice.samples[i].energy,
                             slice.samples[i + 1].energy);
  }
  // Valleys of the log magnitude without a sign change: a local minimum that
  // dips well below its wider neighborhood marks an even crossing pair (the
  // dip may straddle two nearly equal samples, hence the windowed depth test).
  for (int i = 1; i + 1 < samples; ++i) {
    const double cur = slice.samples[i].det.log_magnitude;
    if (cur > slice.samples[i - 1].det.log_magnitude ||
        cur > slice.samples[i + 1].det.log_magnitude)
      continue;
    double wide = -std::numeric_limits<double>::infinity();
    for (int j = std::max(0, i - 3); j <= std::min(samples - 1, i + 3); ++j)
      if (j < i - 1 || j > i + 1)
        wide = std::max(wide, slice.samples[j].det.log_magnitude);
    if (cur < wide - 1.5)
      intervals.emplace_back(slice.samples[std::max(0, i - 2)].energy,
                             slice.samples[std::min(samples - 1, i + 2)].energy);
  }
  ZeroHunt hunter{op, {}};
  for (const auto& [a, b] : intervals) hunter.hunt(a, b, 0);
  std::vector<double> zeros = std::move(hunter.zeros);
  std::sort(zeros.begin(), zeros.end());
  for (size_t i = 1; i < zeros.size();) {
    if (zeros[i] - zeros[i - 1] < 1e-9 * std::max(1.0, std::abs(zeros[i])))
      zeros.erase(zeros.begin() + static_cast<long>(i));
    else
      ++i;
  }
  slice.zeros = std::move(zeros);
  return slice;
}

}  // namespace bloch
