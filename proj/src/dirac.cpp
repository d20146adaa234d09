#include "bloch/dirac.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace bloch {

using Eigen::Vector2cd;

FluxVector flux_of_wavevector(const TorusLattice& lat, const Vector2cd& k) {
  if (lat.dim() != 2)
    throw ConfigError("flux_of_wavevector: needs a dim-2 lattice");
  const Complex k1 = kTwoPi * (k[0] * lat.e1().real() + k[1] * lat.e1().imag());
  const Complex k2 = kTwoPi * (k[0] * lat.e2().real() + k[1] * lat.e2().imag());
  return FluxVector::of(k1, k2);
}

namespace {

Vector2cd wave_shift(const TorusLattice& lat, const FluxVector& reduced) {
  Vector2cd c = Vector2cd::Zero();
  for (int m = 0; m < 2; ++m) {
    c[0] += reduced[m] * lat.dual(m)[0];
    c[1] += reduced[m] * lat.dual(m)[1];
  }
  return c;
}

Complex free_block_det(const Vector2cd& w, Complex energy) {
  return energy * energy + symbol_del(w) * symbol_delbar(w);
}

}  // namespace

BlochDiracOperator assemble_dirac(const TorusLattice& lat,
                                  const PeriodicScalarField& potential,
                                  const FluxVector& kappa, Complex energy) {
  return detail::assemble_dirac_frame(lat, potential, kappa,
                                      reduce_flux(kappa).reduced, energy);
}

BlochDiracOperator assemble_dirac_cover(const TorusLattice& lat,
                                        const PeriodicScalarField& potential,
                                        const FluxVector& kappa,
                                        Complex energy) {
  return detail::assemble_dirac_frame(lat, potential, kappa, kappa, energy);
}

namespace detail {

BlochDiracOperator assemble_dirac_frame(const TorusLattice& lat,
                                        const PeriodicScalarField& potential,
                                        const FluxVector& kappa,
                                        const FluxVector& effective,
                                        Complex energy) {
  if (lat.dim() != 2) throw ConfigError("assemble_dirac: needs a dim-2 lattice");
  if (potential.lattice() != lat)
    throw ConfigError("assemble_dirac: potential lattice mismatch");
  if (kappa.dim() != 2) throw ConfigError("assemble_dirac: flux dim mismatch");
  const int B = lat.mode_count();
  const Vector2cd shift = wave_shift(lat, effective);

  BlochDiracOperator op;
  op.lattice_ = lat;
  op.flux_ = kappa;
  op.reduced_ = effective;
  op.energy_ = energy;
  op.matrix_ = MatrixXcd::Zero(2 * B, 2 * B);
  MatrixXcd& M = op.matrix_;
  for (int col = 0; col < B; ++col) {
    const auto nc = lat.mode_of(col);
    for (int row = 0; row < B; ++row) {
      const auto nr = lat.mode_of(row);
      const Complex u = potential.coeff(nr[0] - nc[0], nr[1] - nc[1]);
      if (u != Complex(0.0, 0.0)) {
        M(2 * row, 2 * col) = u;
        // conj(U) has coefficients conj(u_{-d}).
        M(2 * row + 1, 2 * col + 1) =
            std::conj(potential.coeff(nc[0] - nr[0], nc[1] - nr[1]));
      }
    }
    const Eigen::Vector2d xi = lat.wavevector(col);
    const Vector2cd w(xi[0] + shift[0], xi[1] + shift[1]);
    M(2 * col, 2 * col) -= energy;
    M(2 * col + 1, 2 * col + 1) -= energy;
    M(2 * col, 2 * col + 1) = symbol_del(w);
    M(2 * col + 1, 2 * col) = -symbol_delbar(w);
  }
  return op;
}

}  // namespace detail

double BlochDiracOperator::hermiticity_defect() const {
  const double scale = matrix_.norm();
  if (scale == 0.0) return 0.0;
  return (matrix_ - matrix_.adjoint()).norm() / scale;
}

namespace {

LogDet reldet_of(const BlochDiracOperator& op) {
  const TorusLattice& lat = op.lattice();
  const Complex energy = op.energy();
  const Vector2cd shift = wave_shift(lat, op.reduced_flux());
  double ref_logmag = 0.0;
  double ref_phase = 0.0;
  for (int i = 0; i < lat.mode_count(); ++i) {
    const Eigen::Vector2d xi = lat.wavevector(i);
    const Complex d = free_block_det({xi[0] + shift[0], xi[1] + shift[1]},
                                     energy);
    const double a = std::abs(d);
    if (a == 0.0)
      throw NumericalError("dirac_reldet: singular free reference");
    ref_logmag += std::log(a);
    ref_phase += std::arg(d);
  }
  LogDet ld = logdet(op.matrix());
  if (ld.singular()) return ld;
  ld.log_magnitude -= ref_logmag;
  double phase = std::remainder(ld.phase - ref_phase, kTwoPi);
  if (phase <= -kPi) phase += kTwoPi;
  ld.phase = phase;
  return ld;
}

}  // namespace

LogDet dirac_reldet(const TorusLattice& lat,
                    const PeriodicScalarField& potential,
                    const FluxVector& kappa, Complex energy) {
  return reldet_of(assemble_dirac(lat, potential, kappa, energy));
}

LogDet dirac_reldet_cover(const TorusLattice& lat,
                          const PeriodicScalarField& potential,
                          const FluxVector& kappa, Complex energy) {
  return reldet_of(assemble_dirac_cover(lat, potential, kappa, energy));
}

double default_lambda_min(const PeriodicScalarField& potential) {
  return 8.0 * (1.0 + potential.max_abs());
}

MultiplierMap multipliers(const TorusLattice& lat,
                          const SpectralCurvePoint& point) {
  return MultiplierMap::from_flux(flux_of_wavevector(lat, point.k));
}

namespace {

Complex local_parameter(const Vector2cd& k, int branch) {
  const Complex I(0.0, 1.0);
  // Rotated coordinates pi*i*(k1 -+ i k2); the large one on each branch.
  return branch > 0 ? kPi * I * (k[0] - I * k[1])
                    : kPi * I * (k[0] + I * k[1]);
}

// Unit-norm near-null vector by inverse iteration on the factored matrix.
void attach_kernel(const TorusLattice& lat, const PeriodicScalarField& U,
                   const FluxVector& kappa, SpectralCurvePoint& pt) {
  const auto op = assemble_dirac_cover(lat, U, kappa, Complex(0.0, 0.0));
  const MatrixXcd& M = op.matrix();
  Eigen::PartialPivLU<MatrixXcd> lu(M);
  std::mt19937 rng(20240517);
  std::normal_distribution<double> gauss(0.0, 1.0);
  VectorXcd v(M.rows());
  for (int i = 0; i < v.size(); ++i) v[i] = Complex(gauss(rng), gauss(rng));
  v.normalize();
  for (int it = 0; it < 3; ++it) {
    VectorXcd w = lu.solve(v);
    const double n = w.norm();
    if (!std::isfinite(n) || n == 0.0) break;
    v = w / n;
  }
  pt.kernel = v;
  pt.kernel_residual = (M * v).norm() / M.norm();
}

}  // namespace

CurveTrace trace_curve(const TorusLattice& lat,
                       const PeriodicScalarField& potential, int branch,
                       double lambda_min, double lambda_max, int steps,
                       const TraceOptions& opts) {
  if (lat.dim() != 2) throw ConfigError("trace_curve: needs a dim-2 lattice");
  if (branch != 1 && branch != -1)
    throw ConfigError("trace_curve: branch must be +1 or -1");
  if (!(lambda_min > 0.0) || !(lambda_max > lambda_min))
    throw ConfigError("trace_curve: bad lambda range");
  if (steps < 2) throw ConfigError("trace_curve: need at least 2 steps");

  CurveTrace trace;
  const Complex I(0.0, 1.0);
  const double s = static_cast<double>(branch);

  if (potential.max_abs() == 0.0) {
    // Free operator: the branch is exact, kernel is the single surviving mode.
    for (int j = 0; j < steps; ++j) {
      const double lam = lambda_min + (lambda_max - lambda_min) * j / (steps - 1);
      SpectralCurvePoint pt;
      const double k1 = lam / kTwoPi;
      pt.k = Vector2cd(Complex(k1, 0.0), s * I * k1);
      pt.branch = branch;
      pt.det_residual = 0.0;
      pt.lambda = local_parameter(pt.k, branch);
      pt.mu = multipliers(lat, pt);
      pt.kernel = VectorXcd::Zero(2 * lat.mode_count());
      pt.kernel[2 * lat.mode_index(0, 0) + (branch > 0 ? 0 : 1)] = 1.0;
      pt.kernel_residual = 0.0;
      trace.points.push_back(std::move(pt));
    }
    return trace;
  }

  const Complex q = integral_square(potential) / lat.area();
  const auto seed_k2 = [&](double k1) {
    return s * I * std::sqrt(Complex(k1 * k1, 0.0) - q / (kPi * kPi));
  };

  // Continuation state.
  std::vector<std::pair<double, Complex>> solved;  // (k1, k2), helpers included
  double prev_guard = std::numeric_limits<double>::infinity();

  const auto solve_at = [&](double k1, Complex k2_guess,
                            SpectralCurvePoint* out) -> bool {
    // Continuation happens on the covering sheet: the window stays centered on
    // the n = 0 resonance for arbitrarily large k1.
    const auto f = [&](Complex k2) {
      const FluxVector kap =
          flux_of_wavevector(lat, Vector2cd(Complex(k1, 0.0), k2));
      return dirac_reldet_cover(lat, potential, kap, Complex(0.0, 0.0)).value();
    };
    try {
      const auto res =
          newton_zero(f, k2_guess, opts.newton_tol, opts.newton_max_iter);
      if (!(std::abs(res.residual) <= opts.residual_tol)) return false;
      const double guard = std::abs(res.z - s * I * k1);
      if (guard > opts.guard_growth * prev_guard + 1e-12) return false;
      if (out) {
        out->k = Vector2cd(Complex(k1, 0.0), res.z);
        out->branch = branch;
        out->det_residual = std::abs(res.residual);
        out->lambda = local_parameter(out->k, branch);
        out->mu = multipliers(lat, *out);
      }
      solved.emplace_back(k1, res.z);
      prev_guard = guard;
      return true;
    } catch (const NumericalError&) {
      return false;
    }
  };

  const auto predict = [&](double k1) -> Complex {
    const size_t n = solved.size();
    if (n >= 2) {
      const auto& [xa, ya] = solved[n - 2];
      const auto& [xb, yb] = solved[n - 1];
      if (xb != xa) return yb + (yb - ya) * (k1 - xb) / (xb - xa);
    }
    if (n == 1) return solved[0].second + s * I * (k1 - solved[0].first);
    return seed_k2(k1);
  };

  double k1_prev = 0.0;
  for (int j = 0; j < steps; ++j) {
    const double lam = lambda_min + (lambda_max - lambda_min) * j / (steps - 1);
    const double k1_target = lam / kTwoPi;
    SpectralCurvePoint pt;
    if (solved.empty()) {
      if (!solve_at(k1_target, seed_k2(k1_target), &pt)) {
        trace.truncated = true;
        trace.truncation_reason = "newton failed at the first trace point";
        return trace;
      }
    } else {
      // March from the last solved k1 to the target, halving on failure.
      double from = k1_prev;
      int halvings = 0;
      bool ok = true;
      double next = k1_target;
      while (true) {
        const bool final_step = next == k1_target;
        SpectralCurvePoint tmp;
        if (solve_at(next, predict(next), final_step ? &pt : &tmp)) {
          from = next;
          if (final_step) break;
          next = k1_target;
        } else {
          if (++halvings > opts.max_halvings) {
            ok = false;
            break;
          }
          next = 0.5 * (from + next);
        }
      }
      if (!ok) {
        trace.truncated = true;
        trace.truncation_reason = "newton failed after max step halvings";
        return trace;
      }
    }
    if (opts.want_kernels) {
      attach_kernel(lat, potential, flux_of_wavevector(lat, pt.k), pt);
    }
    trace.points.push_back(std::move(pt));
    k1_prev = k1_target;
  }
  return trace;
}

C0Fit fit_c0(const std::vector<SpectralCurvePoint>& trace, Complex v) {
  if (trace.size() < 4)
    throw NumericalError("fit_c0: need at least 4 trace points");
  const int branch = trace.front().branch;
  for (const auto& p : trace)
    if (p.branch != branch)
      throw NumericalError("fit_c0: trace mixes branches");
  std::vector<std::pair<Complex, Complex>> samples;
  samples.reserve(trace.size());
  const Complex I(0.0, 1.0);
  for (const auto& p : trace) {
    const Complex logmu =
        kTwoPi * I * (p.k[0] * v.real() + p.k[1] * v.imag());
    samples.emplace_back(p.lambda, logmu);
  }
  const LaurentFit fit = fit_laurent(samples, {1, -1});
  C0Fit out;
  out.leading = fit.coeff_of(1);
  const Complex denom = branch > 0 ? std::conj(v) : v;
  if (std::abs(denom) == 0.0) throw NumericalError("fit_c0: zero lattice vector");
  out.c0 = fit.coeff_of(-1) / denom;
  out.max_residual = fit.max_residual;
  return out;
}

bool QuadraticFormZ2::quadratic() const {
  for (int a1 = 0; a1 < 2; ++a1)
    for (int b1 = 0; b1 < 2; ++b1)
      for (int a2 = 0; a2 < 2; ++a2)
        for (int b2 = 0; b2 < 2; ++b2) {
          const int lhs = (*this)(a1 ^ a2, b1 ^ b2);
          const int rhs =
              ((*this)(a1, b1) + (*this)(a2, b2) + (a1 * b2 + a2 * b1)) % 2;
          if (lhs != rhs) return false;
        }
  return true;
}

QuadraticFormZ2 spinor_form(int nu1, int nu2) {
  nu1 &= 1;
  nu2 &= 1;
  QuadraticFormZ2 q;
  q.values[0] = 0;
  q.values[1] = (1 + nu1) % 2;
  q.values[2] = (1 + nu2) % 2;
  q.values[3] = (1 + nu1 + nu2) % 2;
  return q;
}

RealMultiplierKernel kernel_at_real_multipliers(const TorusLattice& lat,
                                                const PeriodicScalarField& U,
                                                const FluxVector& kappa) {
  for (int m = 0; m < 2; ++m) {
    const double r = kappa[m].real();
    if (kappa[m].imag() != 0.0 ||
        (std::abs(std::remainder(r, kPi)) > 1e-12))
      throw ConfigError(
          "kernel_at_real_multipliers: flux components must be multiples of pi");
  }
  const auto op = assemble_dirac(lat, U, kappa, Complex(0.0, 0.0));
  const auto spec = eigh(op.matrix(), true);
  int best = 0;
  for (int i = 1; i < spec.eigenvalues.size(); ++i)
    if (std::abs(spec.eigenvalues[i]) < std::abs(spec.eigenvalues[best]))
      best = i;
  RealMultiplierKernel out;
  out.energy = spec.eigenvalues[best];
  out.coeffs = spec.eigenvectors->col(best);
  out.kernel_residual =
      ((op.matrix() - out.energy * MatrixXcd::Identity(op.matrix().rows(),
                                                       op.matrix().cols())) *
       out.coeffs)
          .norm() /
      op.matrix().norm();
  return out;
}

}  // namespace bloch
