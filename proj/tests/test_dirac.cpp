#include <doctest.h>

#include <random>

#include "bloch/dirac.hpp"

using namespace bloch;

namespace {

TorusLattice unit_torus(int nmax, int grid) {
  return TorusLattice::make_2d({1.0, 0.0}, {0.0, 1.0}, nmax, grid);
}

}  // namespace

TEST_CASE("free Dirac determinant is one away from the curve") {
  const auto lat = unit_torus(4, 32);
  const auto U = PeriodicScalarField::zero(lat);
  const auto ld = dirac_reldet(lat, U, FluxVector::of(0.9, 0.4), Complex(0, 0));
  CHECK(std::abs(ld.log_magnitude) < 1e-10);
  CHECK(std::abs(ld.phase) < 1e-10);
}

TEST_CASE("constant potential blocks carry the closed-form determinant") {
  const auto lat = unit_torus(3, 16);
  const double c = 0.8;
  const auto U = PeriodicScalarField::constant(lat, c);
  const FluxVector kappa = FluxVector::of(0.37, Complex(-0.2, 0.11));
  const Complex E(0.15, -0.07);
  const auto op = assemble_dirac(lat, U, kappa, E);
  const auto& M = op.matrix();
  // off-block entries vanish; per-mode 2x2 determinant matches the symbol formula
  Eigen::Vector2cd shift = Eigen::Vector2cd::Zero();
  for (int m = 0; m < 2; ++m) {
    shift[0] += op.reduced_flux()[m] * lat.dual(m)[0];
    shift[1] += op.reduced_flux()[m] * lat.dual(m)[1];
  }
  for (int i = 0; i < lat.mode_count(); ++i) {
    const Eigen::Vector2d xi = lat.wavevector(i);
    const Eigen::Vector2cd w(xi[0] + shift[0], xi[1] + shift[1]);
    const Complex det = M(2 * i, 2 * i) * M(2 * i + 1, 2 * i + 1) -
                        M(2 * i, 2 * i + 1) * M(2 * i + 1, 2 * i);
    const Complex expect =
        (c - E) * (c - E) - 0.25 * (w[0] * w[0] + w[1] * w[1]);
    CHECK(std::abs(det - expect) < 1e-12 * std::max(1.0, std::abs(expect)));
    for (int j = 0; j < lat.mode_count(); ++j) {
      if (i == j) continue;
      CHECK(std::abs(M(2 * i, 2 * j)) == 0.0);
      CHECK(std::abs(M(2 * i, 2 * j + 1)) == 0.0);
    }
  }
}

TEST_CASE("determinant is invariant under dual-lattice flux shifts") {
  const auto lat = unit_torus(6, 32);
  std::mt19937_64 rng(19);
  std::normal_distribution<double> gauss;
  VectorXcd c = VectorXcd::Zero(lat.mode_count());
  for (int i = 0; i < lat.mode_count(); ++i) {
    const auto n = lat.mode_of(i);
    if (n[0] < 0 || (n[0] == 0 && n[1] < 0)) continue;
    const double decay = std::exp(-1.0 * (std::abs(n[0]) + std::abs(n[1])));
    if (n[0] == 0 && n[1] == 0)
      c[i] = 0.6 * gauss(rng);
    else {
      c[i] = 0.3 * decay * Complex(gauss(rng), gauss(rng));
      c[lat.mode_index(-n[0], -n[1])] = std::conj(c[i]);
    }
  }
  const auto U = PeriodicScalarField::from_coeffs(lat, c);
  const FluxVector kappa = FluxVector::of(Complex(0.8, 0.3), Complex(-0.4, 1.1));
  const Complex E(0.1, 0.05);
  const auto a = dirac_reldet(lat, U, kappa, E);
  for (int m = 0; m < 2; ++m) {
    const auto b = dirac_reldet(lat, U, kappa.shifted(m, kTwoPi), E);
    CHECK(std::abs(a.log_magnitude - b.log_magnitude) <
          1e-10 * std::max(1.0, std::abs(a.log_magnitude)));
    CHECK(std::abs(std::remainder(a.phase - b.phase, kTwoPi)) < 1e-10);
  }
}

TEST_CASE("real potential and real flux give a Hermitian matrix") {
  const auto lat = unit_torus(4, 32);
  const auto U = PeriodicScalarField::cosine(lat, 0, 0.7);
  const auto op = assemble_dirac(lat, U, FluxVector::of(kPi, kPi), Complex(0, 0));
  CHECK(op.hermiticity_defect() < 1e-13);
}

TEST_CASE("free trace is the exact asymptotic branch") {
  const auto lat = unit_torus(3, 16);
  const auto U = PeriodicScalarField::zero(lat);
  for (int branch : {+1, -1}) {
    const auto trace = trace_curve(lat, U, branch, 8.0, 24.0, 5);
    REQUIRE(trace.points.size() == 5);
    CHECK_FALSE(trace.truncated);
    for (const auto& p : trace.points) {
      CHECK(std::abs(p.k[1] - double(branch) * Complex(0, 1) * p.k[0]) == 0.0);
      CHECK(p.det_residual == 0.0);
      CHECK(p.kernel_residual <= 1e-12);
    }
  }
}

TEST_CASE("constant potential trace satisfies the closed-form curve") {
  const auto lat = unit_torus(5, 32);
  const double c = 1.0;
  const auto U = PeriodicScalarField::constant(lat, c);
  const double lmin = default_lambda_min(U);
  for (int branch : {+1, -1}) {
    const auto trace = trace_curve(lat, U, branch, lmin, 2.0 * lmin, 8);
    REQUIRE_FALSE(trace.truncated);
    for (const auto& p : trace.points) {
      const Complex prod = kPi * kPi * (p.k[0] * p.k[0] + p.k[1] * p.k[1]);
      CHECK(std::abs(prod - c * c) < 1e-8);
      CHECK(p.det_residual <= 1e-8);
      CHECK(p.kernel_residual <= 1e-7);
      // lambda * rho is the rotated-coordinate product
      const Complex lam = p.lambda;
      const Complex rho = branch > 0
                              ? kPi * Complex(0, 1) * (p.k[0] + Complex(0, 1) * p.k[1])
                              : kPi * Complex(0, 1) * (p.k[0] - Complex(0, 1) * p.k[1]);
      CHECK(std::abs(lam * rho + c * c) < 1e-8);
    }
  }
}

TEST_CASE("traced points converge as nmax doubles") {
  const auto u_of = [](const TorusLattice& lat) {
    return PeriodicScalarField::constant(lat, 0.5) +
           PeriodicScalarField::cosine(lat, 0, 0.2);
  };
  const auto lat4 = unit_torus(4, 32);
  const auto lat8 = unit_torus(8, 64);
  TraceOptions opts;
  opts.want_kernels = false;
  const double lmin = 8.0 * (1.0 + 0.7);
  const auto t4 = trace_curve(lat4, u_of(lat4), +1, lmin, 2.0 * lmin, 4, opts);
  const auto t8 = trace_curve(lat8, u_of(lat8), +1, lmin, 2.0 * lmin, 4, opts);
  REQUIRE_FALSE(t4.truncated);
  REQUIRE_FALSE(t8.truncated);
  for (size_t i = 0; i < 4; ++i)
    CHECK((t4.points[i].k - t8.points[i].k).norm() < 1e-7);
}

TEST_CASE("branch symmetry for a real potential") {
  const auto lat = unit_torus(4, 32);
  const auto U = PeriodicScalarField::constant(lat, 0.6) +
                 PeriodicScalarField::cosine(lat, 1, 0.3);
  const double lmin = default_lambda_min(U);
  TraceOptions opts;
  opts.want_kernels = false;
  const auto trace = trace_curve(lat, U, +1, lmin, 1.5 * lmin, 3, opts);
  REQUIRE_FALSE(trace.truncated);
  for (const auto& p : trace.points) {
    // (k1, k2) on the curve implies (-conj k1, -conj k2) on the curve.
    const Eigen::Vector2cd mirror(-std::conj(p.k[0]), -std::conj(p.k[1]));
    const auto ld = dirac_reldet_cover(lat, U, flux_of_wavevector(lat, mirror),
                                       Complex(0, 0));
    CHECK(std::exp(ld.log_magnitude) < 1e-8);
  }
}

TEST_CASE("multipliers of curve points") {
  const auto lat = unit_torus(2, 16);
  SpectralCurvePoint p;
  p.k = Eigen::Vector2cd(Complex(0, 0), Complex(0, 0));
  auto mu = multipliers(lat, p);
  CHECK(std::abs(mu[0] - 1.0) < 1e-14);
  CHECK(std::abs(mu[1] - 1.0) < 1e-14);
  p.k = Eigen::Vector2cd(Complex(0.5, 0.0), Complex(0.5, 0.0));
  mu = multipliers(lat, p);
  CHECK(std::abs(mu[0] + 1.0) < 1e-14);
  CHECK(std::abs(mu[1] + 1.0) < 1e-14);
  // dual-lattice shift k -> k + (1, 0) leaves the map unchanged
  p.k = Eigen::Vector2cd(Complex(0.37, 0.11), Complex(-0.2, 0.05));
  mu = multipliers(lat, p);
  SpectralCurvePoint ps = p;
  ps.k[0] += 1.0;
  const auto mus = multipliers(lat, ps);
  CHECK(std::abs(mu[0] - mus[0]) < 1e-12);
  CHECK(std::abs(mu[1] - mus[1]) < 1e-12);
}

TEST_CASE("fit_c0 recovers exact synthetic Laurent data") {
  const auto lat = unit_torus(2, 16);
  const Complex c0(-1.3, 0.2);
  std::vector<SpectralCurvePoint> pts;
  for (int j = 0; j < 12; ++j) {
    const Complex lam = Complex(0.0, 20.0 + 3.0 * j);
    const Complex rho = c0 / lam;
    SpectralCurvePoint p;
    p.branch = +1;
    p.lambda = lam;
    // invert lambda = pi i (k1 - i k2), rho = pi i (k1 + i k2)
    const Complex I(0, 1);
    p.k[0] = (lam + rho) / (2.0 * kPi * I);
    p.k[1] = (lam - rho) / (2.0 * kPi);
    pts.push_back(p);
  }
  for (const Complex v : {Complex(1.0, 0.0), Complex(0.0, 1.0), Complex(2.0, -1.0)}) {
    const auto fit = fit_c0(pts, v);
    CHECK(std::abs(fit.c0 - c0) < 1e-10);
    CHECK(std::abs(fit.leading - v) < 1e-10);
  }
}

TEST_CASE("fit_c0 on the constant-potential curve equals -c^2") {
  const auto lat = unit_torus(4, 32);
  const double c = 1.0;
  const auto U = PeriodicScalarField::constant(lat, c);
  const double lmin = default_lambda_min(U);
  TraceOptions opts;
  opts.want_kernels = false;
  for (int branch : {+1, -1}) {
    const auto trace = trace_curve(lat, U, branch, lmin, 4.0 * lmin, 12, opts);
    REQUIRE_FALSE(trace.truncated);
    const auto fit = fit_c0(trace.points, lat.e1());
    CHECK(std::abs(fit.c0 - Complex(-c * c, 0.0)) < 1e-8);
    const Complex plug = -integral_square(U) / lat.area();
    CHECK(std::abs(fit.c0 - plug) < 1e-8);
  }
}

TEST_CASE("fit_c0 approaches the mean-square integral for a cosine potential") {
  const auto lat = unit_torus(4, 32);
  const auto U = PeriodicScalarField::constant(lat, 1.0) +
                 PeriodicScalarField::cosine(lat, 1, 0.3);
  const double lmin = default_lambda_min(U);
  TraceOptions opts;
  opts.want_kernels = false;
  const auto trace = trace_curve(lat, U, +1, lmin, 4.0 * lmin, 10, opts);
  REQUIRE_FALSE(trace.truncated);
  const auto fit = fit_c0(trace.points, lat.e1());
  const double target = -(1.0 + 0.5 * 0.3 * 0.3);
  CHECK(std::abs(fit.c0 - Complex(target, 0.0)) < 0.05 * std::abs(target));
}

TEST_CASE("quadratic forms from multiplier homomorphisms") {
  // nu = 0 is the base form
  const auto q0 = spinor_form(0, 0);
  CHECK(q0.values == std::array<int, 4>{0, 1, 1, 1});
  CHECK(q0.quadratic());
  const auto q10 = spinor_form(1, 0);
  CHECK(q10(1, 0) == 0);
  CHECK(q10(0, 1) == 1);
  CHECK(q10(1, 1) == 0);
  int distinct = 0;
  for (int nu1 = 0; nu1 < 2; ++nu1)
    for (int nu2 = 0; nu2 < 2; ++nu2) {
      const auto q = spinor_form(nu1, nu2);
      CHECK(q.quadratic());
      distinct += q.values[1] + 2 * q.values[2];
    }
  CHECK(distinct == 6);  // all four forms are distinct
}

TEST_CASE("kernel at real multipliers is an exact shifted zero mode") {
  const auto lat = unit_torus(5, 32);
  const auto U = PeriodicScalarField::constant(lat, 0.8) +
                 PeriodicScalarField::cosine(lat, 0, 0.4);
  const auto kernel = kernel_at_real_multipliers(lat, U, FluxVector::of(kPi, kPi));
  CHECK(kernel.kernel_residual < 1e-12);
  // the shifted operator annihilates the vector
  const auto shifted = U - PeriodicScalarField::constant(lat, kernel.energy);
  const auto op = assemble_dirac(lat, shifted, FluxVector::of(kPi, kPi), Complex(0, 0));
  CHECK((op.matrix() * kernel.coeffs).norm() < 1e-10 * op.matrix().norm());
  CHECK_THROWS_AS(
      kernel_at_real_multipliers(lat, U, FluxVector::of(0.5, kPi)), ConfigError);
}
