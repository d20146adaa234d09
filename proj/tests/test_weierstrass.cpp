#include <doctest.h>

#include <random>
#include <sstream>

#include "bloch/weierstrass.hpp"

using namespace bloch;

namespace {

TorusLattice unit_torus(int nmax, int grid) {
  return TorusLattice::make_2d({1.0, 0.0}, {0.0, 1.0}, nmax, grid);
}

SpinorField random_spinor(const TorusLattice& lat, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  VectorXcd p1(lat.mode_count()), p2(lat.mode_count());
  for (int i = 0; i < lat.mode_count(); ++i) {
    const auto n = lat.mode_of(i);
    const double decay = std::exp(-0.8 * (std::abs(n[0]) + std::abs(n[1])));
    p1[i] = decay * Complex(gauss(rng), gauss(rng));
    p2[i] = decay * Complex(gauss(rng), gauss(rng));
  }
  const double scale = std::sqrt(p1.squaredNorm() + p2.squaredNorm());
  p1 /= scale;
  p2 /= scale;
  return SpinorField::from_components(lat, FluxVector::of(kPi, kPi), p1, p2);
}

// A nonconstant real potential and the exact kernel spinor of U - E0.
struct KernelData {
  PeriodicScalarField U;
  SpinorField psi;
  double shift;
};

KernelData make_kernel_data(const TorusLattice& lat) {
  const auto U0 = PeriodicScalarField::constant(lat, 0.9) +
                  PeriodicScalarField::cosine(lat, 0, 0.4) +
                  PeriodicScalarField::cosine(lat, 1, 0.25);
  const FluxVector kpp = FluxVector::of(kPi, kPi);
  const auto kernel = kernel_at_real_multipliers(lat, U0, kpp);
  return {U0 - PeriodicScalarField::constant(lat, kernel.energy),
          SpinorField::from_kernel(lat, kpp, kernel.coeffs), kernel.energy};
}

}  // namespace

TEST_CASE("spinor field construction and multipliers") {
  const auto lat = unit_torus(4, 32);
  VectorXcd p1 = VectorXcd::Zero(lat.mode_count());
  VectorXcd p2 = VectorXcd::Zero(lat.mode_count());
  p1[lat.mode_index(0, 0)] = 1.0;
  const auto psi = SpinorField::from_components(lat, FluxVector::of(kPi, 0.0), p1, p2);
  const auto mu = psi.multiplier_map();
  CHECK(std::abs(mu[0] + 1.0) < 1e-14);
  CHECK(std::abs(mu[1] - 1.0) < 1e-14);
  CHECK(psi.nu()[0] == 1);
  CHECK(psi.nu()[1] == 0);
  CHECK(psi.density_periodicity_defect() < 1e-12);
  CHECK_THROWS_AS(
      SpinorField::from_components(lat, FluxVector::of(0.5, 0.0), p1, p2),
      ConfigError);
}

TEST_CASE("constant spinor with zero potential gives a plane") {
  const auto lat = unit_torus(3, 16);
  const auto U = PeriodicScalarField::zero(lat);
  VectorXcd p1 = VectorXcd::Zero(lat.mode_count());
  VectorXcd p2 = VectorXcd::Zero(lat.mode_count());
  p1[lat.mode_index(0, 0)] = 1.0;
  const auto psi = SpinorField::from_components(lat, FluxVector::of(0.0, 0.0), p1, p2);
  CHECK(dirac_residual(U, psi) < 1e-13);
  CHECK(closedness_residual(psi) < 1e-13);
  const auto mesh = integrate_immersion(U, psi);
  const int G = mesh.grid;
  // X is affine in (s, t); compare against the first row/column increments
  const Eigen::Vector3d ds = mesh.at(1, 0) - mesh.at(0, 0);
  const Eigen::Vector3d dt = mesh.at(0, 1) - mesh.at(0, 0);
  for (int p = 0; p <= G; ++p)
    for (int q = 0; q <= G; ++q) {
      const Eigen::Vector3d expect = mesh.at(0, 0) + p * ds + q * dt;
      CHECK((mesh.at(p, q) - expect).norm() < 1e-11);
    }
  // flat: unit conformal factor, zero mean curvature
  CHECK(std::abs(mesh.e2alpha(2, 3) - 1.0) < 1e-12);
  CHECK(std::abs(mesh.mean_curvature(2, 3)) < 1e-12);
}

TEST_CASE("kernel spinor residuals transfer to the grid") {
  const auto lat = unit_torus(6, 32);
  const auto data = make_kernel_data(lat);
  CHECK(dirac_residual(data.U, data.psi) < 1e-7);
  CHECK(closedness_residual(data.psi) < 1e-7);
}

TEST_CASE("random spinor is a negative control") {
  const auto lat = unit_torus(6, 32);
  const auto data = make_kernel_data(lat);
  const auto noise = random_spinor(lat, 4);
  CHECK(dirac_residual(data.U, noise) > 1e-2);
  CHECK(closedness_residual(noise) > 1e-2);
}

TEST_CASE("closedness residual scales quadratically with the spinor") {
  const auto lat = unit_torus(4, 32);
  const auto noise = random_spinor(lat, 9);
  const double r1 = closedness_residual(noise);
  const auto scaled = SpinorField::from_components(
      lat, noise.flux(), 3.0 * noise.phi1(), 3.0 * noise.phi2());
  const double r9 = closedness_residual(scaled);
  CHECK(r9 == doctest::Approx(9.0 * r1).epsilon(1e-10));
}

TEST_CASE("row-first and column-first integration agree") {
  const auto lat = unit_torus(6, 32);
  const auto data = make_kernel_data(lat);
  IntegrationOptions a, b;
  b.column_first = true;
  const auto ma = integrate_immersion(data.U, data.psi, a);
  const auto mb = integrate_immersion(data.U, data.psi, b);
  double dev = 0.0;
  for (int p = 0; p <= ma.grid; ++p)
    for (int q = 0; q <= ma.grid; ++q)
      dev = std::max(dev, (ma.at(p, q) - mb.at(p, q)).norm());
  CHECK(dev < 1e-8);
  CHECK(ma.period_spread < 1e-8);
}

TEST_CASE("translation equivariance") {
  const auto lat = unit_torus(6, 32);
  const auto data = make_kernel_data(lat);
  IntegrationOptions a;
  IntegrationOptions b;
  b.origin = Eigen::Vector3d(0.3, -1.0, 2.5);
  const auto ma = integrate_immersion(data.U, data.psi, a);
  const auto mb = integrate_immersion(data.U, data.psi, b);
  for (int p = 0; p <= ma.grid; p += 5)
    for (int q = 0; q <= ma.grid; q += 5)
      CHECK((mb.at(p, q) - ma.at(p, q) - b.origin).norm() < 1e-12);
}

TEST_CASE("SU(2) action rotates the immersion and fixes the multipliers") {
  const auto lat = unit_torus(7, 32);
  const auto data = make_kernel_data(lat);
  const Complex alpha(0.8, 0.1);
  const Complex beta(0.36, -0.48);
  const double norm = std::sqrt(std::norm(alpha) + std::norm(beta));
  const auto rotated = data.psi.rotated(alpha / norm, beta / norm);
  // multipliers unchanged
  CHECK(rotated.nu() == data.psi.nu());
  // the rotated spinor still solves the same Dirac equation
  CHECK(dirac_residual(data.U, rotated) < 1e-7);
  const auto ma = integrate_immersion(data.U, data.psi);
  const auto mb = integrate_immersion(data.U, rotated);
  const Eigen::Matrix3d R = rotation_from_su2(alpha / norm, beta / norm);
  CHECK(std::abs(R.determinant() - 1.0) < 1e-12);
  CHECK((R * R.transpose() - Eigen::Matrix3d::Identity()).norm() < 1e-12);
  double dev = 0.0;
  for (int p = 0; p <= ma.grid; ++p)
    for (int q = 0; q <= ma.grid; ++q)
      dev = std::max(dev, (mb.at(p, q) - R * ma.at(p, q)).norm());
  CHECK(dev < 1e-9);
}

TEST_CASE("willmore values") {
  const auto lat = unit_torus(6, 32);
  SUBCASE("constant potential") {
    const auto U = PeriodicScalarField::constant(lat, 1.5);
    CHECK(willmore(U).direct == doctest::Approx(4.0 * 1.5 * 1.5).epsilon(1e-13));
  }
  SUBCASE("cosine potential integrates to 2") {
    const auto U = PeriodicScalarField::cosine(lat, 0, 1.0);
    CHECK(willmore(U).direct == doctest::Approx(2.0).epsilon(1e-13));
  }
  SUBCASE("two-route identity on a mesh") {
    const auto data = make_kernel_data(lat);
    const auto mesh = integrate_immersion(data.U, data.psi);
    const auto w = willmore(data.U, &mesh);
    CHECK(std::abs(w.direct - w.geometric) <= 1e-10 * w.direct);
  }
  SUBCASE("complex potential is rejected") {
    const auto U = PeriodicScalarField::constant(lat, Complex(1.0, 0.5));
    CHECK_THROWS_AS(willmore(U), ConfigError);
  }
}

TEST_CASE("discrete first fundamental form converges at second order") {
  const auto lat1 = unit_torus(6, 32);
  const auto lat2 = unit_torus(6, 64);
  const auto d1 = make_kernel_data(lat1);
  // same kernel coefficients on the refined grid (mode set is unchanged)
  const auto U2 = PeriodicScalarField::from_coeffs(lat2, d1.U.coeffs());
  const auto psi2 =
      SpinorField::from_components(lat2, d1.psi.flux(), d1.psi.phi1(), d1.psi.phi2());
  const auto m1 = integrate_immersion(d1.U, d1.psi);
  const auto m2 = integrate_immersion(U2, psi2);

  const auto fff_error = [](const ImmersionMesh& mesh, const TorusLattice& lat) {
    const int G = mesh.grid;
    const double h = 1.0 / G;
    double err = 0.0;
    for (int p = 1; p < G; ++p)
      for (int q = 1; q < G; ++q) {
        const Eigen::Vector3d xs = (mesh.at(p + 1, q) - mesh.at(p - 1, q)) / (2 * h);
        const Eigen::Vector3d xt = (mesh.at(p, q + 1) - mesh.at(p, q - 1)) / (2 * h);
        const double e2a = mesh.e2alpha(p, q);
        const double E = e2a * std::norm(lat.e1());
        const double Gm = e2a * std::norm(lat.e2());
        const double F = e2a * (std::conj(lat.e1()) * lat.e2()).real();
        err = std::max(err, std::abs(xs.squaredNorm() - E));
        err = std::max(err, std::abs(xt.squaredNorm() - Gm));
        err = std::max(err, std::abs(xs.dot(xt) - F));
      }
    return err;
  };
  const double e1 = fff_error(m1, lat1);
  const double e2 = fff_error(m2, lat2);
  const double order = std::log2(e1 / e2);
  CHECK(order >= 1.9);
}

TEST_CASE("degenerate points are flagged and H is not evaluated") {
  const auto lat = unit_torus(4, 32);
  // psi1 = cos(2 pi s): vanishes on two circles that the grid hits exactly
  VectorXcd p1 = VectorXcd::Zero(lat.mode_count());
  p1[lat.mode_index(1, 0)] = 0.5;
  p1[lat.mode_index(-1, 0)] = 0.5;
  VectorXcd p2 = VectorXcd::Zero(lat.mode_count());
  const auto psi = SpinorField::from_components(lat, FluxVector::of(0.0, 0.0), p1, p2);
  const auto U = PeriodicScalarField::constant(lat, 1.0);
  IntegrationOptions opts;
  opts.closedness_threshold = 1e9;  // not a Dirac solution; only the flags matter
  const auto mesh = integrate_immersion(U, psi, opts);
  const int G = mesh.grid;
  const int p_zero = G / 4;  // s = 1/4
  CHECK(mesh.degenerate[static_cast<size_t>(p_zero) * (G + 1) + 3] == 1);
  CHECK(std::isnan(mesh.mean_curvature(p_zero, 3)));
  CHECK(mesh.degenerate[3] == 0);
}

TEST_CASE("integration requires closedness below threshold") {
  const auto lat = unit_torus(4, 32);
  const auto noise = random_spinor(lat, 21);
  const auto U = PeriodicScalarField::constant(lat, 1.0);
  CHECK_THROWS_AS(integrate_immersion(U, noise), NumericalError);
}

TEST_CASE("obj export shape") {
  const auto lat = unit_torus(6, 32);
  const auto data = make_kernel_data(lat);
  const auto mesh = integrate_immersion(data.U, data.psi);
  std::ostringstream os;
  write_obj(mesh, os);
  const std::string s = os.str();
  size_t nv = 0, nf = 0;
  for (size_t pos = 0; (pos = s.find("\nv ", pos)) != std::string::npos; ++pos) ++nv;
  if (s.rfind("v ", 0) == 0) ++nv;
  for (size_t pos = 0; (pos = s.find("\nf ", pos)) != std::string::npos; ++pos) ++nf;
  const int G = mesh.grid;
  CHECK(nv == static_cast<size_t>((G + 1) * (G + 1)));
  CHECK(nf == static_cast<size_t>(G * G));
}

TEST_CASE("r3 encode/decode roundtrip") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss;
  for (int t = 0; t < 10; ++t) {
    const Eigen::Vector3d x(gauss(rng), gauss(rng), gauss(rng));
    CHECK((decode_r3(encode_r3(x)) - x).norm() < 1e-14);
  }
}
