#include "bloch/weierstrass.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace bloch {

namespace {

std::array<int, 2> nu_of_flux(const FluxVector& kappa) {
  std::array<int, 2> nu{0, 0};
  for (int m = 0; m < 2; ++m) {
    if (kappa.dim() < 2 || kappa[m].imag() != 0.0)
      throw ConfigError("spinor field: flux must be real");
    const double r = kappa[m].real() / kPi;
    const long n = std::lround(r);
    if (std::abs(r - n) > 1e-12)
      throw ConfigError("spinor field: multipliers must be +-1 (kappa in pi*Z)");
    nu[m] = static_cast<int>(((n % 2) + 2) % 2);
  }
  return nu;
}

// Bloch phase of the stored (reduced) flux at a grid node.
Complex bloch_phase(const FluxVector& kappa, int p, int q, int G) {
  return std::exp(Complex(0.0, 1.0) *
                  ((kappa[0].real() * p + kappa[1].real() * q) / G));
}

// Signed frequency of a DFT bin.
int signed_freq(int b, int G) { return b <= G / 2 ? b : b - G; }

// Synthesize mode-set coefficients on a G x G grid (G >= lattice grid).
MatrixXcd synth_grid(const TorusLattice& lat, const VectorXcd& coeffs, int G) {
  const TorusLattice fine =
      G == lat.grid_size()
          ? lat
          : TorusLattice::make_2d(lat.e1(), lat.e2(), lat.nmax(), G);
  VectorXcd bins = VectorXcd::Zero(fine.grid_count());
  for (int i = 0; i < lat.mode_count(); ++i) {
    const auto n = lat.mode_of(i);
    const int b1 = ((n[0] % G) + G) % G;
    const int b2 = ((n[1] % G) + G) % G;
    bins[b1 * G + b2] = coeffs[i];
  }
  const VectorXcd samples = bins_to_grid(fine, bins);
  MatrixXcd out(G, G);
  for (int p = 0; p < G; ++p)
    for (int q = 0; q < G; ++q) out(p, q) = samples[p * G + q];
  return out;
}

MatrixXcd apply_bloch_phase(MatrixXcd grid, const FluxVector& kappa) {
  const int G = static_cast<int>(grid.rows());
  for (int p = 0; p < G; ++p)
    for (int q = 0; q < G; ++q) grid(p, q) *= bloch_phase(kappa, p, q, G);
  return grid;
}

}  // namespace

SpinorField::SpinorField(TorusLattice lat, FluxVector kappa, VectorXcd phi1,
                         VectorXcd phi2)
    : lat_(std::move(lat)),
      kappa_(kappa),
      phi1_(std::move(phi1)),
      phi2_(std::move(phi2)) {
  if (lat_.dim() != 2) throw ConfigError("spinor field: needs a dim-2 lattice");
  if (phi1_.size() != lat_.mode_count() || phi2_.size() != lat_.mode_count())
    throw ConfigError("spinor field: wrong coefficient count");
  nu_ = nu_of_flux(kappa_);
  // Store the flux in the reduced cell used by the operator assembly, so the
  // coefficient/wavevector pairing matches assembled kernel vectors.
  kappa_ = reduce_flux(kappa_).reduced;
}

SpinorField SpinorField::from_kernel(const TorusLattice& lat,
                                     const FluxVector& kappa,
                                     const VectorXcd& kernel) {
  const int B = lat.mode_count();
  if (kernel.size() != 2 * B)
    throw ConfigError("spinor field: kernel vector must have 2*modes entries");
  VectorXcd phi1(B), phi2(B);
  for (int i = 0; i < B; ++i) {
    phi1[i] = kernel[2 * i];
    phi2[i] = kernel[2 * i + 1];
  }
  return SpinorField(lat, kappa, std::move(phi1), std::move(phi2));
}

SpinorField SpinorField::from_components(const TorusLattice& lat,
                                         const FluxVector& kappa,
                                         VectorXcd phi1, VectorXcd phi2) {
  return SpinorField(lat, kappa, std::move(phi1), std::move(phi2));
}

MatrixXcd SpinorField::psi1_grid(int G) const {
  return apply_bloch_phase(synth_grid(lat_, phi1_, G), kappa_);
}

MatrixXcd SpinorField::psi2_grid(int G) const {
  return apply_bloch_phase(synth_grid(lat_, phi2_, G), kappa_);
}

double SpinorField::density_periodicity_defect() const {
  // Densities evaluated across a 2x2 lift must close up seam to seam.
  const int G = lat_.grid_size();
  const auto f1 = PeriodicScalarField::from_coeffs(lat_, phi1_);
  const auto f2 = PeriodicScalarField::from_coeffs(lat_, phi2_);
  const BlochLift l1 = lift_bloch(lat_, kappa_, f1, 2, 2);
  const BlochLift l2 = lift_bloch(lat_, kappa_, f2, 2, 2);
  double defect = 0.0;
  const auto densities = [](Complex a, Complex b) {
    return std::array<Complex, 3>{a * a, std::conj(b) * std::conj(b),
                                  a * std::conj(b)};
  };
  for (int p = 0; p < G; ++p)
    for (int q = 0; q < G; ++q) {
      const auto base = densities(l1.at(p, q), l2.at(p, q));
      for (const auto& [dp, dq] : {std::pair{G, 0}, std::pair{0, G}}) {
        const auto shifted =
            densities(l1.at(p + dp, q + dq), l2.at(p + dp, q + dq));
        for (int c = 0; c < 3; ++c)
          defect = std::max(defect, std::abs(shifted[c] - base[c]));
      }
    }
  return defect;
}

SpinorField SpinorField::rotated(Complex alpha, Complex beta) const {
  const int B = lat_.mode_count();
  VectorXcd r1 = alpha * phi1_;
  VectorXcd r2 = alpha * phi2_;
  // J psi = (-conj psi2, conj psi1): with psi = e^{i kappa.(s,t)} phi, the
  // conjugate carries e^{-2 i kappa.(s,t)}, an integer mode shift m = -kappa/pi
  // for +-1 multipliers, so (J psi)_j[k] = +-conj(phi[m - k]).
  const int m1 = static_cast<int>(std::lround(-kappa_[0].real() / kPi));
  const int m2 = static_cast<int>(std::lround(-kappa_[1].real() / kPi));
  for (int i = 0; i < B; ++i) {
    const auto n = lat_.mode_of(i);
    if (!lat_.mode_in_range(m1 - n[0], m2 - n[1])) continue;
    const int src = lat_.mode_index(m1 - n[0], m2 - n[1]);
    r1[i] -= beta * std::conj(phi2_[src]);
    r2[i] += beta * std::conj(phi1_[src]);
  }
  return SpinorField(lat_, kappa_, std::move(r1), std::move(r2));
}

namespace {

struct DensityGrids {
  // Integrand matrices M1 (dz side) and M2 = M1^dagger (dzbar side), entrywise.
  MatrixXcd m11, m12, m21, m22;  // M1 entries
  int G = 0;
};

DensityGrids density_grids(const SpinorField& psi) {
  const int G = psi.lattice().grid_size();
  const MatrixXcd p1 = psi.psi1_grid(G);
  const MatrixXcd p2 = psi.psi2_grid(G);
  DensityGrids d;
  d.G = G;
  d.m11 = p1.cwiseProduct(p2.conjugate());
  d.m12 = -(p2.conjugate().cwiseProduct(p2.conjugate()));
  d.m21 = p1.cwiseProduct(p1);
  d.m22 = -d.m11;
  return d;
}

// Spectral derivative of a strictly periodic grid function.
MatrixXcd grid_derivative(const TorusLattice& lat, const MatrixXcd& f,
                          bool bar) {
  const int G = static_cast<int>(f.rows());
  const TorusLattice fine =
      G == lat.grid_size()
          ? lat
          : TorusLattice::make_2d(lat.e1(), lat.e2(), lat.nmax(), G);
  VectorXcd flat(G * G);
  for (int p = 0; p < G; ++p)
    for (int q = 0; q < G; ++q) flat[p * G + q] = f(p, q);
  VectorXcd bins = grid_to_bins(fine, flat);
  for (int b1 = 0; b1 < G; ++b1)
    for (int b2 = 0; b2 < G; ++b2) {
      const int v1 = signed_freq(b1, G);
      const int v2 = signed_freq(b2, G);
      const Eigen::Vector2d xi =
          kTwoPi * (v1 * fine.dual(0) + v2 * fine.dual(1));
      const Eigen::Vector2cd w(Complex(xi[0], 0.0), Complex(xi[1], 0.0));
      bins[b1 * G + b2] *= bar ? symbol_delbar(w) : symbol_del(w);
    }
  const VectorXcd out = bins_to_grid(fine, bins);
  MatrixXcd res(G, G);
  for (int p = 0; p < G; ++p)
    for (int q = 0; q < G; ++q) res(p, q) = out[p * G + q];
  return res;
}

}  // namespace

double dirac_residual(const PeriodicScalarField& U, const SpinorField& psi) {
  const TorusLattice& lat = psi.lattice();
  if (U.lattice() != lat) throw ConfigError("dirac_residual: lattice mismatch");
  const int G = lat.grid_size();
  const int B = lat.mode_count();
  // del psi2 and delbar psi1 through the shifted symbols on the periodic parts.
  Eigen::Vector2cd shift = Eigen::Vector2cd::Zero();
  for (int m = 0; m < 2; ++m) {
    shift[0] += psi.flux()[m] * lat.dual(m)[0];
    shift[1] += psi.flux()[m] * lat.dual(m)[1];
  }
  VectorXcd d2(B), d1(B);
  for (int i = 0; i < B; ++i) {
    const Eigen::Vector2d xi = lat.wavevector(i);
    const Eigen::Vector2cd w(xi[0] + shift[0], xi[1] + shift[1]);
    d2[i] = symbol_del(w) * psi.phi2()[i];
    d1[i] = symbol_delbar(w) * psi.phi1()[i];
  }
  const MatrixXcd del_psi2 = synth_grid(lat, d2, G);
  const MatrixXcd delbar_psi1 = synth_grid(lat, d1, G);
  const MatrixXcd phi1 = synth_grid(lat, psi.phi1(), G);
  const MatrixXcd phi2 = synth_grid(lat, psi.phi2(), G);
  double r = 0.0;
  for (int p = 0; p < G; ++p)
    for (int q = 0; q < G; ++q) {
      const Complex u = U.samples()[lat.grid_index(p, q)];
      r = std::max(r, std::abs(u * phi1(p, q) + del_psi2(p, q)));
      r = std::max(r, std::abs(-delbar_psi1(p, q) + std::conj(u) * phi2(p, q)));
    }
  return r;
}

double closedness_residual(const SpinorField& psi) {
  const TorusLattice& lat = psi.lattice();
  const DensityGrids d = density_grids(psi);
  // M2 = M1^dagger entrywise: f dz + g dzbar closed iff delbar f = del g.
  const MatrixXcd m2_11 = d.m11.conjugate();
  const MatrixXcd m2_12 = d.m21.conjugate();
  const MatrixXcd m2_21 = d.m12.conjugate();
  const MatrixXcd m2_22 = d.m22.conjugate();
  double res = 0.0;
  const auto entry = [&](const MatrixXcd& f, const MatrixXcd& g) {
    const MatrixXcd defect =
        grid_derivative(lat, f, true) - grid_derivative(lat, g, false);
    res = std::max(res, defect.cwiseAbs().maxCoeff());
  };
  entry(d.m11, m2_11);
  entry(d.m12, m2_12);
  entry(d.m21, m2_21);
  entry(d.m22, m2_22);
  return res;
}

Eigen::Matrix2cd encode_r3(const Eigen::Vector3d& x) {
  const Complex I(0.0, 1.0);
  Eigen::Matrix2cd m;
  m(0, 0) = I * x[2];
  m(0, 1) = Complex(-x[0], -x[1]);
  m(1, 0) = Complex(x[0], -x[1]);
  m(1, 1) = -I * x[2];
  return m;
}

Eigen::Vector3d decode_r3(const Eigen::Matrix2cd& m) {
  Eigen::Vector3d x;
  x[0] = 0.5 * (m(1, 0) - m(0, 1)).real();
  x[1] = (Complex(0.0, 0.5) * (m(1, 0) + m(0, 1))).real();
  x[2] = m(0, 0).imag();
  return x;
}

Eigen::Matrix3d rotation_from_su2(Complex alpha, Complex beta) {
  Eigen::Matrix2cd g;
  g(0, 0) = std::conj(alpha);
  g(0, 1) = std::conj(beta);
  g(1, 0) = -beta;
  g(1, 1) = alpha;
  Eigen::Matrix3d R;
  for (int j = 0; j < 3; ++j) {
    Eigen::Vector3d e = Eigen::Vector3d::Zero();
    e[j] = 1.0;
    R.col(j) = decode_r3(g * encode_r3(e) * g.adjoint());
  }
  return R;
}

namespace {

// Exact antiderivative of a band-limited periodic line: values at j/G for
// j = 0..G inclusive.
std::vector<Complex> spectral_antiderivative(const VectorXcd& line) {
  const int G = static_cast<int>(line.size());
  // Direct DFT of one line (G is small; called once per row/column).
  VectorXcd bins = VectorXcd::Zero(G);
  const Complex I(0.0, 1.0);
  for (int b = 0; b < G; ++b) {
    Complex acc(0.0, 0.0);
    for (int j = 0; j < G; ++j)
      acc += line[j] * std::exp(-kTwoPi * I * double(b) * double(j) / double(G));
    bins[b] = acc / double(G);
  }
  std::vector<Complex> F(G + 1);
  for (int j = 0; j <= G; ++j) {
    const double s = double(j) / G;
    Complex acc = bins[0] * s;
    for (int b = 1; b < G; ++b) {
      const int v = signed_freq(b, G);
      const Complex freq(0.0, kTwoPi * v);
      acc += bins[b] * (std::exp(freq * s) - 1.0) / freq;
    }
    F[j] = acc;
  }
  return F;
}

}  // namespace

ImmersionMesh integrate_immersion(const PeriodicScalarField& U,
                                  const SpinorField& psi,
                                  const IntegrationOptions& opts) {
  const TorusLattice& lat = psi.lattice();
  if (U.lattice() != lat)
    throw ConfigError("integrate_immersion: lattice mismatch");
  if (U.reality_defect() > 1e-10)
    throw ConfigError("integrate_immersion: potential must be real");
  const double closed = closedness_residual(psi);
  if (!(closed <= opts.closedness_threshold))
    throw NumericalError("integrate_immersion: closedness residual " +
                         std::to_string(closed) + " above threshold");

  const int G = lat.grid_size();
  const DensityGrids d = density_grids(psi);
  const Complex I(0.0, 1.0);
  // dX along the lattice directions: i(M1 e + M2 conj(e)), decoded to R^3.
  const auto direction_field = [&](Complex e) {
    std::vector<Eigen::Vector3d> out(static_cast<size_t>(G) * G);
    for (int p = 0; p < G; ++p)
      for (int q = 0; q < G; ++q) {
        Eigen::Matrix2cd m1;
        m1 << d.m11(p, q), d.m12(p, q), d.m21(p, q), d.m22(p, q);
        const Eigen::Matrix2cd a = I * (m1 * e + m1.adjoint() * std::conj(e));
        out[static_cast<size_t>(p) * G + q] = decode_r3(a);
      }
    return out;
  };
  const auto ps = direction_field(lat.e1());
  const auto pt = direction_field(lat.e2());

  ImmersionMesh mesh;
  mesh.lattice = lat;
  mesh.grid = G;
  mesh.vertices.assign(static_cast<size_t>(G + 1) * (G + 1),
                       Eigen::Vector3d::Zero());
  const auto mu = psi.multiplier_map();
  mesh.mu1 = mu[0];
  mesh.mu2 = mu[1];

  // Antiderivatives per component and line.
  const auto integrate_axis =
      [&](const std::vector<Eigen::Vector3d>& field, bool along_s, int line)
      -> std::array<std::vector<Complex>, 3> {
    std::array<std::vector<Complex>, 3> F;
    for (int c = 0; c < 3; ++c) {
      VectorXcd samples(G);
      for (int j = 0; j < G; ++j) {
        const int p = along_s ? j : line;
        const int q = along_s ? line : j;
        samples[j] = field[static_cast<size_t>(p) * G + q][c];
      }
      F[c] = spectral_antiderivative(samples);
    }
    return F;
  };

  const int p0 = opts.base_p, q0 = opts.base_q;
  if (p0 < 0 || p0 >= G || q0 < 0 || q0 >= G)
    throw ConfigError("integrate_immersion: base point outside grid");

  if (!opts.column_first) {
    // Row at t-index q0, then columns.
    const auto A = integrate_axis(ps, true, q0);
    for (int p = 0; p <= G; ++p) {
      const auto Bp = integrate_axis(pt, false, p % G);
      for (int q = 0; q <= G; ++q) {
        Eigen::Vector3d x;
        for (int c = 0; c < 3; ++c)
          x[c] = (A[c][p] - A[c][p0]).real() + (Bp[c][q] - Bp[c][q0]).real();
        mesh.vertices[static_cast<size_t>(p) * (G + 1) + q] = opts.origin + x;
      }
    }
  } else {
    const auto Bq = integrate_axis(pt, false, p0);
    for (int q = 0; q <= G; ++q) {
      const auto Aq = integrate_axis(ps, true, q % G);
      for (int p = 0; p <= G; ++p) {
        Eigen::Vector3d x;
        for (int c = 0; c < 3; ++c)
          x[c] = (Bq[c][q] - Bq[c][q0]).real() + (Aq[c][p] - Aq[c][p0]).real();
        mesh.vertices[static_cast<size_t>(p) * (G + 1) + q] = opts.origin + x;
      }
    }
  }

  // Period vectors: means of the direction fields along each axis, checked
  // for constancy across the transverse coordinate.
  Eigen::Vector3d P1 = Eigen::Vector3d::Zero(), P2 = Eigen::Vector3d::Zero();
  double spread = 0.0;
  std::vector<Eigen::Vector3d> p1_lines(G, Eigen::Vector3d::Zero());
  std::vector<Eigen::Vector3d> p2_lines(G, Eigen::Vector3d::Zero());
  for (int l = 0; l < G; ++l) {
    for (int j = 0; j < G; ++j) {
      p1_lines[l] += ps[static_cast<size_t>(j) * G + l] / G;
      p2_lines[l] += pt[static_cast<size_t>(l) * G + j] / G;
    }
    P1 += p1_lines[l] / G;
    P2 += p2_lines[l] / G;
  }
  for (int l = 0; l < G; ++l) {
    spread = std::max(spread, (p1_lines[l] - P1).norm());
    spread = std::max(spread, (p2_lines[l] - P2).norm());
  }
  mesh.period1 = P1;
  mesh.period2 = P2;
  mesh.period_spread = spread;

  // Conformal factor and mean curvature on the closed vertex grid.
  mesh.e2alpha.resize(G + 1, G + 1);
  mesh.mean_curvature.resize(G + 1, G + 1);
  mesh.degenerate.assign(static_cast<size_t>(G + 1) * (G + 1), 0);
  const MatrixXcd psi1 = psi.psi1_grid(G);
  const MatrixXcd psi2 = psi.psi2_grid(G);
  for (int p = 0; p <= G; ++p)
    for (int q = 0; q <= G; ++q) {
      const double ea =
          std::norm(psi1(p % G, q % G)) + std::norm(psi2(p % G, q % G));
      mesh.e2alpha(p, q) = ea * ea;
      const double u = U.samples()[lat.grid_index(p % G, q % G)].real();
      if (ea < opts.degenerate_threshold) {
        mesh.degenerate[static_cast<size_t>(p) * (G + 1) + q] = 1;
        mesh.mean_curvature(p, q) = std::numeric_limits<double>::quiet_NaN();
      } else {
        mesh.mean_curvature(p, q) = 2.0 * u / ea;
      }
    }
  return mesh;
}

WillmoreValues willmore(const PeriodicScalarField& U,
                        const ImmersionMesh* mesh) {
  if (U.reality_defect() > 1e-10)
    throw ConfigError("willmore: potential must be real");
  WillmoreValues w;
  w.direct = 4.0 * integral_abs2(U);
  if (mesh) {
    const int G = mesh->grid;
    double acc = 0.0;
    int count = 0;
    for (int p = 0; p < G; ++p)
      for (int q = 0; q < G; ++q) {
        if (mesh->degenerate[static_cast<size_t>(p) * (G + 1) + q]) continue;
        const double h = mesh->mean_curvature(p, q);
        acc += h * h * mesh->e2alpha(p, q);
        ++count;
      }
    if (count > 0)
      w.geometric = acc / count * mesh->lattice.area();
  }
  return w;
}

void write_obj(const ImmersionMesh& mesh, std::ostream& out) {
  const int G = mesh.grid;
  char buf[128];
  for (int p = 0; p <= G; ++p)
    for (int q = 0; q <= G; ++q) {
      const auto& v = mesh.at(p, q);
      std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", v[0], v[1], v[2]);
      out << buf;
    }
  for (int p = 0; p < G; ++p)
    for (int q = 0; q < G; ++q) {
      const int a = p * (G + 1) + q + 1;
      const int b = (p + 1) * (G + 1) + q + 1;
      const int c = (p + 1) * (G + 1) + q + 2;
      const int d = p * (G + 1) + q + 2;
      std::snprintf(buf, sizeof(buf), "f %d %d %d %d\n", a, b, c, d);
      out << buf;
    }
}

}  // namespace bloch
