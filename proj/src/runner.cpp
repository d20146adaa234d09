#include "bloch/runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "bloch/dirac.hpp"
#include "bloch/parallel.hpp"
#include "bloch/schrodinger.hpp"
#include "bloch/weierstrass.hpp"

namespace bloch {

namespace fs = std::filesystem;

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void atomic_write(const fs::path& dir, const std::string& name,
                  const std::string& content) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string());
  const fs::path tmp = dir / (".tmp-" + name);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string());
    out << content;
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  fs::rename(tmp, dir / name, ec);
  if (ec) throw IoError("cannot finalize artifact " + name);
}

Json complex_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Json null_json() { return Json(); }

double spectral_tolerance(const FluxVector& kappa) {
  double mx = 0.0;
  for (int m = 0; m < kappa.dim(); ++m)
    mx = std::max(mx, std::abs(kappa[m]));
  return mx > 10.0 ? 1e-7 : 1e-9;
}

FluxVector flux_from_json(const Json& v, int dim, const std::string& where) {
  if (!v.is_array() || static_cast<int>(v.size()) < dim)
    throw ConfigError(where + ": expected an array of " + std::to_string(dim) +
                      " numbers");
  const auto comp = [&](int i) -> Complex {
    if (v[i].is_number()) return Complex(v[i].get<double>(), 0.0);
    if (v[i].is_array() && v[i].size() == 2)
      return Complex(v[i][0].get<double>(), v[i][1].get<double>());
    throw ConfigError(where + ": entries must be numbers or [re, im]");
  };
  return dim == 1 ? FluxVector::of(comp(0)) : FluxVector::of(comp(0), comp(1));
}

struct Summary {
  Json j;

  explicit Summary(const RunConfig& cfg, const TorusLattice& lat) {
    j["task"] = cfg.task;
    j["conventions_version"] = kConventionsVersion;
    j["epsilon"] = kDeterminantEpsilon;
    j["nmax"] = lat.nmax();
    j["grid_size"] = lat.grid_size();
    j["c0_fitted"] = null_json();
    j["c0_integral"] = null_json();
    j["willmore_direct"] = null_json();
    j["willmore_geometric"] = null_json();
    j["periods"] = null_json();
    j["tolerances"] = Json::object();
    j["failures"] = Json::array();
  }

  void tol(const std::string& k, Json v) { j["tolerances"][k] = std::move(v); }
  void fail(const std::string& msg) { j["failures"].push_back(msg); }
  std::string str() const { return j.dump(2) + "\n"; }
};

// ---------------------------------------------------------------------------
// task: dispersion

int task_dispersion(const RunConfig& cfg, const TorusLattice& lat,
                    const PeriodicScalarField& U, int threads,
                    const fs::path& out, Summary& summary, std::ostream& log) {
  check_keys(cfg.task_block,
             {"kappa_start", "kappa_stop", "samples", "bands", "endpoint"},
             "dispersion");
  const Json& tb = cfg.task_block;
  const int samples = tb.contains("samples") ? tb["samples"].get<int>() : 64;
  const int bands = tb.contains("bands") ? tb["bands"].get<int>() : 8;
  if (samples < 1) throw ConfigError("dispersion.samples must be >= 1");
  const bool endpoint = tb.contains("endpoint") && tb["endpoint"].get<bool>();
  FluxVector start = lat.dim() == 1 ? FluxVector::of(0.0) : FluxVector::of(0.0, 0.0);
  FluxVector stop = lat.dim() == 1 ? FluxVector::of(kTwoPi) : FluxVector::of(kTwoPi, 0.0);
  if (tb.contains("kappa_start"))
    start = flux_from_json(tb["kappa_start"], lat.dim(), "dispersion.kappa_start");
  if (tb.contains("kappa_stop"))
    stop = flux_from_json(tb["kappa_stop"], lat.dim(), "dispersion.kappa_stop");
  std::vector<FluxVector> grid;
  for (int i = 0; i < samples; ++i) {
    const double t =
        samples == 1 ? 0.0
                     : static_cast<double>(i) / (endpoint ? samples - 1 : samples);
    FluxVector k = start;
    for (int m = 0; m < lat.dim(); ++m)
      k[m] = start[m] + t * (stop[m] - start[m]);
    grid.push_back(k);
  }
  const auto prob = SchrodingerProblem::standard(lat, U);
  const auto rows = dispersion_sweep(prob, grid, bands, threads);
  std::ostringstream csv;
  csv << "kappa_1,kappa_2,band,energy\n";
  for (const auto& r : rows)
    csv << fmt(r.kappa[0].real()) << ','
        << fmt(lat.dim() == 2 ? r.kappa[1].real() : 0.0) << ',' << r.band << ','
        << fmt(r.energy) << '\n';
  atomic_write(out, "dispersion.csv", csv.str());
  summary.tol("spectral", spectral_tolerance(stop));
  log << "dispersion: wrote " << rows.size() << " rows\n";
  return 0;
}

// ---------------------------------------------------------------------------
// task: gauge-check

int task_gauge_check(const RunConfig& cfg, const TorusLattice& lat,
                     const PeriodicScalarField& U, const fs::path& out,
                     Summary& summary, std::ostream& log) {
  check_keys(cfg.task_block, {"kappa", "phi_amplitude", "levels"}, "gauge-check");
  const Json& tb = cfg.task_block;
  FluxVector kappa = lat.dim() == 1 ? FluxVector::of(1.0) : FluxVector::of(1.0, 0.4);
  if (tb.contains("kappa"))
    kappa = flux_from_json(tb["kappa"], lat.dim(), "gauge-check.kappa");
  const double amp =
      tb.contains("phi_amplitude") ? tb["phi_amplitude"].get<double>() : 0.3;
  const int levels = tb.contains("levels") ? tb["levels"].get<int>() : 10;
  // phi = amp * sin(2 pi s) = amp * (cos shifted); build via coefficients.
  VectorXcd c = VectorXcd::Zero(lat.mode_count());
  c[lat.mode_index(1, 0)] = Complex(0.0, -0.5 * amp);
  c[lat.mode_index(-1, 0)] = Complex(0.0, 0.5 * amp);
  const auto phi = PeriodicScalarField::from_coeffs(lat, c);
  const auto prob = SchrodingerProblem::standard(lat, U);
  const double dev = gauge_check(prob, kappa, phi, levels);
  const double tol = spectral_tolerance(kappa);
  summary.tol("spectral", tol);
  summary.j["tolerances"]["gauge_deviation"] = dev;
  if (!(dev <= tol)) summary.fail("gauge deviation above tolerance");
  log << "gauge-check: deviation " << dev << " (tol " << tol << ")\n";
  return dev <= tol ? 0 : 3;
}

// ---------------------------------------------------------------------------
// task: bloch-slice

int task_bloch_slice(const RunConfig& cfg, const TorusLattice& lat,
                     const PeriodicScalarField& U, const fs::path& out,
                     Summary& summary, std::ostream& log) {
  check_keys(cfg.task_block, {"kappa", "e_min", "e_max", "samples"},
             "bloch-slice");
  const Json& tb = cfg.task_block;
  FluxVector kappa = lat.dim() == 1 ? FluxVector::of(0.0) : FluxVector::of(0.0, 0.0);
  if (tb.contains("kappa"))
    kappa = flux_from_json(tb["kappa"], lat.dim(), "bloch-slice.kappa");
  const double e_min = tb.contains("e_min") ? tb["e_min"].get<double>() : -5.0;
  const double e_max = tb.contains("e_max") ? tb["e_max"].get<double>() : 50.0;
  const int samples = tb.contains("samples") ? tb["samples"].get<int>() : 400;
  const auto prob = SchrodingerProblem::standard(lat, U);
  const auto slice = bloch_variety_slice(prob, kappa, e_min, e_max, samples);
  std::ostringstream csv;
  csv << "energy,det_log10,det_phase\n";
  for (const auto& s : slice.samples)
    csv << fmt(s.energy) << ',' << fmt(s.det.log_magnitude / std::log(10.0))
        << ',' << fmt(s.det.phase) << '\n';
  atomic_write(out, "slice.csv", csv.str());
  Json zeros = Json::array();
  for (double z : slice.zeros) zeros.push_back(z);
  summary.j["tolerances"]["zeros"] = zeros;
  summary.tol("spectral", spectral_tolerance(kappa));
  log << "bloch-slice: " << slice.zeros.size() << " determinant zeros\n";
  return 0;
}

// ---------------------------------------------------------------------------
// tasks: dirac-curve / fit-c0

int task_dirac_curve(const RunConfig& cfg, const TorusLattice& lat,
                     const PeriodicScalarField& U, int threads,
                     const fs::path& out, Summary& summary, std::ostream& log) {
  check_keys(cfg.task_block,
             {"branch", "lambda_min", "lambda_max", "steps", "newton_tol",
              "vector", "kernels"},
             cfg.task.c_str());
  const Json& tb = cfg.task_block;
  if (lat.dim() != 2) throw ConfigError(cfg.task + " needs a dim-2 lattice");
  std::vector<int> branches;
  if (tb.contains("branch")) {
    const std::string b = tb["branch"].get<std::string>();
    if (b == "+")
      branches = {+1};
    else if (b == "-")
      branches = {-1};
    else if (b == "both")
      branches = {+1, -1};
    else
      throw ConfigError("branch must be '+', '-' or 'both'");
  } else {
    branches = {+1};
  }
  const double lam_min = tb.contains("lambda_min")
                             ? tb["lambda_min"].get<double>()
                             : default_lambda_min(U);
  const double lam_max =
      tb.contains("lambda_max") ? tb["lambda_max"].get<double>() : 4.0 * lam_min;
  const int steps = tb.contains("steps") ? tb["steps"].get<int>() : 24;
  TraceOptions opts;
  if (tb.contains("newton_tol")) opts.newton_tol = tb["newton_tol"].get<double>();
  opts.want_kernels = !tb.contains("kernels") || tb["kernels"].get<bool>();
  Complex v = lat.e1();
  if (tb.contains("vector")) {
    const auto& vv = tb["vector"];
    if (!vv.is_array() || vv.size() != 2)
      throw ConfigError("vector must be [m, n] for v = m e1 + n e2");
    v = double(vv[0].get<int>()) * lat.e1() + double(vv[1].get<int>()) * lat.e2();
  }

  std::vector<CurveTrace> traces(branches.size());
  parallel_for(static_cast<int>(branches.size()), threads, [&](int i) {
    traces[i] = trace_curve(lat, U, branches[i], lam_min, lam_max, steps, opts);
  });

  std::ostringstream csv;
  csv << "lambda_re,lambda_im,k1_re,k1_im,k2_re,k2_im,det_log10,"
         "mu1_re,mu1_im,mu2_re,mu2_im,branch\n";
  for (size_t i = 0; i < traces.size(); ++i)
    for (const auto& p : traces[i].points) {
      const double det_log10 =
          p.det_residual > 0.0 ? std::log10(p.det_residual) : -340.0;
      csv << fmt(p.lambda.real()) << ',' << fmt(p.lambda.imag()) << ','
          << fmt(p.k[0].real()) << ',' << fmt(p.k[0].imag()) << ','
          << fmt(p.k[1].real()) << ',' << fmt(p.k[1].imag()) << ','
          << fmt(det_log10) << ',' << fmt(p.mu[0].real()) << ','
          << fmt(p.mu[0].imag()) << ',' << fmt(p.mu[1].real()) << ','
          << fmt(p.mu[1].imag()) << ',' << (branches[i] > 0 ? "+" : "-")
          << '\n';
    }
  atomic_write(out, "curve.csv", csv.str());

  int code = 0;
  for (size_t i = 0; i < traces.size(); ++i)
    if (traces[i].truncated) {
      summary.fail("trace truncated on branch " +
                   std::string(branches[i] > 0 ? "+" : "-") + ": " +
                   traces[i].truncation_reason);
      code = 3;
    }
  // Willmore coefficient from the first branch with enough points.
  const double area = lat.area();
  const Complex c0_integral = -integral_square(U) / area;
  summary.j["c0_integral"] = complex_json(c0_integral);
  for (size_t i = 0; i < traces.size(); ++i) {
    if (traces[i].points.size() >= 4) {
      const auto fit = fit_c0(traces[i].points, v);
      summary.j["c0_fitted"] = complex_json(fit.c0);
      summary.j["tolerances"]["fit_residual"] = fit.max_residual;
      break;
    }
  }
  summary.tol("newton", opts.newton_tol);
  summary.tol("lambda_min", lam_min);
  summary.tol("lambda_max", lam_max);
  summary.tol("residual", opts.residual_tol);
  log << cfg.task << ": traced " << traces.size() << " branch(es)\n";
  return code;
}

// ---------------------------------------------------------------------------
// tasks: weierstrass / willmore

int task_weierstrass(const RunConfig& cfg, const TorusLattice& lat,
                     const PeriodicScalarField& U, const fs::path& out,
                     Summary& summary, std::ostream& log) {
  check_keys(cfg.task_block, {"nu", "origin", "closedness_threshold"},
             "weierstrass");
  const Json& tb = cfg.task_block;
  if (lat.dim() != 2) throw ConfigError("weierstrass needs a dim-2 lattice");
  int nu1 = 1, nu2 = 1;
  if (tb.contains("nu")) {
    nu1 = tb["nu"][0].get<int>() & 1;
    nu2 = tb["nu"][1].get<int>() & 1;
  }
  IntegrationOptions opts;
  if (tb.contains("origin"))
    for (int c = 0; c < 3; ++c) opts.origin[c] = tb["origin"][c].get<double>();
  if (tb.contains("closedness_threshold"))
    opts.closedness_threshold = tb["closedness_threshold"].get<double>();

  const FluxVector kappa = FluxVector::of(kPi * nu1, kPi * nu2);
  const auto kernel = kernel_at_real_multipliers(lat, U, kappa);
  const auto shifted = U - PeriodicScalarField::constant(lat, kernel.energy);
  const auto psi = SpinorField::from_kernel(lat, kappa, kernel.coeffs);
  const auto mesh = integrate_immersion(shifted, psi, opts);
  const auto w = willmore(shifted, &mesh);

  std::ostringstream obj;
  write_obj(mesh, obj);
  atomic_write(out, "mesh.obj", obj.str());

  summary.j["willmore_direct"] = w.direct;
  summary.j["willmore_geometric"] = w.geometric;
  summary.j["periods"] = Json::array(
      {Json::array({mesh.period1[0], mesh.period1[1], mesh.period1[2]}),
       Json::array({mesh.period2[0], mesh.period2[1], mesh.period2[2]})});
  summary.j["tolerances"]["period_spread"] = mesh.period_spread;
  summary.j["tolerances"]["multipliers"] =
      Json::array({complex_json(mesh.mu1), complex_json(mesh.mu2)});
  summary.j["tolerances"]["energy_shift"] = kernel.energy;
  summary.j["tolerances"]["kernel_residual"] = kernel.kernel_residual;
  const auto q = spinor_form(nu1, nu2);
  summary.j["tolerances"]["spinor_form"] =
      Json::array({q.values[0], q.values[1], q.values[2], q.values[3]});
  summary.tol("closedness", opts.closedness_threshold);
  log << "weierstrass: |P1| = " << mesh.period1.norm()
      << ", |P2| = " << mesh.period2.norm() << ", W = " << w.direct << "\n";
  return 0;
}

int task_willmore(const RunConfig& cfg, const TorusLattice& lat,
                  const PeriodicScalarField& U, const fs::path& out,
                  Summary& summary, std::ostream& log) {
  check_keys(cfg.task_block, {}, "willmore");
  if (lat.dim() != 2) throw ConfigError("willmore needs a dim-2 lattice");
  const auto w = willmore(U, nullptr);
  summary.j["willmore_direct"] = w.direct;
  log << "willmore: direct " << w.direct << "\n";
  return 0;
}

}  // namespace

// ---------------------------------------------------------------------------

int run_task(RunConfig cfg, const CliOverrides& overrides, std::ostream& log) {
  if (overrides.output) cfg.output_dir = *overrides.output;
  if (overrides.threads) cfg.threads = *overrides.threads;
  if (overrides.seed) cfg.seed = *overrides.seed;
  const int threads = resolve_threads(cfg.threads);
  const TorusLattice lat = cfg.lattice.make();
  const PeriodicScalarField U = cfg.potential.make(lat);
  const fs::path out(cfg.output_dir);
  Summary summary(cfg, lat);
  summary.tol("seed", cfg.seed);
  summary.tol("threads", threads);

  int code = 0;
  try {
    if (cfg.task == "dispersion")
      code = task_dispersion(cfg, lat, U, threads, out, summary, log);
    else if (cfg.task == "gauge-check")
      code = task_gauge_check(cfg, lat, U, out, summary, log);
    else if (cfg.task == "bloch-slice")
      code = task_bloch_slice(cfg, lat, U, out, summary, log);
    else if (cfg.task == "dirac-curve" || cfg.task == "fit-c0")
      code = task_dirac_curve(cfg, lat, U, threads, out, summary, log);
    else if (cfg.task == "weierstrass")
      code = task_weierstrass(cfg, lat, U, out, summary, log);
    else if (cfg.task == "willmore")
      code = task_willmore(cfg, lat, U, out, summary, log);
    else
      throw ConfigError("unknown task " + cfg.task);
  } catch (const NumericalError& e) {
    summary.fail(e.what());
    atomic_write(out, "summary.json", summary.str());
    log << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  atomic_write(out, "summary.json", summary.str());
  return code;
}

// ---------------------------------------------------------------------------
// verify suite

namespace {

PeriodicScalarField random_real_field(const TorusLattice& lat,
                                      std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  VectorXcd c = VectorXcd::Zero(lat.mode_count());
  for (int i = 0; i < lat.mode_count(); ++i) {
    const auto n = lat.mode_of(i);
    if (n[0] < 0 || (n[0] == 0 && n[1] < 0)) continue;
    const double decay = 1.0 / (1.0 + n[0] * n[0] + n[1] * n[1]);
    if (n[0] == 0 && n[1] == 0) {
      c[i] = scale * gauss(rng) * decay;
    } else {
      const Complex v(gauss(rng), gauss(rng));
      c[i] = scale * decay * v;
      c[lat.mode_index(-n[0], -n[1])] = std::conj(c[i]);
    }
  }
  return PeriodicScalarField::from_coeffs(lat, c);
}

int next_pow2(int n) {
  int p = 1;
  while (p < n) p *= 2;
  return p;
}

TorusLattice refined_lattice(const TorusLattice& lat, int nmax) {
  const int grid = std::max(lat.grid_size(), next_pow2(4 * nmax + 2));
  if (lat.dim() == 1) return TorusLattice::make_1d(lat.period(), nmax, grid);
  return TorusLattice::make_2d(lat.e1(), lat.e2(), nmax, grid);
}

PeriodicScalarField refit_field(const PeriodicScalarField& f,
                                const TorusLattice& to) {
  VectorXcd c = VectorXcd::Zero(to.mode_count());
  const TorusLattice& from = f.lattice();
  for (int i = 0; i < from.mode_count(); ++i) {
    const auto n = from.mode_of(i);
    if (to.mode_in_range(n[0], n[1])) c[to.mode_index(n[0], n[1])] = f.coeffs()[i];
  }
  return PeriodicScalarField::from_coeffs(to, c);
}

}  // namespace

std::vector<VerifyCheck> run_verify_suite(const RunConfig& cfg, int threads,
                                          unsigned seed) {
  if (!cfg.verify_block.is_null())
    check_keys(cfg.verify_block, {"draws", "bands"}, "verify");
  const int draws =
      cfg.verify_block.contains("draws") ? cfg.verify_block["draws"].get<int>() : 3;
  const int bands =
      cfg.verify_block.contains("bands") ? cfg.verify_block["bands"].get<int>() : 5;
  const TorusLattice lat = cfg.lattice.make();
  const PeriodicScalarField U = cfg.potential.make(lat);
  std::mt19937_64 rng(seed);
  std::vector<VerifyCheck> checks;
  const auto push = [&](const std::string& name, double dev, double tol,
                        const std::string& note = "") {
    checks.push_back({name, dev <= tol, dev, tol, note});
  };

  // Fourier round trip on a random sample vector.
  {
    std::normal_distribution<double> gauss(0.0, 1.0);
    VectorXcd s(lat.grid_count());
    for (int i = 0; i < s.size(); ++i) s[i] = gauss(rng);
    const auto f = PeriodicScalarField::from_samples(lat, s);
    push("fourier-roundtrip", (f.to_samples() - s).cwiseAbs().maxCoeff(), 1e-12);
  }

  // One-form periods with an exact part attached.
  {
    const auto phi = random_real_field(lat, rng, 0.5);
    double dev = 0.0;
    for (int m = 0; m < lat.dim(); ++m) {
      HarmonicOneForm form{lat.dual(m), phi};
      for (int g = 0; g < lat.dim(); ++g) {
        const Complex p = form_period(lat, form, g);
        dev = std::max(dev, std::abs(p - Complex(m == g ? 1.0 : 0.0, 0.0)));
      }
    }
    push("form-periods", dev, 1e-10);
  }

  // Floquet condition of the Bloch lift.
  {
    const auto phi = random_real_field(lat, rng, 1.0);
    const FluxVector k = lat.dim() == 1 ? FluxVector::of(kPi / 3.0)
                                        : FluxVector::of(kPi / 3.0, -0.7);
    push("lift-floquet", floquet_defect(lift_bloch(lat, k, phi, 2, 2)), 1e-12);
  }

  const auto prob = SchrodingerProblem::standard(lat, U);
  const FluxVector probe =
      lat.dim() == 1 ? FluxVector::of(1.0) : FluxVector::of(1.0, 0.4);

  // Gauge invariance under omega -> omega + d(phi).
  {
    VectorXcd c = VectorXcd::Zero(lat.mode_count());
    c[lat.mode_index(1, 0)] = Complex(0.0, -0.15);
    c[lat.mode_index(-1, 0)] = Complex(0.0, 0.15);
    const auto phi = PeriodicScalarField::from_coeffs(lat, c);
    push("gauge-invariance", gauge_check(prob, probe, phi, 10),
         spectral_tolerance(probe));
  }

  // Two-route assembly equality over random draws.
  {
    std::uniform_real_distribution<double> uni(-kPi, kPi);
    double dev = 0.0;
    for (int d = 0; d < draws; ++d) {
      const auto Ur = random_real_field(lat, rng, 1.0);
      FluxVector k = lat.dim() == 1 ? FluxVector::of(uni(rng))
                                    : FluxVector::of(uni(rng), uni(rng));
      if (d == draws - 1) k[0] += Complex(0.0, 0.1);  // complex flux leg
      dev = std::max(dev, two_route_assembly_check(lat, Ur, k));
    }
    push("two-route-assembly", dev, 1e-13);
  }

  // Flux periodicity of the spectrum.
  {
    double dev = 0.0;
    std::uniform_real_distribution<double> uni(-kPi, kPi);
    for (int d = 0; d < draws; ++d) {
      FluxVector k = lat.dim() == 1 ? FluxVector::of(uni(rng))
                                    : FluxVector::of(uni(rng), uni(rng));
      const VectorXd base =
          assemble_schrodinger(prob, k).spectrum(false).lowest(8);
      for (int m = 0; m < lat.dim(); ++m) {
        const VectorXd shifted = assemble_schrodinger(prob, k.shifted(m, kTwoPi))
                                     .spectrum(false)
                                     .lowest(8);
        dev = std::max(dev, (base - shifted).cwiseAbs().maxCoeff());
      }
    }
    push("flux-periodicity", dev, 1e-9);
  }

  // Determinant zeros against the Hermitian spectrum.
  {
    const auto spec = assemble_schrodinger(prob, probe).spectrum(false);
    const int count = std::min<int>(3, spec.eigenvalues.size());
    const double e_lo = spec.eigenvalues[0] - 1.0;
    const double e_hi = spec.eigenvalues[count - 1] + 0.5;
    const auto slice = bloch_variety_slice(prob, probe, e_lo, e_hi,
                                           lat.dim() == 1 ? 240 : 120);
    double dev = 0.0;
    for (int i = 0; i < count; ++i) {
      double best = 1e9;
      for (double z : slice.zeros) best = std::min(best, std::abs(z - spec.eigenvalues[i]));
      dev = std::max(dev, best);
    }
    push("determinant-vs-spectrum", dev, 1e-9);
  }

  // Willmore two-route identity on an integrated mesh (dim 2, real U).
  if (lat.dim() == 2 && U.reality_defect() <= 1e-12) {
    try {
      const FluxVector kpp = FluxVector::of(kPi, kPi);
      const auto kernel = kernel_at_real_multipliers(lat, U, kpp);
      const auto shifted = U - PeriodicScalarField::constant(lat, kernel.energy);
      const auto psi = SpinorField::from_kernel(lat, kpp, kernel.coeffs);
      const auto mesh = integrate_immersion(shifted, psi);
      const auto w = willmore(shifted, &mesh);
      const double rel =
          std::abs(w.direct - w.geometric) / std::max(w.direct, 1e-30);
      push("willmore-two-route", rel, 1e-10);
    } catch (const NumericalError& e) {
      checks.push_back({"willmore-two-route", false, 1.0, 1e-10, e.what()});
    }
  }

  // Convergence discipline: lowest bands must be stable under nmax doubling.
  {
    const TorusLattice fine = refined_lattice(lat, 2 * lat.nmax());
    const auto Uf = refit_field(U, fine);
    const auto pf = SchrodingerProblem::standard(fine, Uf);
    const VectorXd a = assemble_schrodinger(prob, probe).spectrum(false).lowest(bands);
    const VectorXd b = assemble_schrodinger(pf, probe).spectrum(false).lowest(bands);
    push("convergence-bands", (a - b).cwiseAbs().maxCoeff(), 1e-7,
         "nmax " + std::to_string(lat.nmax()) + " vs " +
             std::to_string(2 * lat.nmax()));
  }
  if (lat.dim() == 2 && (cfg.task == "dirac-curve" || cfg.task == "fit-c0")) {
    try {
      const double lmin = default_lambda_min(U);
      TraceOptions opts;
      opts.want_kernels = false;
      const auto t1 = trace_curve(lat, U, +1, lmin, 1.5 * lmin, 2, opts);
      const TorusLattice fine = refined_lattice(lat, 2 * lat.nmax());
      const auto t2 =
          trace_curve(fine, refit_field(U, fine), +1, lmin, 1.5 * lmin, 2, opts);
      double dev = 0.0;
      for (size_t i = 0; i < t1.points.size() && i < t2.points.size(); ++i)
        dev = std::max(dev, (t1.points[i].k - t2.points[i].k).norm());
      if (t1.truncated || t2.truncated)
        checks.push_back({"convergence-curve", false, 1.0, 1e-7, "trace truncated"});
      else
        push("convergence-curve", dev, 1e-7);
    } catch (const NumericalError& e) {
      checks.push_back({"convergence-curve", false, 1.0, 1e-7, e.what()});
    }
  }
  return checks;
}

int verify_task(RunConfig cfg, const CliOverrides& overrides,
                std::ostream& log) {
  if (overrides.output) cfg.output_dir = *overrides.output;
  if (overrides.threads) cfg.threads = *overrides.threads;
  if (overrides.seed) cfg.seed = *overrides.seed;
  const int threads = resolve_threads(cfg.threads);
  const auto checks = run_verify_suite(cfg, threads, cfg.seed);
  Json report = Json::array();
  int failures = 0;
  for (const auto& c : checks) {
    log << (c.pass ? "PASS" : "FAIL") << ' ' << c.name << " deviation="
        << c.deviation << " tol=" << c.tolerance;
    if (!c.note.empty()) log << " (" << c.note << ")";
    log << '\n';
    if (!c.pass) ++failures;
    Json e;
    e["name"] = c.name;
    e["pass"] = c.pass;
    e["deviation"] = c.deviation;
    e["tolerance"] = c.tolerance;
    e["note"] = c.note;
    report.push_back(e);
  }
  Json top;
  top["task"] = "verify";
  top["conventions_version"] = kConventionsVersion;
  top["epsilon"] = kDeterminantEpsilon;
  top["nmax"] = cfg.lattice.nmax;
  top["grid_size"] = cfg.lattice.grid_size;
  top["seed"] = cfg.seed;
  top["checks"] = report;
  top["failures"] = failures;
  atomic_write(fs::path(cfg.output_dir), "verify_report.json", top.dump(2) + "\n");
  log << (failures == 0 ? "verify: all checks passed\n"
                        : "verify: " + std::to_string(failures) + " check(s) failed\n");
  return failures == 0 ? 0 : 3;
}

}  // namespace bloch
