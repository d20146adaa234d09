#include "bloch/config.hpp"

#include <fstream>
#include <set>

namespace bloch {

void check_keys(const Json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : j.items())
    if (!ok.count(item.key()))
      throw ConfigError(where + ": unknown key '" + item.key() + "'");
}

namespace {

double get_num(const Json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw ConfigError(std::string(key) + " must be a number");
  return j[key].get<double>();
}

int get_int(const Json& j, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer())
    throw ConfigError(std::string(key) + " must be an integer");
  return j[key].get<int>();
}

Complex get_complex_pair(const Json& v, const std::string& where) {
  if (v.is_number()) return Complex(v.get<double>(), 0.0);
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return Complex(v[0].get<double>(), v[1].get<double>());
  throw ConfigError(where + ": expected a number or [re, im]");
}

LatticeConfig parse_lattice(const Json& j) {
  check_keys(j, {"dim", "period", "e1", "e2", "nmax", "grid_size"}, "lattice");
  LatticeConfig lc;
  lc.dim = get_int(j, "dim", 1);
  if (lc.dim != 1 && lc.dim != 2) throw ConfigError("lattice.dim must be 1 or 2");
  lc.period = get_num(j, "period", 1.0);
  if (j.contains("e1")) lc.e1 = get_complex_pair(j["e1"], "lattice.e1");
  if (j.contains("e2")) lc.e2 = get_complex_pair(j["e2"], "lattice.e2");
  lc.nmax = get_int(j, "nmax", 8);
  lc.grid_size = get_int(j, "grid_size", 64);
  return lc;
}

PotentialConfig parse_potential(const Json& j) {
  check_keys(j, {"kind", "c", "a", "b", "coeffs"}, "potential");
  PotentialConfig pc;
  if (!j.contains("kind") || !j["kind"].is_string())
    throw ConfigError("potential.kind is required");
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "zero")
    pc.kind = PotentialConfig::Kind::Zero;
  else if (kind == "constant")
    pc.kind = PotentialConfig::Kind::Constant;
  else if (kind == "mathieu")
    pc.kind = PotentialConfig::Kind::Mathieu;
  else if (kind == "cos2d")
    pc.kind = PotentialConfig::Kind::Cos2d;
  else if (kind == "fourier")
    pc.kind = PotentialConfig::Kind::Fourier;
  else
    throw ConfigError("potential.kind '" + kind + "' is not recognized");
  if (j.contains("c")) pc.c = get_complex_pair(j["c"], "potential.c");
  pc.a = get_num(j, "a", 0.0);
  pc.b = get_num(j, "b", 0.0);
  if (j.contains("coeffs")) {
    if (!j["coeffs"].is_array()) throw ConfigError("potential.coeffs must be a list");
    for (const auto& e : j["coeffs"]) {
      check_keys(e, {"n", "re", "im"}, "potential.coeffs entry");
      if (!e.contains("n") || !e["n"].is_array())
        throw ConfigError("potential.coeffs entry needs a mode index list 'n'");
      const auto& n = e["n"];
      const int n1 = n.size() > 0 ? n[0].get<int>() : 0;
      const int n2 = n.size() > 1 ? n[1].get<int>() : 0;
      pc.coeffs.emplace_back(n1, n2,
                             Complex(get_num(e, "re", 0.0), get_num(e, "im", 0.0)));
    }
  }
  return pc;
}

}  // namespace

TorusLattice LatticeConfig::make() const {
  if (dim == 1) return TorusLattice::make_1d(period, nmax, grid_size);
  return TorusLattice::make_2d(e1, e2, nmax, grid_size);
}

PeriodicScalarField PotentialConfig::make(const TorusLattice& lat) const {
  switch (kind) {
    case Kind::Zero:
      return PeriodicScalarField::zero(lat);
    case Kind::Constant:
      return PeriodicScalarField::constant(lat, c);
    case Kind::Mathieu:
      return PeriodicScalarField::cosine(lat, 0, a);
    case Kind::Cos2d: {
      if (lat.dim() != 2) throw ConfigError("cos2d potential needs a dim-2 lattice");
      auto f = PeriodicScalarField::cosine(lat, 0, a);
      return f + PeriodicScalarField::cosine(lat, 1, b);
    }
    case Kind::Fourier: {
      VectorXcd c0 = VectorXcd::Zero(lat.mode_count());
      for (const auto& [n1, n2, v] : coeffs) {
        if (!lat.mode_in_range(n1, n2))
          throw ConfigError("potential.coeffs mode outside the truncation");
        c0[lat.mode_index(n1, n2)] += v;
      }
      return PeriodicScalarField::from_coeffs(lat, c0);
    }
  }
  throw ConfigError("unreachable potential kind");
}

RunConfig parse_config_json(const Json& j) {
  static const std::set<std::string> kTasks = {
      "dispersion", "gauge-check", "bloch-slice", "dirac-curve",
      "fit-c0",     "weierstrass", "willmore"};
  check_keys(j,
             {"task", "lattice", "potential", "dispersion", "gauge-check",
              "bloch-slice", "dirac-curve", "fit-c0", "weierstrass", "willmore",
              "verify", "output", "threads", "seed"},
             "config");
  RunConfig rc;
  if (!j.contains("task") || !j["task"].is_string())
    throw ConfigError("config.task is required");
  rc.task = j["task"].get<std::string>();
  if (!kTasks.count(rc.task))
    throw ConfigError("unknown task '" + rc.task + "'");
  if (!j.contains("lattice")) throw ConfigError("config.lattice is required");
  rc.lattice = parse_lattice(j["lattice"]);
  if (!j.contains("potential")) throw ConfigError("config.potential is required");
  rc.potential = parse_potential(j["potential"]);
  // Only the block matching the task (plus 'verify') may be present.
  for (const auto& t : kTasks)
    if (t != rc.task && j.contains(t))
      throw ConfigError("config block '" + t + "' does not match task '" +
                        rc.task + "'");
  rc.task_block = j.contains(rc.task) ? j[rc.task] : Json::object();
  rc.verify_block = j.contains("verify") ? j["verify"] : Json::object();
  if (j.contains("output")) {
    if (!j["output"].is_string()) throw ConfigError("config.output must be a string");
    rc.output_dir = j["output"].get<std::string>();
  }
  rc.threads = get_int(j, "threads", 0);
  const int seed = get_int(j, "seed", 12345);
  if (seed < 0) throw ConfigError("config.seed must be non-negative");
  rc.seed = static_cast<unsigned>(seed);
  return rc;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return parse_config_json(j);
}

}  // namespace bloch
