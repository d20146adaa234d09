#pragma once

#include <json.hpp>
#include <string>

#include "bloch/field.hpp"

namespace bloch {

using Json = nlohmann::json;

// Throws ConfigError when j contains a key outside `allowed`.
void check_keys(const Json& j, std::initializer_list<const char*> allowed,
                const std::string& where);

struct LatticeConfig {
  int dim = 1;
  double period = 1.0;
  Complex e1{1.0, 0.0};
  Complex e2{0.0, 1.0};
  int nmax = 8;
  int grid_size = 64;

  TorusLattice make() const;
};

struct PotentialConfig {
  enum class Kind { Zero, Constant, Mathieu, Cos2d, Fourier };
  Kind kind = Kind::Zero;
  Complex c{0.0, 0.0};
  double a = 0.0;
  double b = 0.0;
  // explicit coefficients: (n1, n2, value)
  std::vector<std::tuple<int, int, Complex>> coeffs;

  PeriodicScalarField make(const TorusLattice& lat) const;
};

struct RunConfig {
  std::string task;
  LatticeConfig lattice;
  PotentialConfig potential;
  Json task_block;    // the task-specific options, validated by the runner
  Json verify_block;  // options for the verify suite
  std::string output_dir = "out";
  int threads = 0;       // 0: resolve from environment/hardware
  unsigned seed = 12345;
};

RunConfig parse_config_json(const Json& j);
RunConfig parse_config_file(const std::string& path);

}  // namespace bloch
