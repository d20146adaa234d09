#pragma once

#include <optional>
#include <ostream>
#include <vector>

#include "bloch/config.hpp"

namespace bloch {

inline constexpr int kConventionsVersion = 1;

struct CliOverrides {
  std::optional<std::string> output;
  std::optional<int> threads;
  std::optional<unsigned> seed;
};

// Executes the configured task and writes its artifacts atomically under the
// output directory.  Returns the process exit code (0 ok, 3 numerical failure).
int run_task(RunConfig cfg, const CliOverrides& overrides, std::ostream& log);

struct VerifyCheck {
  std::string name;
  bool pass = false;
  double deviation = 0.0;
  double tolerance = 0.0;
  std::string note;
};

// The invariant suite for the configured lattice/potential: gauge invariance,
// two-route assembly, flux periodicity, determinant-vs-spectrum cross
// validation, Willmore two-route identity, and nmax-doubling convergence.
std::vector<VerifyCheck> run_verify_suite(const RunConfig& cfg, int threads,
                                          unsigned seed);

int verify_task(RunConfig cfg, const CliOverrides& overrides,
                std::ostream& log);

}  // namespace bloch
