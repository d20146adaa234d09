#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace bloch {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Error taxonomy mirrored by the CLI exit codes: config -> 2, numerical -> 3, io -> 4.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace bloch
