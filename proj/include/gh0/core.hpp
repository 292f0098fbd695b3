#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace gh0 {

using Index = Eigen::Index;

/// A point of an ambient phase space: up to two coordinates in [0, 1).
using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 2, 1>;

/// Point sets are stored column-wise, one point per column.
using PointSet = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>;

/// Additive slack used when checking the triangle inequality and the
/// non-strict distortion bound of the augmented metric.
inline constexpr double kMetricTolerance = 1e-12;

/// Round-trip tolerance of the homeomorphism check on samples.
inline constexpr double kInverseTolerance = 1e-12;

// Error taxonomy. The CLI maps each family onto an exit code.

/// Caller violated a precondition (bad argument, mismatched spaces).
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Input data is malformed (unparsable file, inconsistent document).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An exact solver refused because the instance exceeds its budget.
struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An orbit search hit its iteration cap without reaching its target.
struct NoRecurrence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Some sample point is not within 2*alpha of any orbit-block point.
struct CoverageGap : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A measured inequality of the approximation certificate does not hold.
struct CertificationFailure : std::runtime_error {
  CertificationFailure(std::string check, const std::string& what)
      : std::runtime_error(what), check_name(std::move(check)) {}
  std::string check_name;
};

/// Counter-based generator: the k-th draw of stream `seed` is a pure
/// function of (seed, k).
inline std::uint64_t splitmix64(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t z = seed + (counter + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Uniform double in [0, 1) from the (seed, counter) stream.
inline double uniform01(std::uint64_t seed, std::uint64_t counter) {
  return static_cast<double>(splitmix64(seed, counter) >> 11) * 0x1.0p-53;
}

/// Reduce a coordinate into [0, 1).
inline double wrap_unit(double x) {
  double r = x - std::floor(x);
  return r >= 1.0 ? 0.0 : r;
}

}  // namespace gh0
