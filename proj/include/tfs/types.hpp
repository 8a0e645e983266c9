#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tfs {

inline constexpr const char* kVersion = "tfs/0.1.0";

using Real  = double;
using Index = Eigen::Index;
using Vec   = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
using Mat   = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
using VecI  = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

/// Invalid configuration, malformed input, or infeasible demands. CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A reference computation failed to converge. CLI exit code 3.
class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A cached reference solution does not match the requested setting. CLI exit code 4.
class ReferenceMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Compensated (Kahan) accumulator. Long running sums keep ~full double
/// precision even over 1e7+ terms.
class KahanSum {
 public:
  void add(Real x) {
    const Real y = x - comp_;
    const Real t = sum_ + y;
    comp_ = (t - sum_) - y;
    sum_ = t;
  }
  Real value() const { return sum_; }
  void reset() { sum_ = 0; comp_ = 0; }

 private:
  Real sum_ = 0;
  Real comp_ = 0;
};

}  // namespace tfs
