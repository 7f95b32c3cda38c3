#ifndef TIKDYN_COMMON_HPP
#define TIKDYN_COMMON_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace tikdyn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Malformed problem, schedule, or experiment descriptions.
class InvalidSpec : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values produced by function evaluation or integration.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Projection requested onto an empty or unknown minimizer set.
class UnsupportedSet : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Too few usable data points for an estimate.
class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operation requires a strongly convex function.
class NotStronglyConvex : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace tikdyn

#endif
