#ifndef DISSIPAIR_TYPES_HPP
#define DISSIPAIR_TYPES_HPP

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace dissipair {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr cplx kI{0.0, 1.0};

// Error categories double as CLI exit-code classes (see tools/dissipair.cpp).
enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  Domain,
  Unstable,
  NonUnique,
  NotChiral,
  Numerical,
  Config,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

const char* to_string(ErrorCode code);

// Emits a diagnostic on stderr; stdout is reserved for command output.
void warn(const std::string& message);

}  // namespace dissipair

#endif  // DISSIPAIR_TYPES_HPP
