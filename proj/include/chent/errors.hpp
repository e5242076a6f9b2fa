#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace chent {

enum class ErrorCode {
  NotHermitian,
  NoConvergence,
  NotPSD,
  DimMismatch,
  NotNormalized,
  NotState,
  BadIndexSet,
  BadArity,
  WeightMismatch,
  NotUnitary,
  NotChannel,
  UnknownName,
  BadParam,
  NotSquare,
  NotPure,
  NotBipartite,
  BadLength,
  ObjectiveFailure,
  UnsupportedMixedOutput,
  MixedOutputUnsupported,
  TooLarge,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception. `code()` identifies the failure class; for
/// ObjectiveFailure the offending parameter vector is attached.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  Error(ErrorCode code, const std::string& what, std::vector<double> theta)
      : Error(code, what) {
    theta_ = std::move(theta);
  }

  ErrorCode code() const noexcept { return code_; }
  const std::vector<double>& theta() const noexcept { return theta_; }

 private:
  ErrorCode code_;
  std::vector<double> theta_;
};

}  // namespace chent
