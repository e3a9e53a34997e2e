#pragma once

#include <stdexcept>
#include <string>

namespace nullnet {

/// Failure classes surfaced by every module. The C API maps them one-to-one
/// onto `nullnet_status` values.
enum class ErrorCode {
  invalid_argument,
  empty_input,
  degenerate_degree,
  not_converged,
  io,
  parse,
  stage_failure,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised when an iterative solver exhausts its budget. Carries the best
/// residual reached so callers can decide whether it is usable.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best_residual, int iterations)
      : Error(ErrorCode::not_converged, what),
        best_residual_(best_residual),
        iterations_(iterations) {}

  double best_residual() const noexcept { return best_residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double best_residual_;
  int iterations_;
};

}  // namespace nullnet
