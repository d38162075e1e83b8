#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bukhgeim {

enum class ErrorCode {
  OddGridSize,
  GridTooSmall,
  InvalidArgument,
  NonFiniteSample,
  SupportOutsideGrid,
  SupportAtFrame,
  GridMismatch,
  VanishingConductivity,
  BranchAmbiguity,
  NonDecayingSolution,
  NotContractive,
  MaxIterations,
  ExponentialOverflow,
  NotConverged,
  ContourTooTight,
  SupportNotCovered,
  PartialDataset,
  ConfigError,
  IoError,
  FormatError,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised by the iterative CGO solvers; carries the state reached before giving up.
class SolverError : public Error {
 public:
  SolverError(ErrorCode code, const std::string& what, int iterations, double residual)
      : Error(code, what), iterations_(iterations), residual_(residual) {}

  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  int iterations_;
  double residual_;
};

}  // namespace bukhgeim
