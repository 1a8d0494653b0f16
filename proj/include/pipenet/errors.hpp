#pragma once

#include <stdexcept>
#include <string>

namespace pipenet {

// Failure modes that the solvers are allowed to report. Every throw site
// names one of these so callers (and the optimizer, which maps solver
// failures to rejected moves) can branch on the cause.
enum class ErrorCode {
  NonPositiveDensity,
  LeftSubsonicRegion,
  NoSolution,
  NonTransversal,
  NoConvergence,
  GateEqualHeights,
  ValidationFailed,
  DomainExceeded,
  NoFeasibleStart,
  InvalidControl,
  BadScenario,
};

const char* error_code_name(ErrorCode code);

class SolverError : public std::runtime_error {
 public:
  SolverError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw SolverError(code, what);
}

}  // namespace pipenet
