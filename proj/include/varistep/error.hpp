#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace varistep {

/// Error categories shared by the C++ core and the C API status codes.
enum class ErrorCode {
  InvalidGrid,
  InvalidRange,
  InvalidInput,
  Config,
  Capability,
  Parse,
  Name,
  Eval,
  NoConvergence,
  SingularSystem,
  NonpositiveStep,
  StepRejected,
  SingularDomain,
  Io,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define VARISTEP_DEFINE_ERROR(Name, Code)                                    \
  class Name : public Error {                                                \
   public:                                                                   \
    explicit Name(const std::string& message) : Error(ErrorCode::Code, message) {} \
  }

VARISTEP_DEFINE_ERROR(InvalidGrid, InvalidGrid);
VARISTEP_DEFINE_ERROR(InvalidRange, InvalidRange);
VARISTEP_DEFINE_ERROR(InvalidInput, InvalidInput);
VARISTEP_DEFINE_ERROR(ConfigError, Config);
VARISTEP_DEFINE_ERROR(CapabilityError, Capability);
VARISTEP_DEFINE_ERROR(NameError, Name);
VARISTEP_DEFINE_ERROR(EvalError, Eval);
VARISTEP_DEFINE_ERROR(SingularSystem, SingularSystem);
VARISTEP_DEFINE_ERROR(NonpositiveStep, NonpositiveStep);
VARISTEP_DEFINE_ERROR(StepRejected, StepRejected);
VARISTEP_DEFINE_ERROR(SingularDomain, SingularDomain);
VARISTEP_DEFINE_ERROR(IoError, Io);

#undef VARISTEP_DEFINE_ERROR

/// Syntax error in a DSL source string. `offset` is a byte offset into the
/// source; `expected` lists the token classes that would have been accepted.
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, std::vector<std::string> expected, const std::string& detail);

  std::size_t offset() const noexcept { return offset_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

/// Newton iteration budget exhausted. Carries the best iterate seen.
class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& message, Eigen::VectorXd best_iterate, double best_residual,
                int iterations)
      : Error(ErrorCode::NoConvergence, message),
        best_iterate_(std::move(best_iterate)),
        best_residual_(best_residual),
        iterations_(iterations) {}

  const Eigen::VectorXd& best_iterate() const noexcept { return best_iterate_; }
  double best_residual() const noexcept { return best_residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  Eigen::VectorXd best_iterate_;
  double best_residual_;
  int iterations_;
};

}  // namespace varistep
