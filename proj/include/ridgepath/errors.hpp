#pragma once

#include <stdexcept>
#include <string>

namespace ridgepath {

/// Broad failure class, used by the command-line tool to pick an exit code.
enum class ErrorCategory { Usage, Numerical, Io };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

#define RIDGEPATH_DEFINE_ERROR(Name, Category)                     \
  class Name : public Error {                                      \
   public:                                                         \
    explicit Name(const std::string& what)                         \
        : Error(ErrorCategory::Category, #Name ": " + what) {}     \
  }

// Precondition and argument failures.
RIDGEPATH_DEFINE_ERROR(InvalidArgument, Usage);
RIDGEPATH_DEFINE_ERROR(DimensionMismatch, Usage);
RIDGEPATH_DEFINE_ERROR(InvalidRank, Usage);
RIDGEPATH_DEFINE_ERROR(InvalidThreshold, Usage);
RIDGEPATH_DEFINE_ERROR(InsufficientSamples, Usage);
RIDGEPATH_DEFINE_ERROR(DegenerateSamples, Usage);
RIDGEPATH_DEFINE_ERROR(EmptyValidationSet, Usage);
RIDGEPATH_DEFINE_ERROR(HypothesisViolated, Usage);

// Numerical failures.
RIDGEPATH_DEFINE_ERROR(NotPositiveDefinite, Numerical);
RIDGEPATH_DEFINE_ERROR(NotSymmetric, Numerical);
RIDGEPATH_DEFINE_ERROR(ConvergenceFailure, Numerical);
RIDGEPATH_DEFINE_ERROR(SingularInterpolant, Numerical);
RIDGEPATH_DEFINE_ERROR(NonFiniteValue, Numerical);

// File and format failures.
RIDGEPATH_DEFINE_ERROR(BadFormat, Io);
RIDGEPATH_DEFINE_ERROR(IoError, Io);

#undef RIDGEPATH_DEFINE_ERROR

}  // namespace ridgepath
