#pragma once

#include <stdexcept>
#include <string>

namespace hardy {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define HARDY_DECLARE_ERROR(Name)               \
  class Name : public Error {                   \
   public:                                      \
    explicit Name(const std::string& what)      \
        : Error(#Name ": " + what) {}           \
  }

// lambda below the Hardy constant: operator unbounded below
HARDY_DECLARE_ERROR(LambdaBelowCritical);
HARDY_DECLARE_ERROR(NotNonnegative);
HARDY_DECLARE_ERROR(EnvelopeViolation);
HARDY_DECLARE_ERROR(QuadratureFailure);
HARDY_DECLARE_ERROR(ContractionFailure);
HARDY_DECLARE_ERROR(OdeFailure);
HARDY_DECLARE_ERROR(AsymptoticNotReached);
HARDY_DECLARE_ERROR(NotAdmissible);
HARDY_DECLARE_ERROR(UnsupportedMode);
HARDY_DECLARE_ERROR(StabilityFailure);
HARDY_DECLARE_ERROR(PositivityViolation);
HARDY_DECLARE_ERROR(ConfigError);

#undef HARDY_DECLARE_ERROR

/// Condition (V) failed on the sampled grid.
class ValidationFailure : public Error {
 public:
  ValidationFailure(std::string clause, double radius, const std::string& detail)
      : Error("ValidationFailure: clause " + clause + " violated near r=" +
              std::to_string(radius) + " (" + detail + ")"),
        clause_(std::move(clause)),
        radius_(radius) {}

  const std::string& clause() const noexcept { return clause_; }
  double radius() const noexcept { return radius_; }

 private:
  std::string clause_;
  double radius_;
};

}  // namespace hardy
