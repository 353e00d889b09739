#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dive {

enum class ErrorCode {
  EmptyId,
  DuplicateId,
  KindFieldMismatch,
  UnknownEndpoint,
  KindConstraintViolation,
  CycleIntroduced,
  UnknownReference,
  DuplicateAppraisal,
  RangeError,
  InvalidAnnotation,
  SyntaxError,
  SchemaError,
  ValidationFailed,
  UnknownNode,
  CyclicProvenance,
  LabelExplosion,
  UnknownElement,
  MalformedFactorRef,
  PreconditionViolated,
  InconsistentState,
  NotFound,
  VersionConflict,
  BadRequest,
  IoError,
};

std::string_view to_string(ErrorCode code);

// A single broken rule found by validate(). Violations are data; they are
// only thrown when wrapped in an Error with code ValidationFailed.
struct Violation {
  ErrorCode rule;
  std::vector<std::string> ids;
  std::string message;

  bool operator==(const Violation&) const = default;
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message,
        std::vector<std::string> ids = {})
      : std::runtime_error(std::move(message)),
        code_(code),
        ids_(std::move(ids)) {}

  Error(ErrorCode code, std::string message,
        std::vector<Violation> violations)
      : std::runtime_error(std::move(message)),
        code_(code),
        violations_(std::move(violations)) {}

  ErrorCode code() const noexcept { return code_; }

  // Offending ids. For CycleIntroduced this is the cycle's node sequence,
  // starting and ending at the same node.
  const std::vector<std::string>& ids() const noexcept { return ids_; }

  const std::vector<Violation>& violations() const noexcept {
    return violations_;
  }

 private:
  ErrorCode code_;
  std::vector<std::string> ids_;
  std::vector<Violation> violations_;
};

}  // namespace dive
