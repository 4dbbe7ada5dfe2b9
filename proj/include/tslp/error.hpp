#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tslp {

/// Failure categories surfaced by the library. The CLI maps each category
/// onto a process exit code (see cli/commands.hpp).
enum class ErrorCode {
  BadInput,
  BadParameter,
  BadProbabilities,
  EmptyFeasibleSet,
  UnboundedFirstStage,
  TooLarge,
  EnumerationCapExceeded,
  MissingParameter,
  // lp_core
  IterationLimit,
  NumericalBreakdown,
  Infeasible,
  SecondStageInfeasible,
  SecondStageUnbounded,
  // parsers
  UnsupportedSection,
  StochasticRecourse,
  UnknownRowOrColumn,
  MalformedLine,
  MalformedDocument,
  Io,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

  /// Returns a copy with `context` prepended to the message, keeping the code.
  Error with_context(const std::string& context) const {
    return Error(code_, context + ": " + detail_);
  }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace tslp
