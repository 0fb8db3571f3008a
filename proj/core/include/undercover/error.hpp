#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace undercover {

enum class ErrorCode {
  InvalidConfig,
  OutOfTurn,
  WrongPhase,
  DuplicateDescription,
  EmptyText,
  IncompleteBallot,
  SelfVote,
  DeadTarget,
  UnknownPlayer,
  UnknownTemplate,
  MissingPlaceholder,
  Unparseable,
  OutOfRange,
  BackendUnavailable,
  ProverUnavailable,
  ProviderUnavailable,
  IncompleteRecord,
  PreconditionViolation,
  EmptyRounds,
  MissingReference,
  NoQualifyingRound,
  EmptyInput,
  CorruptRecord,
  Io,
};

std::string_view to_string(ErrorCode code);

// Every failure in the library surfaces as an Error carrying a code, so
// callers (agent retry loops, the tournament runner, the CLI) can branch on
// the category without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace undercover
