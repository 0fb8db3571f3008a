#include "undercover/error.hpp"

namespace undercover {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::OutOfTurn: return "OutOfTurn";
    case ErrorCode::WrongPhase: return "WrongPhase";
    case ErrorCode::DuplicateDescription: return "DuplicateDescription";
    case ErrorCode::EmptyText: return "EmptyText";
    case ErrorCode::IncompleteBallot: return "IncompleteBallot";
    case ErrorCode::SelfVote: return "SelfVote";
    case ErrorCode::DeadTarget: return "DeadTarget";
    case ErrorCode::UnknownPlayer: return "UnknownPlayer";
    case ErrorCode::UnknownTemplate: return "UnknownTemplate";
    case ErrorCode::MissingPlaceholder: return "MissingPlaceholder";
    case ErrorCode::Unparseable: return "Unparseable";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::ProverUnavailable: return "ProverUnavailable";
    case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::IncompleteRecord: return "IncompleteRecord";
    case ErrorCode::PreconditionViolation: return "PreconditionViolation";
    case ErrorCode::EmptyRounds: return "EmptyRounds";
    case ErrorCode::MissingReference: return "MissingReference";
    case ErrorCode::NoQualifyingRound: return "NoQualifyingRound";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::CorruptRecord: return "CorruptRecord";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace undercover
