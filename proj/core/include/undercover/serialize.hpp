#pragma once

#include <string>

#include "json.hpp"
#include "undercover/game.hpp"

namespace undercover {

using Json = nlohmann::json;

// Stable JSON schema for the engine types. Objects use sorted keys, so
// dump() output is byte-stable for equal values.
Json to_json(const WordPair& pair);
Json to_json(const GameConfig& config);
Json to_json(const GameOutcome& outcome);
Json to_json(const VoteTally& tally);
Json to_json(const Description& description);
Json to_json(const GameState& state);
Json to_json(const TranscriptView& view);

WordPair word_pair_from_json(const Json& j);
GameConfig game_config_from_json(const Json& j);
GameOutcome outcome_from_json(const Json& j);
VoteTally tally_from_json(const Json& j);

Winner winner_from_string(const std::string& s);
EndReason reason_from_string(const std::string& s);

// Canonical compact dump used for digests and golden files.
std::string canonical(const Json& j);

}  // namespace undercover
