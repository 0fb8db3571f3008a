#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "undercover/game.hpp"

namespace undercover {

enum class IdentityHypothesis { Spy, Citizen };
std::string_view to_string(IdentityHypothesis h);

// Text after the last "Description:" marker (first non-empty line). Without a
// marker the reply is accepted only if it is a single one-sentence line.
// Throws Unparseable.
std::string parse_description(std::string_view raw);

// Player number named after the last "vote" marker that is followed by one.
// A bare "6" or "Player 6" reply is also accepted since the vote templates
// end with "Vote:\nPlayer". Throws Unparseable, or OutOfRange when the number
// is outside 1..n_players.
PlayerId parse_vote(std::string_view raw, int n_players);

// Body of the "Reasoning Process:" section, up to the Description/Vote
// marker. Empty optional when the section is missing.
std::optional<std::string> reasoning_section(std::string_view raw);

// First-person identity claims in free text ("I am not the spy", "I am
// likely the spy"). Hedged clauses ("whether I am the spy") do not count;
// with no claim, or conflicting claims, the last claim wins and the
// default is Citizen.
IdentityHypothesis parse_self_identity(std::string_view rationale);

// Players the rationale names as the spy or as suspicious.
std::vector<PlayerId> parse_suspects(std::string_view rationale);

// Word after the last "opponent's word:" marker, stripped of brackets and
// quotes. Empty string when nothing usable is found.
std::string parse_guess_word(std::string_view raw);

}  // namespace undercover
