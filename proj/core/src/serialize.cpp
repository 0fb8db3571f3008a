#include "undercover/serialize.hpp"

#include "undercover/error.hpp"

namespace undercover {
namespace {

Json phase_json(const Phase& phase) {
  return std::visit(
      [](const auto& p) -> Json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Describing>) {
          return {{"kind", "describing"}, {"next_speaker", p.next_speaker.value}};
        } else if constexpr (std::is_same_v<T, Voting>) {
          return {{"kind", "voting"}};
        } else {
          return {{"kind", "finished"}, {"outcome", to_json(p.outcome)}};
        }
      },
      phase);
}

Json ids_json(const std::vector<PlayerId>& ids) {
  Json out = Json::array();
  for (PlayerId p : ids) out.push_back(p.value);
  return out;
}

Json eliminations_json(const std::vector<Elimination>& els) {
  Json out = Json::array();
  for (const auto& e : els) out.push_back({{"player", e.player.value}, {"round", e.round}});
  return out;
}

template <typename T>
T required(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    fail(ErrorCode::InvalidConfig, std::string("missing field '") + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidConfig, std::string("bad field '") + key + "': " + e.what());
  }
}

}  // namespace

Json to_json(const WordPair& pair) {
  return {{"citizen_word", pair.citizen_word},
          {"spy_word", pair.spy_word},
          {"citizen_reference", pair.citizen_reference},
          {"spy_reference", pair.spy_reference}};
}

Json to_json(const GameConfig& config) {
  Json j = {{"n_players", config.n_players},
            {"word_pair", to_json(config.word_pair)},
            {"tie_limit", config.tie_limit},
            {"max_parse_retries", config.max_parse_retries},
            {"seed", config.seed}};
  if (config.spy_seat) j["spy_seat"] = config.spy_seat->value;
  return j;
}

Json to_json(const GameOutcome& o) {
  return {{"winner", std::string(to_string(o.winner))},
          {"reason", std::string(to_string(o.reason))},
          {"rounds_played", o.rounds_played},
          {"eliminated_citizens", o.eliminated_citizens},
          {"n_players", o.n_players}};
}

Json to_json(const VoteTally& t) {
  Json votes = Json::object();
  for (const auto& [voter, target] : t.votes) {
    votes[std::to_string(voter.value)] = target.value;
  }
  Json result = t.eliminated
                    ? Json{{"kind", "eliminated"}, {"player", t.eliminated->value}}
                    : Json{{"kind", "tie"}};
  return {{"round", t.round}, {"votes", std::move(votes)}, {"result", std::move(result)}};
}

Json to_json(const Description& d) {
  return {{"round", d.round}, {"player", d.player.value}, {"text", d.text}};
}

Json to_json(const GameState& s) {
  Json assignments = Json::object();
  for (const auto& [id, a] : s.assignments()) {
    assignments[std::to_string(id.value)] = {{"word", a.word},
                                             {"role", std::string(to_string(a.role))}};
  }
  Json descriptions = Json::array();
  for (const auto& d : s.descriptions()) descriptions.push_back(to_json(d));
  Json votes = Json::array();
  for (const auto& t : s.vote_history()) votes.push_back(to_json(t));
  return {{"config", to_json(s.config())},
          {"assignments", std::move(assignments)},
          {"alive", ids_json(s.alive())},
          {"eliminated", eliminations_json(s.eliminated())},
          {"round", s.round()},
          {"phase", phase_json(s.phase())},
          {"descriptions", std::move(descriptions)},
          {"vote_history", std::move(votes)},
          {"tie_streak", s.tie_streak()}};
}

Json to_json(const TranscriptView& v) {
  Json descriptions = Json::array();
  for (const auto& d : v.descriptions) descriptions.push_back(to_json(d));
  Json votes = Json::array();
  for (const auto& t : v.vote_history) votes.push_back(to_json(t));
  Json j = {{"viewer", v.viewer.value},
            {"own_word", v.own_word},
            {"n_players", v.n_players},
            {"tie_limit", v.tie_limit},
            {"round", v.round},
            {"stage", std::string(to_string(v.stage))},
            {"alive", ids_json(v.alive)},
            {"eliminated", eliminations_json(v.eliminated)},
            {"descriptions", std::move(descriptions)},
            {"vote_history", std::move(votes)},
            {"tie_streak", v.tie_streak}};
  if (v.next_speaker) j["next_speaker"] = v.next_speaker->value;
  return j;
}

WordPair word_pair_from_json(const Json& j) {
  WordPair p;
  p.citizen_word = required<std::string>(j, "citizen_word");
  p.spy_word = required<std::string>(j, "spy_word");
  p.citizen_reference = required<std::string>(j, "citizen_reference");
  p.spy_reference = required<std::string>(j, "spy_reference");
  return p;
}

GameConfig game_config_from_json(const Json& j) {
  GameConfig c;
  c.n_players = j.value("n_players", 6);
  c.tie_limit = j.value("tie_limit", 3);
  c.max_parse_retries = j.value("max_parse_retries", 3);
  c.seed = j.value("seed", std::uint64_t{0});
  c.word_pair = word_pair_from_json(required<Json>(j, "word_pair"));
  if (j.contains("spy_seat")) c.spy_seat = PlayerId{j.at("spy_seat").get<int>()};
  return c;
}

Winner winner_from_string(const std::string& s) {
  if (s == "spy") return Winner::Spy;
  if (s == "citizens") return Winner::Citizens;
  fail(ErrorCode::CorruptRecord, "unknown winner '" + s + "'");
}

EndReason reason_from_string(const std::string& s) {
  if (s == "spy_eliminated") return EndReason::SpyEliminated;
  if (s == "survived_to_final") return EndReason::SurvivedToFinal;
  if (s == "tie_limit") return EndReason::TieLimit;
  fail(ErrorCode::CorruptRecord, "unknown end reason '" + s + "'");
}

GameOutcome outcome_from_json(const Json& j) {
  GameOutcome o;
  o.winner = winner_from_string(required<std::string>(j, "winner"));
  o.reason = reason_from_string(required<std::string>(j, "reason"));
  o.rounds_played = required<int>(j, "rounds_played");
  o.eliminated_citizens = required<int>(j, "eliminated_citizens");
  o.n_players = required<int>(j, "n_players");
  return o;
}

VoteTally tally_from_json(const Json& j) {
  VoteTally t;
  t.round = required<int>(j, "round");
  const Json votes = required<Json>(j, "votes");
  for (const auto& [voter, target] : votes.items()) {
    t.votes[PlayerId{std::stoi(voter)}] = PlayerId{target.get<int>()};
  }
  const Json result = required<Json>(j, "result");
  if (required<std::string>(result, "kind") == "eliminated") {
    t.eliminated = PlayerId{required<int>(result, "player")};
  }
  return t;
}

std::string canonical(const Json& j) { return j.dump(-1, ' ', false, Json::error_handler_t::replace); }

}  // namespace undercover
