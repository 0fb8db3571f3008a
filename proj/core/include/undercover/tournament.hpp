#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "undercover/agents.hpp"
#include "undercover/game.hpp"
#include "undercover/metrics.hpp"
#include "undercover/prover.hpp"
#include "undercover/serialize.hpp"
#include "undercover/similarity.hpp"

namespace undercover {

enum class ContestMode { FixedOpponent, RoundRobin, Custom };
std::string_view to_string(ContestMode mode);
ContestMode contest_mode_from_string(std::string_view s);

struct ContestSpec {
  ContestMode mode = ContestMode::FixedOpponent;
  AgentSpec spy_agent;
  AgentSpec citizen_agent{AgentKind::StandardNli, "", std::nullopt};
  std::vector<AgentSpec> seats;  // Custom only: one spec per seat
  int n_games = 30;
  std::vector<WordPair> word_pairs;
  std::uint64_t base_seed = 0;
  int n_players = 6;
  int tie_limit = 3;
  int max_parse_retries = 3;
  std::optional<PlayerId> spy_seat;  // pins the spy seat in every game

  void validate() const;
  std::string digest() const;
};

Json to_json(const AgentSpec& spec);
Json to_json(const ContestSpec& spec);
AgentSpec agent_spec_from_json(const Json& j);
ContestSpec contest_spec_from_json(const Json& j);

// hash_combine(base_seed, game_index): shardable without coordination.
std::uint64_t game_seed(std::uint64_t base_seed, int game_index);
int total_games(const ContestSpec& spec);
const WordPair& word_pair_for(const ContestSpec& spec, int game_index);
// Agent spec for every seat of one game, given where the spy sits.
std::map<PlayerId, AgentSpec> seating(const ContestSpec& spec, int game_index, PlayerId spy);

// One hash-chained entry of a game's event log.
struct Event {
  int seq = 0;
  std::string type;
  Json body;
  std::string prev;
  std::string digest;
};

std::string event_digest(int seq, const std::string& type, const Json& body,
                         const std::string& prev);
Json to_json(const Event& e);
std::string to_line(const Event& e);

using EventSink = std::function<void(const Event&)>;

struct GameRecord {
  int game_index = 0;
  std::uint64_t seed = 0;
  std::string spec_digest;
  std::vector<Event> events;
  std::optional<GameOutcome> outcome;
  bool aborted = false;
  std::string abort_reason;
  bool fallback_used = false;

  std::string to_jsonl() const;
  // Parses and chain-checks a JSONL log. Throws CorruptRecord.
  static GameRecord from_jsonl(std::string_view text);
};

// Throws CorruptRecord when seq, prev or digest do not line up.
void verify_chain(const std::vector<Event>& events);

// Re-drives the engine from the event log alone. Throws CorruptRecord on a
// broken chain, truncated log, or any disagreement with the recorded
// tallies or outcome; PreconditionViolation for aborted games.
GameOutcome replay(const GameRecord& record);

// Backends a game runs against.
struct Runtime {
  std::function<LlmHandle(const AgentSpec& spec, PlayerId seat, std::uint64_t game_seed)> llm_for;
  std::shared_ptr<Prover> prover;
  std::optional<std::filesystem::path> theory_dump_dir;
};

// Mock chat model and mock prover over the contest's word pairs.
Runtime mock_runtime(const std::vector<WordPair>& lexicon);

// Plays one game. Chat or prover outages abort the game; the record is
// marked aborted and ends with an "aborted" event.
GameRecord run_game(const ContestSpec& spec, int game_index, const Runtime& runtime,
                    const EventSink& sink = {});

// The words and roles a recorded game was played with.
GameState initial_state(const GameRecord& record);

struct PlayerAttribution {
  PlayerId player;
  std::string role;
  std::string kind;
  double as = 0.0;
  double aa = 0.0;
  double att_score = 0.0;
  std::vector<RoundValue> as_trace;
  std::vector<RoundValue> aa_trace;
};

struct GameSummary {
  int game_index = 0;
  std::uint64_t seed = 0;
  std::string citizen_word;
  std::string spy_word;
  bool aborted = false;
  bool fallback_used = false;
  bool counted = false;
  std::optional<GameOutcome> outcome;
  std::vector<PlayerAttribution> players;
};

struct GroupAttribution {
  std::string role;
  std::string kind;
  int n = 0;
  double as = 0.0;
  double aa = 0.0;
  double att_score = 0.0;
};

struct ReportOptions {
  bool exclude_fallback_games = false;
  bool verbose = false;  // per-round traces
};

struct ContestReport {
  int n_records = 0;
  int aborted = 0;
  int excluded_fallback = 0;
  std::optional<GameMetrics> metrics;  // over counted games; empty if none
  std::vector<GroupAttribution> attribution;
  std::vector<GameSummary> games;
  ReportOptions options;
};

ContestReport build_report(const std::vector<GameRecord>& records, const Embedder& embedder,
                           const ReportOptions& options = {});
Json to_json(const ContestReport& report);
std::string to_csv(const ContestReport& report);

struct ContestOptions {
  int workers = 1;
  // When set, games/game_NNNN.jsonl files are written here as events arrive.
  std::optional<std::filesystem::path> out_dir;
  ReportOptions report;
};

struct ContestResult {
  std::vector<GameRecord> records;  // in game-index order
  ContestReport report;
};

ContestResult run_contest(const ContestSpec& spec, const Runtime& runtime,
                          const Embedder& embedder, const ContestOptions& options = {});

std::string game_file_name(int game_index);

// Consistency of every player's cumulative descriptions with their word.
ConsistencyReport consistency_check(const GameRecord& record, const ConsistencyOracle& oracle);

}  // namespace undercover
