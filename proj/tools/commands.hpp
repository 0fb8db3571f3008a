#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "undercover/tournament.hpp"

namespace undercover::cli {

enum ExitCode { kOk = 0, kConfigError = 2, kRuntimeError = 3 };

struct PlayOptions {
  std::filesystem::path config;
  std::filesystem::path out;
  bool live = false;
  int workers = 1;
  std::optional<std::uint64_t> seed;
  bool exclude_fallback_games = false;
  bool force = false;
  bool verbose = false;
};

struct ScoreOptions {
  std::filesystem::path in;
  std::optional<std::filesystem::path> out;  // defaults to <in>/score.json
  bool exclude_fallback_games = false;
  bool verbose = false;
};

struct WordsOptions {
  std::filesystem::path config;  // a full config or a bare word-pair array
};

struct ValidateOptions {
  std::filesystem::path config;
  std::vector<std::filesystem::path> records;
};

struct ServeOptions {
  std::optional<std::filesystem::path> config;
  std::string host = "127.0.0.1";
  int port = 8765;
};

int cmd_play(const PlayOptions& opts, std::ostream& out, std::ostream& err);
int cmd_score(const ScoreOptions& opts, std::ostream& out, std::ostream& err);
int cmd_words(const WordsOptions& opts, std::ostream& out, std::ostream& err);
int cmd_validate(const ValidateOptions& opts, std::ostream& out, std::ostream& err);
int cmd_serve_mock(const ServeOptions& opts, std::ostream& out, std::ostream& err);

// Loads every games/game_NNNN.jsonl under an output directory, in index order.
std::vector<GameRecord> load_records(const std::filesystem::path& dir);

// Parses argv and dispatches. Used by main() and the CLI tests.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace undercover::cli
