#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "undercover/chat.hpp"
#include "undercover/game.hpp"
#include "undercover/prover.hpp"
#include "undercover/similarity.hpp"
#include "undercover/tournament.hpp"

namespace undercover::testing {

std::filesystem::path source_dir();
std::filesystem::path fixture_path(const std::string& name);
std::filesystem::path golden_path(const std::string& name);
std::string read_text(const std::filesystem::path& p);
void write_text(const std::filesystem::path& p, const std::string& s);
// Compares against a golden file; UNDERCOVER_UPDATE_GOLDEN=1 rewrites it.
bool matches_golden(const std::string& name, const std::string& actual);

std::vector<WordPair> word_pairs();
const WordPair& pair_named(const std::string& citizen_word);

std::shared_ptr<Embedder> mock_embedder();

// ---- independent oracles -------------------------------------------------

// Plurality with a unique maximum, else a tie.
std::optional<PlayerId> oracle_tally(const Ballot& ballot);

struct OracleMetrics {
  double as = 0.0;
  double aa = 0.0;
  double att = 0.0;
  bool has_aa = false;
};
// Straight-line recomputation from MockEmbeddingProvider vectors.
OracleMetrics oracle_metrics(PlayerId agent, const std::vector<Description>& transcript,
                             const WordPair& pair, int dim = 256);

// ---- fixtures -------------------------------------------------------------

struct CaseStudy {
  ContestSpec spec;
  Runtime runtime;
  std::map<PlayerId, std::vector<std::string>> replies;
};
CaseStudy load_case_study();
GameRecord run_case_study();

// Contest where every seat follows a fixed script. `descriptions[r-1][p-1]`
// is player p's round-r text; `votes[r-1][p-1]` their target (0 = none).
ContestSpec scripted_contest(const WordPair& pair, int n_players, PlayerId spy_seat,
                             const std::vector<std::vector<std::string>>& descriptions,
                             const std::vector<std::vector<int>>& votes, int tie_limit = 3);

// Mock contest over the shipped word pairs.
ContestSpec mock_contest(int n_games, std::uint64_t seed, AgentKind spy, AgentKind citizen,
                         ContestMode mode = ContestMode::FixedOpponent);

// Whole-token occurrences of any forbidden string in `text`. Word cards are
// matched case-insensitively; role names case-sensitively.
std::vector<std::string> leaked_terms(const std::string& text,
                                      const std::vector<std::string>& foreign_words);

// Prover whose every answer comes from a function.
class FunctionProver final : public Prover {
 public:
  using Fn = std::function<ProverResponse(const std::string&)>;
  explicit FunctionProver(Fn fn) : fn_(std::move(fn)) {}
  ProverResponse check(const std::string& theory) override {
    ++calls_;
    return fn_(theory);
  }
  int calls() const { return calls_; }

 private:
  Fn fn_;
  int calls_ = 0;
};

// ---- acceptance checks ----------------------------------------------------

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

CheckResult check_golden_case_study();
CheckResult check_tie_rules();
CheckResult check_metrics_oracle();
CheckResult check_round_weights();
CheckResult check_majority_exhaustive();
CheckResult check_refinement_bound();
CheckResult check_guess_update();
CheckResult check_information_hiding();
CheckResult check_replay_closure();
CheckResult check_consistency();
CheckResult check_score_reproduces_play();

std::vector<std::function<CheckResult()>> all_checks();

}  // namespace undercover::testing
