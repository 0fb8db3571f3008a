#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "undercover/chat.hpp"
#include "undercover/game.hpp"
#include "undercover/parse.hpp"
#include "undercover/prover.hpp"

namespace undercover {

struct KnowledgeBase {
  PlayerId subject;
  std::string hypothesis_word;
  std::vector<std::string> facts;  // the subject's descriptions, verbatim
  std::vector<std::string> rules;  // generated bridging rules

  // "Facts:" / "Rules:" listing used in prompts.
  std::string to_text() const;
};

// F_i plus LLM-generated rules. Throws PreconditionViolation on empty
// descriptions; a reply with no usable line yields no rules.
KnowledgeBase build_knowledge_base(PlayerId subject, const std::vector<std::string>& descriptions,
                                   const std::string& hypothesis_word, const LlmHandle& llm);

struct Axiom {
  std::string kind;  // "Fact" or "Rule"
  int index = 0;     // 1-based within its kind
  std::string sentence;
  std::vector<std::string> consts;  // "Name :: \"entity ⇒ bool\""
  std::string formula;              // without surrounding quotes
};

struct Theory {
  std::vector<Axiom> axioms;
  std::string theorem;  // ∃x. Pred x
  KnowledgeBase source_kb;
  std::string target_word;
  std::string source;  // full theory text handed to the prover

  std::string digest() const;
};

// Prover source text for a set of axioms and a goal word.
std::string assemble_theory(const std::vector<Axiom>& axioms, const std::string& target_word);

// Splits a formalization reply into consts and formula.
Axiom parse_formalization(std::string_view reply, std::string kind, int index,
                          std::string sentence);

// One formalization call per knowledge-base sentence, facts first.
Theory autoformalize(const KnowledgeBase& kb, const std::string& target_word,
                     const LlmHandle& llm);

inline constexpr int kMaxSyntaxIterations = 5;

struct RefineResult {
  Theory theory;
  bool clean = false;
  int checks = 0;
  int repairs = 0;
  std::vector<std::string> last_errors;
};

// Check, repair on syntax errors, repeat; at most kMaxSyntaxIterations repairs.
RefineResult refine_syntax(Theory theory, Prover& prover, const LlmHandle& llm);

struct MajorityResult {
  ProverVerdict verdict;
  std::vector<Verdict> runs;
};

// Re-runs the prover until one outcome has been seen twice (at most 4 runs).
MajorityResult early_stop_majority(const std::string& theory, Prover& prover);

struct Verification {
  ProverVerdict verdict;
  Theory theory;
  int syntax_checks = 0;
  int syntax_repairs = 0;
  std::vector<Verdict> majority_runs;
};

// Knowledge base -> theory -> syntax refinement -> majority vote, with the
// descriptions as facts and `target_word` as the goal.
Verification verify_description(PlayerId owner, const std::vector<std::string>& descriptions,
                                const std::string& target_word, const LlmHandle& llm,
                                Prover& prover,
                                const std::optional<std::filesystem::path>& dump_dir = {});

struct RecordEntry {
  PlayerId player;
  int round = 0;
  ProverVerdict verdict;
  std::string theory_digest;
  std::string knowledge;  // KnowledgeBase::to_text()
  std::string theory;     // final theory source
  std::optional<std::string> error;  // set when verification itself failed
};

struct LogicalRecord {
  std::map<std::pair<PlayerId, int>, RecordEntry> entries;

  bool covers(const TranscriptView& view) const;
  const RecordEntry* find(PlayerId player, int round) const;
  // Latest entry for a player, any round.
  const RecordEntry* latest(PlayerId player) const;
  // Prompt sections.
  std::string validity_text() const;
  std::string reasoning_text() const;
};

// One verification per alive non-self describer against `own_word`, keyed
// by the view's round. An empty record when nobody else has described yet.
// Prover failures become per-entry error markers.
LogicalRecord build_logical_record(const TranscriptView& view, const std::string& own_word,
                                   const LlmHandle& llm, Prover& prover,
                                   const std::optional<std::filesystem::path>& dump_dir = {});

inline constexpr std::string_view kUnknownGuess = "unknown";

struct GuessEvent {
  int round = 0;
  std::string word;
  std::string reason;
};

struct GuessWord {
  std::string word;
  int round_set = 0;
  std::vector<GuessEvent> history;
  bool flagged = false;
};

// One guess call, one re-prompt when the reply is empty or the agent's own
// word, then the kUnknownGuess sentinel (flagged).
GuessWord initial_guess(const TranscriptView& view, const LlmHandle& llm);

enum class GuessBranch { KeptValid, SpyUpdate, CitizenKeep, CitizenUpdate };
std::string_view to_string(GuessBranch b);

struct GuessUpdate {
  GuessWord guess;
  GuessBranch branch = GuessBranch::KeptValid;
  bool changed = false;
  bool flagged = false;
  std::string raw_reply;
};

// Piecewise guess refinement after a citizen elimination. `verdict` is the
// check of the eliminated player's descriptions against the current guess
// and `theory` that check's source. Valid keeps the guess without a call;
// otherwise one update call, whose answer is rejected if it is empty or the
// agent's own word. Backend failures keep the guess and flag it.
GuessUpdate update_guess(const GuessWord& guess, IdentityHypothesis self,
                         const TranscriptView& view, const ProverVerdict& verdict,
                         const std::string& theory, const LlmHandle& llm);

// Decides whether a word is consistent with a cumulative description set.
class ConsistencyOracle {
 public:
  virtual ~ConsistencyOracle() = default;
  virtual bool consistent(const std::string& word,
                          const std::vector<std::string>& descriptions) const = 0;
};

// A description set is inconsistent with a word when some description
// shares more content tokens with the contrasting word's reference than
// with the word's own reference.
class KeywordConsistencyOracle final : public ConsistencyOracle {
 public:
  explicit KeywordConsistencyOracle(const std::vector<WordPair>& lexicon);
  bool consistent(const std::string& word,
                  const std::vector<std::string>& descriptions) const override;

 private:
  std::map<std::string, std::pair<std::string, std::string>> refs_;  // word -> (own, contrast)
};

struct ConsistencyViolation {
  PlayerId player;
  int round = 0;
};

struct ConsistencyReport {
  int checks = 0;
  std::vector<ConsistencyViolation> violations;
};

// Checks every player's cumulative descriptions up to each round they spoke in.
ConsistencyReport consistency_check(const std::vector<Description>& descriptions,
                                    const std::map<PlayerId, std::string>& words,
                                    const ConsistencyOracle& oracle);

}  // namespace undercover
