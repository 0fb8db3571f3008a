#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "undercover/game.hpp"

namespace undercover {

enum class Verdict { Valid, Invalid, SyntaxError };
std::string_view to_string(Verdict v);  // "valid" | "invalid" | "syntax_error"
Verdict verdict_from_string(std::string_view s);

struct ProofTrace {
  std::vector<std::string> messages;
  bool operator==(const ProofTrace&) const = default;
};

// A trace is present exactly when the verdict is not Valid.
struct ProverVerdict {
  Verdict verdict = Verdict::Valid;
  std::optional<ProofTrace> trace;
  bool operator==(const ProverVerdict&) const = default;
};

// Builds a verdict honouring the trace invariant; an empty message list on a
// non-valid verdict gets a generic message.
ProverVerdict make_verdict(Verdict v, std::vector<std::string> messages = {});

// One prover run as the wire protocol reports it.
struct ProverResponse {
  Verdict status = Verdict::Valid;
  std::vector<std::string> messages;
};

class Prover {
 public:
  virtual ~Prover() = default;
  // Throws Error(ProverUnavailable).
  virtual ProverResponse check(const std::string& theory) = 0;
};

// Any line containing this marker is a syntax error for MockProver.
inline constexpr std::string_view kSyntaxErrorMarker = "__syntax_error__";

// Deterministic stand-in for a real prover. It reads the "(* Fact k: ... *)"
// comments and the `shows "∃x. Pred x"` goal, looks Pred up in its lexicon
// and answers valid iff the facts share more content tokens with the goal
// word's reference sentence than with the contrasting word's.
class MockProver final : public Prover {
 public:
  explicit MockProver(const std::vector<WordPair>& lexicon);
  ProverResponse check(const std::string& theory) override;
  std::size_t calls() const;

 private:
  struct Entry {
    std::string reference;
    std::string contrast_reference;
  };
  std::map<std::string, Entry> by_predicate_;
  mutable std::mutex mu_;
  std::size_t calls_ = 0;
};

// Replies with the given responses in order; throws ProverUnavailable once
// exhausted.
class SequenceProver final : public Prover {
 public:
  explicit SequenceProver(std::vector<ProverResponse> responses);
  ProverResponse check(const std::string& theory) override;
  std::size_t calls() const;
  const std::vector<std::string>& seen() const { return seen_; }

 private:
  mutable std::mutex mu_;
  std::vector<ProverResponse> responses_;
  std::vector<std::string> seen_;
  std::size_t next_ = 0;
};

// Wraps a prover and, with probability `flip`, reports a different outcome
// than the inner prover did. Seeded, so a run sequence is reproducible.
class FlakyProver final : public Prover {
 public:
  FlakyProver(std::shared_ptr<Prover> inner, std::uint64_t seed, double flip);
  ProverResponse check(const std::string& theory) override;

 private:
  std::shared_ptr<Prover> inner_;
  double flip_;
  std::mutex mu_;
  std::mt19937_64 rng_;
};

// POST {url}/prove {"theory": ..., "timeout_s": ...} ->
// {"status": "valid"|"invalid"|"syntax_error", "messages": [...]}.
// Requests are serialized per client.
class HttpProver final : public Prover {
 public:
  explicit HttpProver(std::string base_url, double timeout_s = 60.0);
  ProverResponse check(const std::string& theory) override;

 private:
  std::string base_url_;
  double timeout_s_;
  std::mutex mu_;
};

// Fact comments and goal predicate as the mock prover sees them.
std::vector<std::string> theory_fact_comments(std::string_view theory);
std::optional<std::string> theory_goal_predicate(std::string_view theory);

}  // namespace undercover
