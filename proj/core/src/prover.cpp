#include "undercover/prover.hpp"

#include <cctype>
#include <regex>
#include <set>

#include "undercover/error.hpp"
#include "undercover/text.hpp"

namespace undercover {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Valid: return "valid";
    case Verdict::Invalid: return "invalid";
    case Verdict::SyntaxError: return "syntax_error";
  }
  return "invalid";
}

Verdict verdict_from_string(std::string_view s) {
  if (s == "valid") return Verdict::Valid;
  if (s == "invalid") return Verdict::Invalid;
  if (s == "syntax_error") return Verdict::SyntaxError;
  fail(ErrorCode::CorruptRecord, "unknown prover status '" + std::string(s) + "'");
}

ProverVerdict make_verdict(Verdict v, std::vector<std::string> messages) {
  ProverVerdict out;
  out.verdict = v;
  if (v == Verdict::Valid) return out;
  if (messages.empty()) {
    messages.push_back(v == Verdict::SyntaxError ? "syntax error reported without details"
                                                 : "no proof found");
  }
  out.trace = ProofTrace{std::move(messages)};
  return out;
}

std::vector<std::string> theory_fact_comments(std::string_view theory) {
  static const std::regex kFact(R"(\(\*\s*Fact\s+\d+:\s*([\s\S]*?)\s*\*\))");
  std::vector<std::string> out;
  const std::string s(theory);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), kFact);
       it != std::sregex_iterator(); ++it) {
    out.push_back((*it)[1].str());
  }
  return out;
}

std::optional<std::string> theory_goal_predicate(std::string_view theory) {
  static const std::regex kGoal("shows\\s+\"\xE2\x88\x83x\\.\\s*([A-Za-z][A-Za-z0-9_']*)\\s+x\"");
  std::smatch m;
  const std::string s(theory);
  if (!std::regex_search(s, m, kGoal)) return std::nullopt;
  return m[1].str();
}

MockProver::MockProver(const std::vector<WordPair>& lexicon) {
  for (const auto& p : lexicon) {
    by_predicate_[text::predicate_name(p.citizen_word)] = {p.citizen_reference, p.spy_reference};
    by_predicate_[text::predicate_name(p.spy_word)] = {p.spy_reference, p.citizen_reference};
  }
}

std::size_t MockProver::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

ProverResponse MockProver::check(const std::string& theory) {
  {
    std::lock_guard lock(mu_);
    ++calls_;
  }
  ProverResponse r;
  const auto lines = text::split_lines(theory);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find(kSyntaxErrorMarker) != std::string::npos) {
      r.messages.push_back("Inner syntax error at line " + std::to_string(i + 1) +
                           ": unexpected token");
    } else if (lines[i].find(": \"\"") != std::string::npos) {
      r.messages.push_back("Inner syntax error at line " + std::to_string(i + 1) +
                           ": empty formula");
    }
  }
  const auto goal = theory_goal_predicate(theory);
  if (!goal) r.messages.push_back("Outer syntax error: missing theorem statement");
  if (!r.messages.empty()) {
    r.status = Verdict::SyntaxError;
    return r;
  }

  std::set<std::string> fact_tokens;
  for (const auto& f : theory_fact_comments(theory)) {
    for (const auto& t : text::content_tokens(f)) fact_tokens.insert(t);
  }
  // Words outside the lexicon (guesses) are their own reference.
  std::string reference = *goal;
  std::string contrast;
  if (auto it = by_predicate_.find(*goal); it != by_predicate_.end()) {
    reference = it->second.reference;
    contrast = it->second.contrast_reference;
  } else {
    reference.clear();
    for (char c : *goal) {
      if (std::isupper(static_cast<unsigned char>(c)) && !reference.empty()) reference += ' ';
      reference += c;
    }
  }
  auto overlap = [&](const std::string& s) {
    int n = 0;
    for (const auto& t : text::content_tokens(s)) n += fact_tokens.count(t) > 0 ? 1 : 0;
    return n;
  };
  const int target = overlap(reference);
  const int other = contrast.empty() ? 0 : overlap(contrast);
  if (target > other) {
    r.status = Verdict::Valid;
    return r;
  }
  r.status = Verdict::Invalid;
  r.messages.push_back("Failed to finish proof of \"\xE2\x88\x83x. " + *goal +
                       " x\": the facts share " + std::to_string(target) +
                       " content tokens with the goal word and " + std::to_string(other) +
                       " with its contrast");
  return r;
}

SequenceProver::SequenceProver(std::vector<ProverResponse> responses)
    : responses_(std::move(responses)) {}

ProverResponse SequenceProver::check(const std::string& theory) {
  std::lock_guard lock(mu_);
  seen_.push_back(theory);
  if (next_ >= responses_.size()) {
    fail(ErrorCode::ProverUnavailable, "sequence prover exhausted");
  }
  return responses_[next_++];
}

std::size_t SequenceProver::calls() const {
  std::lock_guard lock(mu_);
  return next_;
}

FlakyProver::FlakyProver(std::shared_ptr<Prover> inner, std::uint64_t seed, double flip)
    : inner_(std::move(inner)), flip_(flip), rng_(seed) {}

ProverResponse FlakyProver::check(const std::string& theory) {
  ProverResponse r = inner_->check(theory);
  std::lock_guard lock(mu_);
  const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  if (u >= flip_) return r;
  const bool pick_first = (rng_() & 1U) == 0U;
  switch (r.status) {
    case Verdict::Valid:
      r.status = pick_first ? Verdict::Invalid : Verdict::SyntaxError;
      break;
    case Verdict::Invalid:
      r.status = pick_first ? Verdict::Valid : Verdict::SyntaxError;
      break;
    case Verdict::SyntaxError:
      r.status = pick_first ? Verdict::Valid : Verdict::Invalid;
      break;
  }
  r.messages.clear();
  if (r.status != Verdict::Valid) r.messages.push_back("prover run disagreed with itself");
  return r;
}

}  // namespace undercover
