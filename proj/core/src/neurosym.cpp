#include "undercover/neurosym.hpp"

#include <fstream>
#include <set>

#include "undercover/error.hpp"
#include "undercover/hash.hpp"
#include "undercover/prompts.hpp"
#include "undercover/text.hpp"

namespace undercover {
namespace {

const std::string kEntityPredicate = "\"entity \xE2\x87\x92 bool\"";

// Drops list numbering and bullet prefixes from a generated rule line.
std::string strip_list_prefix(std::string line) {
  line = text::trim(line);
  static constexpr std::string_view kBullets = "-*\xE2\x80\xA2";
  while (!line.empty() && kBullets.find(line.front()) != std::string_view::npos) {
    line.erase(0, 1);
  }
  std::size_t i = 0;
  while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
  if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')' || line[i] == ':')) {
    line.erase(0, i + 1);
  }
  const std::string lower = text::to_lower(line.substr(0, 8));
  if (lower.rfind("rule", 0) == 0) {
    const std::size_t colon = line.find(':');
    if (colon != std::string::npos && colon < 10) line.erase(0, colon + 1);
  }
  return text::trim(line);
}

std::string comment_safe(std::string_view s) {
  std::string out = text::normalize_whitespace(s);
  std::size_t pos = 0;
  while ((pos = out.find("*)", pos)) != std::string::npos) out.replace(pos, 2, "* )");
  pos = 0;
  while ((pos = out.find("(*", pos)) != std::string::npos) out.replace(pos, 2, "( *");
  return out;
}

std::string strip_quotes(std::string s) {
  s = text::trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return text::trim(s);
}

std::string strip_code_fences(std::string_view reply) {
  std::vector<std::string> kept;
  for (const auto& line : text::split_lines(reply)) {
    if (text::trim(line).rfind("```", 0) == 0) continue;
    kept.push_back(line);
  }
  return text::trim(text::join(kept, "\n"));
}

std::string const_name(const std::string& decl) {
  const std::size_t colons = decl.find("::");
  return text::trim(decl.substr(0, colons));
}

bool is_own_word(const std::string& candidate, const std::string& own) {
  return text::iequals(text::normalize_whitespace(candidate), text::normalize_whitespace(own));
}

}  // namespace

std::string KnowledgeBase::to_text() const {
  std::string out = "Facts:\n";
  for (const auto& f : facts) out += "- " + f + "\n";
  out += "Rules:\n";
  if (rules.empty()) out += "- None\n";
  for (const auto& r : rules) out += "- " + r + "\n";
  out.pop_back();
  return out;
}

KnowledgeBase build_knowledge_base(PlayerId subject, const std::vector<std::string>& descriptions,
                                   const std::string& hypothesis_word, const LlmHandle& llm) {
  if (descriptions.empty()) {
    fail(ErrorCode::PreconditionViolation, "knowledge base needs at least one description");
  }
  KnowledgeBase kb;
  kb.subject = subject;
  kb.hypothesis_word = hypothesis_word;
  kb.facts = descriptions;
  const std::string prompt = render_template(
      TemplateId::NeuroSymRules,
      {{"facts", text::join(descriptions, "\n")}, {"goal", hypothesis_word}});
  const std::string reply = llm.complete(to_messages(prompt));
  for (const auto& line : text::split_lines(reply)) {
    std::string rule = strip_list_prefix(line);
    if (rule.empty() || text::iequals(rule, "answer:") || rule == "...") continue;
    kb.rules.push_back(std::move(rule));
  }
  return kb;
}

std::string Theory::digest() const { return digest_hex(source); }

std::string assemble_theory(const std::vector<Axiom>& axioms, const std::string& target_word) {
  const std::string goal = text::predicate_name(target_word);
  std::vector<std::string> consts;
  std::set<std::string> declared;
  for (const auto& a : axioms) {
    for (const auto& c : a.consts) {
      const std::string name = const_name(c);
      if (name.empty() || !declared.insert(name).second) continue;
      consts.push_back(text::trim(c));
    }
  }
  if (declared.insert(goal).second) consts.push_back(goal + " :: " + kEntityPredicate);

  std::string out = "theory Hypothesis\n  imports Main\nbegin\n\n";
  out += "typedecl entity\ntypedecl event\n\nconsts\n";
  for (const auto& c : consts) out += "  " + c + "\n";
  out += "\n";
  for (const auto& a : axioms) {
    std::string label = text::to_lower(a.kind) + "_" + std::to_string(a.index);
    out += "(* " + a.kind + " " + std::to_string(a.index) + ": " + comment_safe(a.sentence) +
           " *)\n";
    out += "axiomatization where\n  " + label + ": \"" + a.formula + "\"\n\n";
  }
  out += "\ntheorem hypothesis:\n  shows \"\xE2\x88\x83x. " + goal + " x\"\n";
  out += "  sledgehammer\n  oops\n\nend\n";
  return out;
}

Axiom parse_formalization(std::string_view reply, std::string kind, int index,
                          std::string sentence) {
  Axiom a;
  a.kind = std::move(kind);
  a.index = index;
  a.sentence = std::move(sentence);
  const auto lines = text::split_lines(strip_code_fences(reply));
  std::size_t axiom_at = lines.size();
  for (std::size_t i = lines.size(); i-- > 0;) {
    if (text::to_lower(text::trim(lines[i])).rfind("axiom:", 0) == 0) {
      axiom_at = i;
      break;
    }
  }
  for (std::size_t i = 0; i < axiom_at && i < lines.size(); ++i) {
    const std::string t = text::trim(lines[i]);
    if (t.find("::") != std::string::npos) a.consts.push_back(t);
  }
  if (axiom_at < lines.size()) {
    std::string inline_part = text::trim(text::trim(lines[axiom_at]).substr(6));
    if (!inline_part.empty()) {
      a.formula = strip_quotes(inline_part);
    } else {
      for (std::size_t i = axiom_at + 1; i < lines.size(); ++i) {
        if (!text::trim(lines[i]).empty()) {
          a.formula = strip_quotes(lines[i]);
          break;
        }
      }
    }
  } else {
    for (const auto& l : lines) {
      const std::string t = text::trim(l);
      if (!t.empty() && t.find("::") == std::string::npos) {
        a.formula = strip_quotes(t);
        break;
      }
    }
  }
  return a;
}

Theory autoformalize(const KnowledgeBase& kb, const std::string& target_word,
                     const LlmHandle& llm) {
  Theory th;
  th.source_kb = kb;
  th.target_word = target_word;
  auto formalize = [&](const std::string& sentence, const char* kind, int index) {
    const std::string prompt = render_template(TemplateId::Formalize, {{"sentence", sentence}});
    const std::string reply = llm.complete(to_messages(prompt));
    th.axioms.push_back(parse_formalization(reply, kind, index, sentence));
  };
  for (std::size_t i = 0; i < kb.facts.size(); ++i) {
    formalize(kb.facts[i], "Fact", static_cast<int>(i + 1));
  }
  for (std::size_t i = 0; i < kb.rules.size(); ++i) {
    formalize(kb.rules[i], "Rule", static_cast<int>(i + 1));
  }
  th.theorem = "\xE2\x88\x83x. " + text::predicate_name(target_word) + " x";
  th.source = assemble_theory(th.axioms, target_word);
  return th;
}

RefineResult refine_syntax(Theory theory, Prover& prover, const LlmHandle& llm) {
  RefineResult res;
  res.theory = std::move(theory);
  bool has_syntax_error = true;
  while (has_syntax_error && res.repairs < kMaxSyntaxIterations) {
    const ProverResponse r = prover.check(res.theory.source);
    ++res.checks;
    if (r.status != Verdict::SyntaxError) {
      has_syntax_error = false;
      res.last_errors.clear();
      break;
    }
    res.last_errors = r.messages;
    if (res.last_errors.empty()) res.last_errors.push_back("syntax error reported without details");
    const std::string prompt =
        render_template(TemplateId::SyntaxRefine,
                        {{"theory", res.theory.source},
                         {"errors", text::join(res.last_errors, "\n")}});
    const std::string repaired = strip_code_fences(llm.complete(to_messages(prompt)));
    if (!repaired.empty()) res.theory.source = repaired + "\n";
    ++res.repairs;
  }
  res.clean = !has_syntax_error;
  return res;
}

MajorityResult early_stop_majority(const std::string& theory, Prover& prover) {
  MajorityResult out;
  std::map<Verdict, int> count;
  std::map<Verdict, std::vector<std::string>> first_messages;
  // Three outcomes and a threshold of two: the fourth run always decides.
  while (out.runs.size() < 4) {
    ProverResponse r = prover.check(theory);
    out.runs.push_back(r.status);
    first_messages.try_emplace(r.status, std::move(r.messages));
    if (++count[r.status] == 2) {
      out.verdict = make_verdict(r.status, first_messages[r.status]);
      return out;
    }
  }
  fail(ErrorCode::PreconditionViolation, "majority vote did not converge in four runs");
}

Verification verify_description(PlayerId owner, const std::vector<std::string>& descriptions,
                                const std::string& target_word, const LlmHandle& llm,
                                Prover& prover,
                                const std::optional<std::filesystem::path>& dump_dir) {
  const KnowledgeBase kb = build_knowledge_base(owner, descriptions, target_word, llm);
  RefineResult refined = refine_syntax(autoformalize(kb, target_word, llm), prover, llm);
  Verification v;
  v.syntax_checks = refined.checks;
  v.syntax_repairs = refined.repairs;
  if (!refined.clean) {
    v.verdict = make_verdict(Verdict::SyntaxError, refined.last_errors);
  } else {
    MajorityResult m = early_stop_majority(refined.theory.source, prover);
    v.verdict = std::move(m.verdict);
    v.majority_runs = std::move(m.runs);
  }
  v.theory = std::move(refined.theory);
  if (dump_dir) {
    std::filesystem::create_directories(*dump_dir);
    const std::string name = "player" + std::to_string(owner.value) + "_" +
                             text::predicate_name(target_word) + "_" +
                             v.theory.digest().substr(0, 8) + ".thy";
    std::ofstream out(*dump_dir / name);
    out << v.theory.source;
  }
  return v;
}

bool LogicalRecord::covers(const TranscriptView& view) const {
  for (PlayerId p : view.alive_describers()) {
    if (!find(p, view.round)) return false;
  }
  return true;
}

const RecordEntry* LogicalRecord::find(PlayerId player, int round) const {
  auto it = entries.find({player, round});
  return it == entries.end() ? nullptr : &it->second;
}

const RecordEntry* LogicalRecord::latest(PlayerId player) const {
  const RecordEntry* best = nullptr;
  for (const auto& [key, e] : entries) {
    if (key.first == player && (!best || e.round > best->round)) best = &e;
  }
  return best;
}

std::string LogicalRecord::validity_text() const {
  if (entries.empty()) return "None";
  std::vector<std::string> lines;
  for (const auto& [key, e] : entries) {
    std::string line = to_string(e.player) + ": ";
    if (e.error) {
      line += "not verified (" + *e.error + ")";
    } else if (e.verdict.verdict == Verdict::Valid) {
      line += "logically valid";
    } else if (e.verdict.verdict == Verdict::Invalid) {
      line += "logically invalid";
    } else {
      line += "syntax error";
    }
    if (!e.error && e.verdict.trace) {
      line += ". " + text::join(e.verdict.trace->messages, " ");
    }
    lines.push_back(std::move(line));
  }
  return text::join(lines, "\n");
}

std::string LogicalRecord::reasoning_text() const {
  if (entries.empty()) return "None";
  std::vector<std::string> blocks;
  for (const auto& [key, e] : entries) blocks.push_back(to_string(e.player) + ":\n" + e.knowledge);
  return text::join(blocks, "\n");
}

LogicalRecord build_logical_record(const TranscriptView& view, const std::string& own_word,
                                   const LlmHandle& llm, Prover& prover,
                                   const std::optional<std::filesystem::path>& dump_dir) {
  LogicalRecord record;
  for (PlayerId p : view.alive_describers()) {
    RecordEntry e;
    e.player = p;
    e.round = view.round;
    try {
      Verification v = verify_description(p, view.descriptions_of(p), own_word, llm, prover,
                                          dump_dir);
      e.verdict = std::move(v.verdict);
      e.theory_digest = v.theory.digest();
      e.knowledge = v.theory.source_kb.to_text();
      e.theory = std::move(v.theory.source);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::ProverUnavailable) throw;
      e.verdict = make_verdict(Verdict::SyntaxError, {err.what()});
      e.error = err.what();
    }
    record.entries.emplace(std::make_pair(p, view.round), std::move(e));
  }
  return record;
}

GuessWord initial_guess(const TranscriptView& view, const LlmHandle& llm) {
  std::vector<ChatMessage> messages = to_messages(render_prompt(TemplateId::NeuroSymGuess, view));
  GuessWord g;
  g.round_set = view.round;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const std::string reply = llm.complete(messages);
    const std::string word = parse_guess_word(reply);
    if (!word.empty() && !is_own_word(word, view.own_word)) {
      g.word = word;
      g.history.push_back({view.round, word, "initial"});
      return g;
    }
    messages.push_back({ChatRole::Assistant, reply});
    messages.push_back({ChatRole::User,
                        "The guess must be a word different from your word card. "
                        "Give only the guessed word.\nopponent's word:"});
  }
  g.word = std::string(kUnknownGuess);
  g.flagged = true;
  g.history.push_back({view.round, g.word, "initial guess unusable; sentinel"});
  return g;
}

std::string_view to_string(GuessBranch b) {
  switch (b) {
    case GuessBranch::KeptValid: return "kept_valid";
    case GuessBranch::SpyUpdate: return "spy_update";
    case GuessBranch::CitizenKeep: return "citizen_keep";
    case GuessBranch::CitizenUpdate: return "citizen_update";
  }
  return "kept_valid";
}

GuessUpdate update_guess(const GuessWord& guess, IdentityHypothesis self,
                         const TranscriptView& view, const ProverVerdict& verdict,
                         const std::string& theory, const LlmHandle& llm) {
  GuessUpdate out;
  out.guess = guess;
  if (verdict.verdict == Verdict::Valid) {
    out.branch = GuessBranch::KeptValid;
    out.guess.history.push_back({view.round, guess.word, "kept: guess verified"});
    return out;
  }
  const bool spy = self == IdentityHypothesis::Spy;
  out.branch = spy ? GuessBranch::SpyUpdate : GuessBranch::CitizenKeep;
  std::string errors = "None";
  if (verdict.trace) errors = text::join(verdict.trace->messages, "\n");
  std::string candidate;
  try {
    const std::string prompt = render_prompt(
        TemplateId::NeuroSymUpdateGuess, view,
        {{"guessed_word", guess.word}, {"isabelle_code", theory}, {"error_code", errors}});
    out.raw_reply = llm.complete(to_messages(prompt));
    candidate = parse_guess_word(out.raw_reply);
  } catch (const Error& err) {
    if (err.code() != ErrorCode::BackendUnavailable) throw;
    out.flagged = true;
    out.guess.flagged = true;
    out.guess.history.push_back({view.round, guess.word, "kept: backend unavailable"});
    return out;
  }
  if (candidate.empty() || is_own_word(candidate, view.own_word)) {
    out.flagged = true;
    out.guess.flagged = true;
    out.guess.history.push_back({view.round, guess.word, "kept: unusable update reply"});
    return out;
  }
  if (text::iequals(candidate, guess.word)) {
    out.guess.history.push_back(
        {view.round, guess.word, spy ? "spy: unchanged by model" : "citizen: kept"});
    return out;
  }
  if (!spy) out.branch = GuessBranch::CitizenUpdate;
  out.changed = true;
  out.guess.word = candidate;
  out.guess.round_set = view.round;
  out.guess.history.push_back({view.round, candidate, spy ? "spy: updated" : "citizen: updated"});
  return out;
}

KeywordConsistencyOracle::KeywordConsistencyOracle(const std::vector<WordPair>& lexicon) {
  for (const auto& p : lexicon) {
    refs_[text::to_lower(p.citizen_word)] = {p.citizen_reference, p.spy_reference};
    refs_[text::to_lower(p.spy_word)] = {p.spy_reference, p.citizen_reference};
  }
}

bool KeywordConsistencyOracle::consistent(const std::string& word,
                                          const std::vector<std::string>& descriptions) const {
  auto it = refs_.find(text::to_lower(word));
  if (it == refs_.end()) return true;
  const auto own = text::content_tokens(it->second.first);
  const auto contrast = text::content_tokens(it->second.second);
  for (const auto& d : descriptions) {
    int with_own = 0;
    int with_contrast = 0;
    for (const auto& t : text::content_tokens(d)) {
      with_own += own.count(t) > 0 ? 1 : 0;
      with_contrast += contrast.count(t) > 0 ? 1 : 0;
    }
    if (with_contrast > with_own) return false;
  }
  return true;
}

ConsistencyReport consistency_check(const std::vector<Description>& descriptions,
                                    const std::map<PlayerId, std::string>& words,
                                    const ConsistencyOracle& oracle) {
  std::map<PlayerId, std::map<int, std::string>> by_player;
  for (const auto& d : descriptions) by_player[d.player][d.round] = d.text;
  ConsistencyReport report;
  for (const auto& [player, rounds] : by_player) {
    auto w = words.find(player);
    if (w == words.end()) continue;
    std::vector<std::string> cumulative;
    for (const auto& [round, t] : rounds) {
      cumulative.push_back(t);
      ++report.checks;
      if (!oracle.consistent(w->second, cumulative)) report.violations.push_back({player, round});
    }
  }
  return report;
}

}  // namespace undercover
