#include "undercover/mock_llm.hpp"

#include <algorithm>
#include <optional>

#include "undercover/hash.hpp"
#include "undercover/prover.hpp"
#include "undercover/text.hpp"

namespace undercover {
namespace {

enum class Prompt {
  Describe,
  AttDescribe,
  NeuroSymDescribe,
  Vote,
  AttVote,
  NeuroSymVote,
  Guess,
  UpdateGuess,
  Rules,
  Formalize,
  Repair,
};

std::optional<Prompt> classify(const std::string& m) {
  auto has = [&](std::string_view s) { return m.find(s) != std::string::npos; };
  if (has("Provided hypothesis word:")) return Prompt::Rules;
  if (has("A kettle is a device") && has("Sentence:")) return Prompt::Formalize;
  if (has("Corrected theory:")) return Prompt::Repair;
  if (has("have a guess about the opponent's word")) return Prompt::Guess;
  if (has("has been eliminated in last round")) return Prompt::UpdateGuess;
  const bool symbolic = has("Logical validity of alive players' descriptions");
  if (has("Now, every player has described their words.")) {
    if (symbolic) return Prompt::NeuroSymVote;
    return has("Reasoning Process:") ? Prompt::AttVote : Prompt::Vote;
  }
  if (has("describe your word card")) {
    if (symbolic) return Prompt::NeuroSymDescribe;
    return has("Reasoning Process:") ? Prompt::AttDescribe : Prompt::Describe;
  }
  return std::nullopt;
}

// Words of the mock's own phrasing; never useful as a guess.
const std::set<std::string>& phrase_words() {
  static const std::set<std::string> words = {
      "associated", "think",  "comes", "brings", "mind",   "people",
      "often",      "link",   "known", "something", "being", "distinctive",
      "round",      "player", "none"};
  return words;
}

std::string line_value(const std::string& prompt, std::string_view prefix) {
  const std::size_t pos = prompt.rfind(prefix);
  if (pos == std::string::npos) return "";
  const std::size_t start = pos + prefix.size();
  const std::size_t end = prompt.find('\n', start);
  std::string v = text::trim(prompt.substr(start, end == std::string::npos ? end : end - start));
  while (!v.empty() && v.back() == '.') v.pop_back();
  return v;
}

int int_value(const std::string& prompt, std::string_view prefix) {
  const std::string v = line_value(prompt, prefix);
  try {
    return v.empty() ? 0 : std::stoi(v);
  } catch (const std::exception&) {
    return 0;
  }
}

std::vector<int> player_list(const std::string& s) {
  std::vector<int> out;
  const auto tokens = text::tokenize(s);
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    if (tokens[i] == "player") {
      try {
        out.push_back(std::stoi(tokens[i + 1]));
      } catch (const std::exception&) {
      }
    }
  }
  return out;
}

// "Player N:" blocks with "Round r: text" lines under a history header.
std::map<int, std::vector<std::string>> history_section(const std::string& prompt,
                                                        std::string_view header) {
  std::map<int, std::vector<std::string>> out;
  const std::size_t pos = prompt.rfind(header);
  if (pos == std::string::npos) return out;
  const auto lines = text::split_lines(prompt.substr(pos + header.size()));
  int current = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string& l = lines[i];
    if (l.rfind("Player ", 0) == 0 && !l.empty() && l.back() == ':') {
      current = std::atoi(l.c_str() + 7);
    } else if (l.rfind("Round ", 0) == 0 && current > 0) {
      const std::size_t colon = l.find(':');
      out[current].push_back(text::trim(l.substr(colon == std::string::npos ? 0 : colon + 1)));
    } else {
      break;
    }
  }
  return out;
}

std::string section_after(const std::string& prompt, std::string_view header) {
  const std::size_t pos = prompt.rfind(header);
  if (pos == std::string::npos) return "";
  return prompt.substr(pos + header.size());
}

int overlap(const std::string& s, const std::vector<std::string>& tokens) {
  const auto content = text::content_tokens(s);
  int n = 0;
  for (const auto& t : tokens) n += content.count(t) > 0 ? 1 : 0;
  return n;
}

enum class SelfView { Unknown, Citizen, Spy };

std::string assessment_sentence(SelfView v) {
  switch (v) {
    case SelfView::Unknown:
      return "There are no other descriptions yet, so I cannot tell whether I am the spy.";
    case SelfView::Citizen:
      return "Most descriptions fit my word card, so I am not the spy.";
    case SelfView::Spy:
      return "Most descriptions do not fit my word card, so I am likely the spy.";
  }
  return "";
}

}  // namespace

MockLlm::MockLlm(const std::vector<WordPair>& lexicon) : MockLlm(lexicon, Options{}) {}

MockLlm::MockLlm(const std::vector<WordPair>& lexicon, Options options) : options_(options) {
  for (const auto& p : lexicon) {
    references_[text::to_lower(p.citizen_word)] = p.citizen_reference;
    references_[text::to_lower(p.spy_word)] = p.spy_reference;
    for (const auto& w : {p.citizen_word, p.spy_word}) {
      for (const auto& t : text::tokenize(w)) word_tokens_.insert(t);
    }
  }
}

double MockLlm::unit(std::uint64_t h) const {
  return static_cast<double>(splitmix64(h ^ options_.seed) >> 11) * 0x1.0p-53;
}

std::vector<std::string> MockLlm::reference_tokens(const std::string& word) const {
  std::vector<std::string> out;
  auto it = references_.find(text::to_lower(word));
  if (it == references_.end()) return out;
  for (const auto& t : text::tokenize(it->second)) {
    if (t.size() < 3 || text::is_stopword(t) || word_tokens_.count(t) > 0) continue;
    if (phrase_words().count(t) > 0) continue;
    if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
  }
  return out;
}

std::vector<std::string> MockLlm::generic_tokens(const std::string& word) const {
  const std::string key = text::to_lower(word);
  std::set<std::string> elsewhere;
  for (const auto& [w, ref] : references_) {
    if (w == key) continue;
    for (const auto& t : text::tokenize(ref)) elsewhere.insert(t);
  }
  std::vector<std::string> out;
  for (const auto& t : reference_tokens(word)) {
    if (elsewhere.count(t)) out.push_back(t);
  }
  return out;
}

std::string MockLlm::complete(const ChatRequest& request) {
  std::optional<Prompt> kind;
  const std::string* prompt = nullptr;
  for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it) {
    if (it->role != ChatRole::User) continue;
    if ((kind = classify(it->content))) {
      prompt = &it->content;
      break;
    }
  }
  if (!kind) return "I am not sure what to say.";
  const std::uint64_t salt = fnv1a64(request_hash(request));
  switch (*kind) {
    case Prompt::Describe: return describe(*prompt, salt, false);
    case Prompt::AttDescribe:
    case Prompt::NeuroSymDescribe: return describe(*prompt, salt, true);
    case Prompt::Vote: return vote(*prompt, salt, false, false);
    case Prompt::AttVote: return vote(*prompt, salt, true, false);
    case Prompt::NeuroSymVote: return vote(*prompt, salt, true, true);
    case Prompt::Guess: return guess(*prompt, salt);
    case Prompt::UpdateGuess: return update_guess(*prompt, salt);
    case Prompt::Rules: return rules(*prompt);
    case Prompt::Formalize: return formalize(*prompt);
    case Prompt::Repair: return repair(*prompt);
  }
  return "I am not sure what to say.";
}

namespace {

SelfView assess(const std::map<int, std::vector<std::string>>& history, int self,
                const std::vector<std::string>& own_tokens) {
  int others = 0;
  int fitting = 0;
  for (const auto& [player, texts] : history) {
    if (player == self) continue;
    ++others;
    if (overlap(text::join(texts, " "), own_tokens) > 0) ++fitting;
  }
  if (others == 0) return SelfView::Unknown;
  return 2 * fitting >= others ? SelfView::Citizen : SelfView::Spy;
}

// Most frequent usable tokens in a set of texts, best first.
std::vector<std::string> frequent_tokens(const std::vector<std::string>& texts,
                                         const std::set<std::string>& exclude) {
  std::map<std::string, int> freq;
  for (const auto& t : texts) {
    for (const auto& tok : text::content_tokens(t)) {
      if (tok.size() < 3 || exclude.count(tok) > 0 || phrase_words().count(tok) > 0) continue;
      ++freq[tok];
    }
  }
  std::vector<std::pair<int, std::string>> ranked;
  for (const auto& [tok, n] : freq) ranked.emplace_back(-n, tok);
  std::sort(ranked.begin(), ranked.end());
  std::vector<std::string> out;
  for (const auto& [n, tok] : ranked) out.push_back(tok);
  return out;
}

std::vector<std::string> all_texts(const std::map<int, std::vector<std::string>>& history,
                                   int skip) {
  std::vector<std::string> out;
  for (const auto& [player, texts] : history) {
    if (player == skip) continue;
    out.insert(out.end(), texts.begin(), texts.end());
  }
  return out;
}

std::string phrase(std::uint64_t h, const std::vector<std::string>& picked) {
  std::string list;
  for (std::size_t i = 0; i < picked.size(); ++i) {
    if (i > 0) list += i + 1 == picked.size() ? " and " : ", ";
    list += picked[i];
  }
  switch (h % 4) {
    case 0: return "It is associated with " + list + ".";
    case 1: return "It brings to mind " + list + ".";
    case 2: return "People often link it with " + list + ".";
    default: return "You might think of " + list + " when it comes up.";
  }
}

std::vector<std::string> pick(const std::vector<std::string>& pool, std::size_t k,
                              std::uint64_t h) {
  std::vector<std::string> out;
  if (pool.empty()) return out;
  k = std::min(k, pool.size());
  for (std::uint64_t i = 0; out.size() < k && i < 64; ++i) {
    const std::string& t = pool[splitmix64(h + i) % pool.size()];
    if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
  }
  return out;
}

}  // namespace

std::string MockLlm::describe(const std::string& prompt, std::uint64_t salt,
                              bool structured) const {
  const std::string word = line_value(prompt, "Your word card is ");
  const int self = int_value(prompt, "You are player ");
  const auto own = reference_tokens(word);
  const auto history = history_section(prompt, "Alive Players' descriptions history:");
  const SelfView view = structured ? assess(history, self, own) : SelfView::Unknown;

  std::vector<std::string> picked;
  std::string plan;
  if (view == SelfView::Spy) {
    std::set<std::string> exclude(word_tokens_.begin(), word_tokens_.end());
    const auto borrowed = frequent_tokens(all_texts(history, self), exclude);
    picked = pick(borrowed, 1, salt);
    const auto generic = generic_tokens(word);
    for (const auto& t : pick(generic.empty() ? own : generic, 1, salt >> 7)) {
      if (std::find(picked.begin(), picked.end(), t) == picked.end()) picked.push_back(t);
    }
    plan = "I will blend in with the other descriptions without lying about my word.";
  } else if (const auto generic = generic_tokens(word);
             !generic.empty() && unit(salt ^ 0x5bd1e995ULL) < 0.5) {
    // Lead with a trait the word shares with related concepts.
    picked = pick(generic, 1, salt);
    for (const auto& t : pick(own, 1 + (salt >> 3) % 2, salt >> 9)) {
      if (std::find(picked.begin(), picked.end(), t) == picked.end()) picked.push_back(t);
    }
    plan = "I will describe my word card in a way that fits the other descriptions.";
  } else {
    picked = pick(own, 2 + (salt >> 3) % 2, salt);
    plan = "I will describe my word card in a way that fits the other descriptions.";
  }
  const std::string sentence =
      picked.empty() ? "It is something people know." : phrase(salt >> 13, picked);
  if (!structured) return sentence;
  return "Reasoning Process:\nstep 1: " + assessment_sentence(view) + "\nstep 2: " + plan +
         "\nDescription:\n" + sentence;
}

std::string MockLlm::vote(const std::string& prompt, std::uint64_t salt, bool structured,
                          bool neurosym) const {
  const std::string word = line_value(prompt, "Your word card is ");
  const int self = int_value(prompt, "You are player ");
  const auto own = reference_tokens(word);
  std::vector<int> candidates = player_list(line_value(prompt, "Current Alive players are: "));
  candidates.erase(std::remove(candidates.begin(), candidates.end(), self), candidates.end());
  if (candidates.empty()) return "I abstain.";
  const auto history = history_section(prompt, "Alive Players' descriptions history:");
  const std::string validity =
      neurosym ? section_after(prompt, "Logical validity of alive players' descriptions against "
                                       "your word card:")
               : "";

  std::vector<std::pair<int, int>> scored;  // (score, player)
  for (int c : candidates) {
    int score = 0;
    if (auto it = history.find(c); it != history.end()) {
      // Coarse judgement: a description either fits the word or it does not.
      score = std::min(overlap(text::join(it->second, " "), own), 1);
    }
    if (neurosym && validity.find("Player " + std::to_string(c) + ": logically invalid") !=
                        std::string::npos) {
      score -= 2;
    }
    scored.emplace_back(score, c);
  }
  const int best = std::min_element(scored.begin(), scored.end())->first;
  std::vector<int> lowest;
  for (const auto& [s, c] : scored) {
    if (s == best) lowest.push_back(c);
  }
  int target = lowest[salt % lowest.size()];
  if (unit(salt ^ 0x9e3779b97f4a7c15ULL) < options_.vote_noise) {
    target = candidates[splitmix64(salt) % candidates.size()];
  }
  const std::string choice = "Player " + std::to_string(target);
  if (!structured) return choice;
  const SelfView view = assess(history, self, own);
  std::string reply = "Reasoning Process:\nstep 1: " + assessment_sentence(view) + "\nstep 2: ";
  reply += view == SelfView::Spy ? "I will blend in and vote for " + choice + "."
                                 : choice + " is likely the spy.";
  if (neurosym) {
    reply += "\nstep 3: The logical validity results were taken into account.";
    reply += "\nstep 4: I vote for " + choice + ".";
  }
  return reply + "\n\nVote:\n" + choice;
}

std::string MockLlm::guess(const std::string& prompt, std::uint64_t salt) const {
  const std::string word = line_value(prompt, "Your word card is ");
  const int self = int_value(prompt, "You are player ");
  std::set<std::string> exclude(word_tokens_.begin(), word_tokens_.end());
  for (const auto& t : reference_tokens(word)) exclude.insert(t);
  const auto history = history_section(prompt, "Alive Players' descriptions history:");
  const auto ranked = frequent_tokens(all_texts(history, self), exclude);
  if (!ranked.empty()) return ranked.front();
  static const char* kFallbacks[] = {"mystery", "puzzle", "riddle"};
  return kFallbacks[salt % 3];
}

std::string MockLlm::update_guess(const std::string& prompt, std::uint64_t salt) const {
  const std::string word = line_value(prompt, "Your word card is ");
  const int self = int_value(prompt, "You are player ");
  const std::string current = line_value(prompt, "You have already guessed the opponent's word as: ");
  const auto own = reference_tokens(word);
  const auto others = history_section(prompt, "Alive Players' descriptions history:");
  const auto voted_out = history_section(prompt, "Voted out player's description history:");
  const SelfView view = assess(others, self, own);

  std::set<std::string> exclude(word_tokens_.begin(), word_tokens_.end());
  for (const auto& t : own) exclude.insert(t);
  exclude.insert(text::to_lower(current));
  std::string next = current;
  const bool update = view == SelfView::Spy || (salt & 1U) == 1U;
  if (update) {
    auto ranked = frequent_tokens(all_texts(voted_out, 0), exclude);
    if (ranked.empty()) ranked = frequent_tokens(all_texts(others, self), exclude);
    if (!ranked.empty()) next = ranked.front();
  }
  return "Reasoning Process:\nstep 1: I compared the voted out player's descriptions with my "
         "word card.\nstep 2: " +
         assessment_sentence(view) + "\nstep 3: " +
         (next == current ? "The proof does not justify a change, so I keep my guess."
                          : "The proof shows the guess does not explain the descriptions.") +
         "\nopponent's word: " + next;
}

std::string MockLlm::rules(const std::string& prompt) const {
  const std::string facts_block = section_after(prompt, "Provided facts sentences:");
  const std::size_t goal_at = facts_block.find("Provided hypothesis word:");
  const std::string facts = facts_block.substr(0, goal_at);
  std::string goal;
  if (goal_at != std::string::npos) {
    for (const auto& l : text::split_lines(facts_block.substr(goal_at + 25))) {
      if (!text::trim(l).empty()) {
        goal = text::trim(l);
        break;
      }
    }
  }
  std::vector<std::string> tokens;
  for (const auto& t : text::tokenize(facts)) {
    if (t.size() < 3 || text::is_stopword(t) || phrase_words().count(t) > 0) continue;
    if (std::find(tokens.begin(), tokens.end(), t) == tokens.end()) tokens.push_back(t);
    if (tokens.size() == 3) break;
  }
  const std::string features = tokens.empty() ? "these features" : text::join(tokens, " and ");
  return "If something is described by " + features + ", it might be " + goal + ".\n" + goal +
         " is usually recognised by its distinctive features.";
}

std::string MockLlm::formalize(const std::string& prompt) const {
  std::string sentence;
  const std::string tail = section_after(prompt, "Sentence:");
  for (const auto& l : text::split_lines(tail)) {
    if (!text::trim(l).empty()) {
      sentence = text::trim(l);
      break;
    }
  }
  std::vector<std::string> preds;
  for (const auto& t : text::tokenize(sentence)) {
    if (t.size() < 3 || text::is_stopword(t)) continue;
    const std::string p = text::predicate_name(t);
    if (std::find(preds.begin(), preds.end(), p) == preds.end()) preds.push_back(p);
    if (preds.size() == 3) break;
  }
  if (preds.empty()) preds.push_back("Thing");
  std::string consts = "Consts:\n";
  for (const auto& p : preds) consts += p + " :: \"entity \xE2\x87\x92 bool\"\n";
  std::string formula = "\xE2\x88\x80x. " + preds.front() + " x";
  for (std::size_t i = 1; i < preds.size(); ++i) {
    formula += (i + 1 == preds.size() ? " \xE2\x9F\xB6 " : " \xE2\x88\xA7 ") + preds[i] + " x";
  }
  if (unit(fnv1a64(sentence)) < options_.syntax_error_rate) {
    formula += " " + std::string(kSyntaxErrorMarker);
  }
  return consts + "Axiom:\n\"" + formula + "\"";
}

std::string MockLlm::repair(const std::string& prompt) const {
  const std::size_t start = prompt.find("Theory:\n");
  const std::size_t end = prompt.rfind("\nSyntax errors:");
  if (start == std::string::npos || end == std::string::npos || end < start) return "";
  std::string theory = prompt.substr(start + 8, end - start - 8);
  const std::string marker = " " + std::string(kSyntaxErrorMarker);
  std::size_t pos = 0;
  while ((pos = theory.find(marker, pos)) != std::string::npos) theory.erase(pos, marker.size());
  pos = 0;
  while ((pos = theory.find(kSyntaxErrorMarker, pos)) != std::string::npos) {
    theory.erase(pos, kSyntaxErrorMarker.size());
  }
  return theory;
}

}  // namespace undercover
