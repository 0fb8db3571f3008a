#include "undercover/parse.hpp"

#include <algorithm>
#include <regex>

#include "undercover/error.hpp"
#include "undercover/text.hpp"

namespace undercover {
namespace {

// Folds typographic apostrophes to ASCII so the regexes stay ASCII.
std::string plain_quotes(std::string_view s) {
  std::string out(s);
  for (std::string_view curly : {"\xE2\x80\x99", "\xE2\x80\x98"}) {
    std::size_t pos = 0;
    while ((pos = out.find(curly, pos)) != std::string::npos) {
      out.replace(pos, curly.size(), "'");
      ++pos;
    }
  }
  return out;
}

// Lowercase copy of plain_quotes() output; byte offsets line up with it.
std::string fold(std::string_view s) { return text::to_lower(s); }

// Position just past the last occurrence of `marker` (already lowercase) in
// the folded text, or npos.
std::size_t after_last(const std::string& folded, std::string_view marker) {
  const std::size_t pos = folded.rfind(marker);
  return pos == std::string::npos ? pos : pos + marker.size();
}

int count_terminal_runs(std::string_view s) {
  int runs = 0;
  bool in_run = false;
  for (char c : s) {
    const bool terminal = c == '.' || c == '!' || c == '?';
    if (terminal && !in_run) ++runs;
    in_run = terminal;
  }
  return runs;
}

std::string strip_wrapping(std::string s) {
  static constexpr std::string_view kWrap = "[](){}\"'`*<>";
  s = text::trim(s);
  while (!s.empty() && kWrap.find(s.front()) != std::string_view::npos) s.erase(0, 1);
  while (!s.empty() && (kWrap.find(s.back()) != std::string_view::npos || s.back() == '.')) {
    s.pop_back();
  }
  return text::trim(s);
}

PlayerId checked_player(long long n, int n_players, std::string_view raw) {
  if (n < 1 || n > n_players) {
    fail(ErrorCode::OutOfRange, "vote names player " + std::to_string(n) +
                                    " outside 1.." + std::to_string(n_players) +
                                    ": " + std::string(raw.substr(0, 80)));
  }
  return PlayerId{static_cast<int>(n)};
}

const std::string kModifiers =
    "(?:\\s+(?:not|likely|unlikely|probably|possibly|most|very|definitely|"
    "certainly|perhaps|maybe|indeed|actually|really|surely|also|still))*";

}  // namespace

std::string_view to_string(IdentityHypothesis h) {
  return h == IdentityHypothesis::Spy ? "spy" : "citizen";
}

std::string parse_description(std::string_view raw_in) {
  const std::string raw = plain_quotes(raw_in);
  const std::string folded = fold(raw);
  const std::size_t start = after_last(folded, "description:");
  if (start != std::string::npos) {
    for (const auto& line : text::split_lines(raw.substr(start))) {
      std::string t = strip_wrapping(line);
      if (t.empty()) continue;
      // strip_wrapping drops a trailing period; keep the sentence's own mark.
      const std::string trimmed = text::trim(line);
      const char last = trimmed.back();
      if ((last == '.' || last == '!' || last == '?') && t.back() != last) t += last;
      return t;
    }
    fail(ErrorCode::Unparseable, "empty text after Description marker");
  }
  std::vector<std::string> lines;
  for (const auto& line : text::split_lines(raw)) {
    std::string t = text::trim(line);
    if (!t.empty()) lines.push_back(std::move(t));
  }
  if (lines.size() == 1 && count_terminal_runs(lines[0]) <= 1) return lines[0];
  fail(ErrorCode::Unparseable, "reply has no Description marker and is not one sentence");
}

PlayerId parse_vote(std::string_view raw, int n_players) {
  const std::string folded = fold(plain_quotes(raw));
  static const std::regex kMarker("vot(?:e|es|ed|ing)\\b");
  static const std::regex kPlayer("player\\s*#?\\s*(\\d+)");
  std::vector<std::size_t> markers;
  for (auto it = std::sregex_iterator(folded.begin(), folded.end(), kMarker);
       it != std::sregex_iterator(); ++it) {
    markers.push_back(static_cast<std::size_t>(it->position()));
  }
  for (auto m = markers.rbegin(); m != markers.rend(); ++m) {
    std::smatch match;
    const std::string tail = folded.substr(*m);
    if (std::regex_search(tail, match, kPlayer)) {
      return checked_player(std::stoll(match[1].str()), n_players, raw);
    }
  }
  static const std::regex kBare("^(?:player\\s*)?(\\d+)\\s*[.!]?$");
  std::smatch bare;
  const std::string whole = text::trim(folded);
  if (std::regex_match(whole, bare, kBare)) {
    return checked_player(std::stoll(bare[1].str()), n_players, raw);
  }
  fail(ErrorCode::Unparseable, "no vote found in reply");
}

std::optional<std::string> reasoning_section(std::string_view raw_in) {
  const std::string raw = plain_quotes(raw_in);
  const std::string folded = fold(raw);
  std::size_t start = std::string::npos;
  for (std::string_view marker : {"reasoning process:", "intention selection:"}) {
    const std::size_t pos = folded.find(marker);
    if (pos != std::string::npos && (start == std::string::npos || pos < start)) {
      start = pos + marker.size();
    }
  }
  if (start == std::string::npos) return std::nullopt;
  std::size_t end = folded.size();
  for (std::string_view marker : {"description:", "vote:"}) {
    const std::size_t pos = folded.find(marker, start);
    if (pos != std::string::npos) end = std::min(end, pos);
  }
  return text::trim(std::string_view(raw).substr(start, end - start));
}

IdentityHypothesis parse_self_identity(std::string_view rationale) {
  std::string s = fold(plain_quotes(rationale));
  static const std::regex kHedge(
      "\\b(?:if|whether)\\s+i\\s*(?:am|'m)" + kModifiers +
      "\\s+(?:the\\s+|a\\s+)?(?:spy|citizen)(?:\\s+or\\s+not)?");
  s = std::regex_replace(s, kHedge, " ");

  static const std::regex kSpyClaim(
      "\\bi\\s*(?:am|'m|might be|may be|could be|must be)(" + kModifiers +
      ")\\s+(?:the\\s+|a\\s+)?spy\\b");
  static const std::regex kCitizenClaim(
      "\\bi\\s*(?:am|'m|might be|may be|could be|must be)(" + kModifiers +
      ")\\s+(?:the\\s+|a\\s+)?citizen\\b");

  std::optional<std::pair<long, IdentityHypothesis>> last;
  auto consider = [&](const std::regex& re, IdentityHypothesis positive,
                      IdentityHypothesis negated) {
    for (auto it = std::sregex_iterator(s.begin(), s.end(), re);
         it != std::sregex_iterator(); ++it) {
      const std::string mods = (*it)[1].str();
      const bool negative = std::regex_search(mods, std::regex("\\b(?:not|unlikely)\\b"));
      const long pos = static_cast<long>(it->position());
      if (!last || pos >= last->first) last = {pos, negative ? negated : positive};
    }
  };
  consider(kSpyClaim, IdentityHypothesis::Spy, IdentityHypothesis::Citizen);
  consider(kCitizenClaim, IdentityHypothesis::Citizen, IdentityHypothesis::Spy);
  return last ? last->second : IdentityHypothesis::Citizen;
}

std::vector<PlayerId> parse_suspects(std::string_view rationale) {
  const std::string s = fold(plain_quotes(rationale));
  static const std::regex kNamed(
      "player\\s*(\\d+)(?:'s description)?\\s+(?:is|seems|appears|might|could|must|may)\\b"
      "([^.;,]{0,40}?)\\b(?:spy|suspicious)\\b");
  static const std::regex kVoteAs(
      "vote\\s+(?:for\\s+)?player\\s*(\\d+)\\s+as\\s+(?:the\\s+)?spy\\b");
  std::vector<std::pair<long, int>> found;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), kNamed);
       it != std::sregex_iterator(); ++it) {
    const std::string middle = (*it)[2].str();
    if (std::regex_search(middle, std::regex("\\bnot\\b|n't\\b"))) continue;
    found.emplace_back(it->position(), std::stoi((*it)[1].str()));
  }
  for (auto it = std::sregex_iterator(s.begin(), s.end(), kVoteAs);
       it != std::sregex_iterator(); ++it) {
    found.emplace_back(it->position(), std::stoi((*it)[1].str()));
  }
  std::sort(found.begin(), found.end());
  std::vector<PlayerId> out;
  for (const auto& [pos, id] : found) {
    const PlayerId p{id};
    if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
  }
  return out;
}

std::string parse_guess_word(std::string_view raw_in) {
  const std::string raw = plain_quotes(raw_in);
  const std::string folded = fold(raw);
  const std::size_t start = after_last(folded, "opponent's word:");
  std::string candidate;
  if (start != std::string::npos) {
    for (const auto& line : text::split_lines(raw.substr(start))) {
      std::string t = strip_wrapping(line);
      if (!t.empty()) {
        candidate = t;
        break;
      }
    }
  } else {
    std::vector<std::string> lines;
    for (const auto& line : text::split_lines(raw)) {
      std::string t = strip_wrapping(line);
      if (!t.empty()) lines.push_back(std::move(t));
    }
    if (lines.size() == 1 && text::tokenize(lines[0]).size() <= 5) candidate = lines[0];
  }
  if (text::iequals(candidate, "your updated or unchanged guessed word")) return "";
  return candidate;
}

}  // namespace undercover
