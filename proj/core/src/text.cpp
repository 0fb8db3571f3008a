#include "undercover/text.hpp"

#include <algorithm>
#include <cctype>

namespace undercover::text {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)); }

const std::set<std::string_view> kStopwords = {
    "a",     "an",    "and",   "are",   "as",    "at",    "be",   "by",
    "for",   "from",  "has",   "have",  "in",    "into",  "is",   "it",
    "its",   "of",    "on",    "or",    "that",  "the",   "their", "them",
    "they",  "this",  "to",    "was",   "were",  "which", "with", "who",
    "can",   "often", "type",  "kind",  "thing", "some",  "something",
    "one",   "very",  "also",  "usually", "known", "typically", "mostly",
    "many",  "most",  "not",   "but",   "than",  "what"};

}  // namespace

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string normalize_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::vector<std::string> split_lines(std::string_view s) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t end = s.find('\n', start);
    if (end == std::string_view::npos) end = s.size();
    std::string_view line = s.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    start = end + 1;
  }
  return lines;
}

bool contains_icase(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return true;
  return to_lower(haystack).find(to_lower(needle)) != std::string::npos;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && to_lower(a) == to_lower(b);
}

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : s) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::isalnum(u) || u >= 0x80) {
      cur.push_back(static_cast<char>(std::tolower(u)));
    } else if (c == '\'') {
      continue;
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

bool is_stopword(std::string_view token) {
  return kStopwords.count(token) > 0;
}

std::set<std::string> content_tokens(std::string_view s) {
  std::set<std::string> out;
  for (auto& t : tokenize(s)) {
    if (!is_stopword(t)) out.insert(std::move(t));
  }
  return out;
}

std::string predicate_name(std::string_view word) {
  std::string out;
  bool upper_next = true;
  for (char c : word) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      out.push_back(upper_next ? static_cast<char>(std::toupper(u)) : c);
      upper_next = false;
    } else if (c != '\'') {
      upper_next = true;
    }
  }
  if (out.empty() || !std::isalpha(static_cast<unsigned char>(out.front()))) {
    out.insert(out.begin(), 'W');
  }
  return out;
}

std::string mask_word(std::string_view s, std::string_view word,
                      std::string_view replacement) {
  if (word.empty()) return std::string(s);
  const std::string lower = to_lower(s);
  const std::string needle = to_lower(word);
  std::string out;
  std::size_t pos = 0;
  while (true) {
    std::size_t hit = lower.find(needle, pos);
    if (hit == std::string::npos) break;
    out.append(s.substr(pos, hit - pos));
    out.append(replacement);
    pos = hit + needle.size();
  }
  out.append(s.substr(pos));
  return out;
}

std::string first_sentence(std::string_view s) {
  const std::string t = trim(s);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] == '.' || t[i] == '!' || t[i] == '?') {
      return t.substr(0, i + 1);
    }
  }
  return t;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

}  // namespace undercover::text
