#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace undercover::text {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

// Collapses every run of whitespace to one space and trims the ends.
std::string normalize_whitespace(std::string_view s);

std::vector<std::string> split_lines(std::string_view s);

bool contains_icase(std::string_view haystack, std::string_view needle);
bool iequals(std::string_view a, std::string_view b);

// Lowercase alphanumeric tokens (apostrophes dropped).
std::vector<std::string> tokenize(std::string_view s);

// tokenize() minus a small English stopword list.
std::set<std::string> content_tokens(std::string_view s);

bool is_stopword(std::string_view token);

// "Earl Grey Tea" -> "EarlGreyTea"; always starts with a letter.
std::string predicate_name(std::string_view word);

// Replaces case-insensitive occurrences of `word` in `s` with `replacement`.
std::string mask_word(std::string_view s, std::string_view word,
                      std::string_view replacement);

// First sentence of `s` (up to and including the first terminal mark).
std::string first_sentence(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace undercover::text
