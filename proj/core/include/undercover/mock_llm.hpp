#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "undercover/chat.hpp"
#include "undercover/game.hpp"

namespace undercover {

// Offline stand-in for a chat model. Every reply is a pure function of the
// request and the constructor arguments. It recognises the shipped templates
// by fixed phrases in the most recent templated user message and answers
// in the format that template asks for.
//
// The lexicon plays the part of world knowledge: descriptions draw on the
// own word's reference sentence and never contain a token of any lexicon
// word, so no description or guess can name a word card.
class MockLlm final : public ChatBackend {
 public:
  struct Options {
    std::uint64_t seed = 0;
    double vote_noise = 0.3;         // chance of voting for a random candidate
    double syntax_error_rate = 0.1;  // chance a formalization carries an error
  };

  explicit MockLlm(const std::vector<WordPair>& lexicon);
  MockLlm(const std::vector<WordPair>& lexicon, Options options);
  std::string complete(const ChatRequest& request) override;

 private:
  std::string describe(const std::string& prompt, std::uint64_t salt, bool structured) const;
  std::string vote(const std::string& prompt, std::uint64_t salt, bool structured,
                   bool neurosym) const;
  std::string guess(const std::string& prompt, std::uint64_t salt) const;
  std::string update_guess(const std::string& prompt, std::uint64_t salt) const;
  std::string rules(const std::string& prompt) const;
  std::string formalize(const std::string& prompt) const;
  std::string repair(const std::string& prompt) const;

  std::vector<std::string> reference_tokens(const std::string& word) const;
  // Reference tokens that also occur in some other lexicon reference.
  std::vector<std::string> generic_tokens(const std::string& word) const;
  double unit(std::uint64_t h) const;

  std::map<std::string, std::string> references_;  // lowercase word -> sentence
  std::set<std::string> word_tokens_;
  Options options_;
};

}  // namespace undercover
