#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "undercover/chat.hpp"
#include "undercover/game.hpp"
#include "undercover/neurosym.hpp"
#include "undercover/parse.hpp"

namespace undercover {

enum class AgentKind { StandardNli, StandardAttNli, NeuroSymAttNli, Scripted };
std::string_view to_string(AgentKind kind);
AgentKind agent_kind_from_string(std::string_view s);  // throws InvalidConfig

// Fixed actions for Scripted agents, keyed by seat then round. Missing
// entries fall back like an unparseable reply would.
struct ActionScript {
  std::map<PlayerId, std::map<int, std::string>> descriptions;
  std::map<PlayerId, std::map<int, PlayerId>> votes;
};

struct AgentSpec {
  AgentKind kind = AgentKind::StandardNli;
  std::string backend;  // key into the configured backends
  std::optional<ActionScript> script;

  // Scripted exactly when a script is present.
  void validate() const;
};

struct IdentityAttribution {
  IdentityHypothesis self = IdentityHypothesis::Citizen;
  std::map<PlayerId, IdentityHypothesis> others;
  std::string rationale;  // kept in the record, never shown to other agents
};

// Spy and suspect claims from a rationale, restricted to the view's other
// alive players. A self-declared spy marks everyone else Citizen; a citizen
// that names nobody marks its vote target, if any, as the Spy.
IdentityAttribution attribution_from_rationale(const TranscriptView& view,
                                               const std::string& rationale,
                                               std::optional<PlayerId> vote_target = {});

struct AgentAction {
  enum class Type { Described, Voted };
  Type type = Type::Described;
  std::string text;  // Described
  PlayerId target;   // Voted
  std::string raw_reply;
  int parse_attempts = 0;
  bool fallback_used = false;
  std::optional<IdentityAttribution> attribution;
  std::vector<std::string> rejections;  // why earlier replies were refused
};

// Neuro-symbolic inputs for one action.
struct NeuroSymInputs {
  const LogicalRecord* record = nullptr;
  const GuessWord* guess = nullptr;
};

// One seat at the table. Holds its own multi-round chat history; nothing
// in it is shared with other agents.
class Agent {
 public:
  Agent(PlayerId seat, AgentSpec spec, LlmHandle llm, std::string own_reference,
        int max_parse_retries);

  // Dispatches on kind and on the view's stage (Describing or Voting).
  // `correction` is appended to the prompt, e.g. after a duplicate.
  AgentAction act(const TranscriptView& view, const NeuroSymInputs& ns = {},
                  const std::optional<std::string>& correction = {});

  AgentAction act_nli(const TranscriptView& view,
                      const std::optional<std::string>& correction = {});
  AgentAction act_att(const TranscriptView& view,
                      const std::optional<std::string>& correction = {});
  // Throws IncompleteRecord unless the record covers every alive describer.
  AgentAction act_neurosym(const TranscriptView& view, const LogicalRecord& record,
                           const GuessWord& guess,
                           const std::optional<std::string>& correction = {});
  AgentAction act_scripted(const TranscriptView& view);

  // Deterministic action used when replies stay unusable.
  AgentAction fallback(const TranscriptView& view, std::optional<IdentityAttribution> att = {}) const;

  PlayerId seat() const { return seat_; }
  AgentKind kind() const { return spec_.kind; }
  const AgentSpec& spec() const { return spec_; }
  const LlmHandle& llm() const { return llm_; }
  const std::vector<ChatMessage>& history() const { return history_; }
  const std::optional<IdentityAttribution>& last_attribution() const { return last_attribution_; }

 private:
  AgentAction converse(const TranscriptView& view, const std::string& prompt,
                       const std::optional<std::string>& correction, bool structured);

  PlayerId seat_;
  AgentSpec spec_;
  LlmHandle llm_;
  std::string own_reference_;
  int max_parse_retries_;
  std::vector<ChatMessage> history_;
  std::optional<IdentityAttribution> last_attribution_;
};

// True when `phrase` occurs in `haystack` as a run of whole tokens,
// ignoring case and punctuation.
bool contains_phrase(std::string_view haystack, std::string_view phrase);

}  // namespace undercover
