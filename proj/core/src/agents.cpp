#include "undercover/agents.hpp"

#include <algorithm>
#include <cctype>

#include "undercover/error.hpp"
#include "undercover/prompts.hpp"
#include "undercover/text.hpp"

namespace undercover {
namespace {

struct KindName {
  AgentKind kind;
  std::string_view name;
};

constexpr KindName kKinds[] = {
    {AgentKind::StandardNli, "standard_nli"},
    {AgentKind::StandardAttNli, "standard_att_nli"},
    {AgentKind::NeuroSymAttNli, "neurosym_att_nli"},
    {AgentKind::Scripted, "scripted"},
};

bool is_rejection(const Error& e) {
  switch (e.code()) {
    case ErrorCode::Unparseable:
    case ErrorCode::OutOfRange:
    case ErrorCode::SelfVote:
    case ErrorCode::DeadTarget:
    case ErrorCode::EmptyText:
      return true;
    default:
      return false;
  }
}

std::string format_reminder(ViewStage stage, bool structured) {
  if (stage == ViewStage::Voting) {
    return structured ? "Answer with your reasoning process and end with \"Vote:\" followed by "
                        "\"Player\" and the number of an alive player other than yourself."
                      : "Answer with \"Vote: Player\" and the number of an alive player other "
                        "than yourself.";
  }
  return structured ? "Answer with your reasoning process and end with \"Description:\" "
                      "followed by one sentence that does not contain your word."
                    : "Answer with \"Description:\" followed by one sentence that does not "
                      "contain your word.";
}

}  // namespace

std::string_view to_string(AgentKind kind) {
  for (const auto& k : kKinds) {
    if (k.kind == kind) return k.name;
  }
  return "standard_nli";
}

AgentKind agent_kind_from_string(std::string_view s) {
  for (const auto& k : kKinds) {
    if (k.name == s) return k.kind;
  }
  fail(ErrorCode::InvalidConfig, "unknown agent kind '" + std::string(s) + "'");
}

void AgentSpec::validate() const {
  if ((kind == AgentKind::Scripted) != script.has_value()) {
    fail(ErrorCode::InvalidConfig, "a script is required for, and only for, scripted agents");
  }
}

bool contains_phrase(std::string_view haystack, std::string_view phrase) {
  const auto hay = text::tokenize(haystack);
  const auto needle = text::tokenize(phrase);
  if (needle.empty() || needle.size() > hay.size()) return false;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

IdentityAttribution attribution_from_rationale(const TranscriptView& view,
                                               const std::string& rationale,
                                               std::optional<PlayerId> vote_target) {
  IdentityAttribution att;
  att.rationale = rationale;
  att.self = parse_self_identity(rationale);
  const auto others = view.other_alive();
  for (PlayerId p : others) att.others[p] = IdentityHypothesis::Citizen;
  if (att.self == IdentityHypothesis::Spy) return att;
  bool named = false;
  for (PlayerId p : parse_suspects(rationale)) {
    if (auto it = att.others.find(p); it != att.others.end()) {
      it->second = IdentityHypothesis::Spy;
      named = true;
    }
  }
  if (!named && vote_target) {
    if (auto it = att.others.find(*vote_target); it != att.others.end()) {
      it->second = IdentityHypothesis::Spy;
    }
  }
  return att;
}

Agent::Agent(PlayerId seat, AgentSpec spec, LlmHandle llm, std::string own_reference,
             int max_parse_retries)
    : seat_(seat),
      spec_(std::move(spec)),
      llm_(std::move(llm)),
      own_reference_(std::move(own_reference)),
      max_parse_retries_(max_parse_retries) {
  spec_.validate();
}

AgentAction Agent::act(const TranscriptView& view, const NeuroSymInputs& ns,
                       const std::optional<std::string>& correction) {
  switch (spec_.kind) {
    case AgentKind::StandardNli: return act_nli(view, correction);
    case AgentKind::StandardAttNli: return act_att(view, correction);
    case AgentKind::NeuroSymAttNli:
      if (!ns.record || !ns.guess) {
        fail(ErrorCode::IncompleteRecord, "neuro-symbolic agent acted without record and guess");
      }
      return act_neurosym(view, *ns.record, *ns.guess, correction);
    case AgentKind::Scripted: return act_scripted(view);
  }
  fail(ErrorCode::InvalidConfig, "unknown agent kind");
}

AgentAction Agent::act_nli(const TranscriptView& view,
                           const std::optional<std::string>& correction) {
  const TemplateId id =
      view.stage == ViewStage::Voting ? TemplateId::NliVote : TemplateId::NliDescribe;
  return converse(view, render_prompt(id, view), correction, false);
}

AgentAction Agent::act_att(const TranscriptView& view,
                           const std::optional<std::string>& correction) {
  const TemplateId id =
      view.stage == ViewStage::Voting ? TemplateId::AttVote : TemplateId::AttDescribe;
  return converse(view, render_prompt(id, view), correction, true);
}

AgentAction Agent::act_neurosym(const TranscriptView& view, const LogicalRecord& record,
                                const GuessWord& guess,
                                const std::optional<std::string>& correction) {
  if (!record.covers(view)) {
    fail(ErrorCode::IncompleteRecord, to_string(seat_) +
                                          ": logical record misses an alive describer in round " +
                                          std::to_string(view.round));
  }
  const TemplateId id =
      view.stage == ViewStage::Voting ? TemplateId::NeuroSymVote : TemplateId::NeuroSymDescribe;
  const PromptValues extras = {{"guessed_word", guess.word},
                               {"isabelle_reasoning", record.reasoning_text()},
                               {"logical_validity", record.validity_text()}};
  return converse(view, render_prompt(id, view, extras), correction, true);
}

AgentAction Agent::act_scripted(const TranscriptView& view) {
  const ActionScript& script = *spec_.script;
  AgentAction action;
  action.parse_attempts = 1;
  if (view.stage == ViewStage::Voting) {
    auto seat = script.votes.find(seat_);
    if (seat != script.votes.end()) {
      if (auto it = seat->second.find(view.round); it != seat->second.end()) {
        action.type = AgentAction::Type::Voted;
        action.target = it->second;
        action.raw_reply = "Vote: " + to_string(it->second);
        return action;
      }
    }
  } else {
    auto seat = script.descriptions.find(seat_);
    if (seat != script.descriptions.end()) {
      if (auto it = seat->second.find(view.round); it != seat->second.end()) {
        action.type = AgentAction::Type::Described;
        action.text = it->second;
        action.raw_reply = it->second;
        return action;
      }
    }
  }
  AgentAction fb = fallback(view);
  fb.rejections.push_back("no scripted action for round " + std::to_string(view.round));
  return fb;
}

AgentAction Agent::fallback(const TranscriptView& view,
                            std::optional<IdentityAttribution> att) const {
  AgentAction action;
  action.fallback_used = true;
  action.parse_attempts = max_parse_retries_ + 1;
  action.attribution = std::move(att);
  if (view.stage == ViewStage::Voting) {
    const auto others = view.other_alive();
    if (others.empty()) fail(ErrorCode::PreconditionViolation, "no one left to vote for");
    action.type = AgentAction::Type::Voted;
    action.target = others.front();
    return action;
  }
  action.type = AgentAction::Type::Described;
  std::string s = text::first_sentence(text::mask_word(own_reference_, view.own_word, "it"));
  s = text::trim(s);
  if (s.empty() || contains_phrase(s, view.own_word)) s = "It is something I know well.";
  s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  action.text = std::move(s);
  return action;
}

AgentAction Agent::converse(const TranscriptView& view, const std::string& prompt,
                            const std::optional<std::string>& correction, bool structured) {
  std::vector<ChatMessage> messages;
  messages.push_back({ChatRole::System, template_text(TemplateId::System)});
  messages.insert(messages.end(), history_.begin(), history_.end());
  const std::size_t first_new = messages.size();
  std::string user = prompt;
  if (correction) user += "\n\n" + *correction;
  messages.push_back({ChatRole::User, std::move(user)});

  AgentAction action;
  std::optional<IdentityAttribution> att;
  const bool voting = view.stage == ViewStage::Voting;
  for (int attempt = 1; attempt <= max_parse_retries_ + 1; ++attempt) {
    const std::string reply = llm_.complete(messages);
    messages.push_back({ChatRole::Assistant, reply});
    action.raw_reply = reply;
    action.parse_attempts = attempt;
    try {
      std::string rationale;
      if (structured) {
        auto section = reasoning_section(reply);
        if (!section) fail(ErrorCode::Unparseable, "missing Reasoning Process section");
        rationale = *section;
      }
      if (voting) {
        const PlayerId target = parse_vote(reply, view.n_players);
        if (target == view.viewer) fail(ErrorCode::SelfVote, "you cannot vote for yourself");
        if (!view.is_alive(target)) {
          fail(ErrorCode::DeadTarget, to_string(target) + " is not an alive player");
        }
        action.type = AgentAction::Type::Voted;
        action.target = target;
        if (structured) att = attribution_from_rationale(view, rationale, target);
      } else {
        std::string d = parse_description(reply);
        if (contains_phrase(d, view.own_word)) {
          fail(ErrorCode::Unparseable, "the description must not contain your word");
        }
        action.type = AgentAction::Type::Described;
        action.text = std::move(d);
        if (structured) att = attribution_from_rationale(view, rationale);
      }
      action.attribution = att;
      if (att) last_attribution_ = att;
      history_.insert(history_.end(), messages.begin() + static_cast<long>(first_new),
                      messages.end());
      return action;
    } catch (const Error& e) {
      if (!is_rejection(e)) throw;
      action.rejections.push_back(e.what());
      if (structured && !att) {
        if (auto section = reasoning_section(reply)) {
          att = attribution_from_rationale(view, *section);
        }
      }
      messages.push_back({ChatRole::User, std::string("Your reply could not be used (") +
                                              e.what() + "). " +
                                              format_reminder(view.stage, structured)});
    }
  }
  history_.insert(history_.end(), messages.begin() + static_cast<long>(first_new),
                  messages.end());
  if (structured && !att) att = attribution_from_rationale(view, "");
  AgentAction fb = fallback(view, att);
  if (fb.attribution && voting) {
    fb.attribution = attribution_from_rationale(view, fb.attribution->rationale, fb.target);
  }
  if (fb.attribution) last_attribution_ = fb.attribution;
  fb.raw_reply = action.raw_reply;
  fb.rejections = std::move(action.rejections);
  return fb;
}

}  // namespace undercover
