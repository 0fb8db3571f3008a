#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "undercover/chat.hpp"
#include "undercover/game.hpp"

namespace undercover {

enum class TemplateId {
  System,
  NliDescribe,
  NliVote,
  AttDescribe,
  AttVote,
  NeuroSymDescribe,
  NeuroSymVote,
  NeuroSymRules,
  NeuroSymGuess,
  NeuroSymUpdateGuess,
  Formalize,
  SyntaxRefine,
};

// File stem of the template under core/templates/.
std::string_view template_name(TemplateId id);
TemplateId template_from_name(std::string_view name);
const std::string& template_text(TemplateId id);
// Placeholder names in order of first appearance.
std::vector<std::string> template_placeholders(TemplateId id);

using PromptValues = std::map<std::string, std::string>;

// Substitutes every {name} placeholder. A brace group that is not a bare
// identifier (the inline answer instructions of the description templates)
// is emitted without its braces. Throws MissingPlaceholder.
std::string render_template(TemplateId id, const PromptValues& values);
std::string render_template_text(std::string_view tmpl, const PromptValues& values);

// Placeholder values derivable from a transcript view.
PromptValues view_values(const TranscriptView& view);

std::string render_prompt(TemplateId id, const TranscriptView& view,
                          const PromptValues& extras = {});

// Splits "SYSTEM: ... USER: ..." sections into messages. Text without a role
// prefix becomes a single user message.
std::vector<ChatMessage> to_messages(std::string_view rendered);

// Formatting helpers shared with the neuro-symbolic pipeline.
std::string format_player_list(const std::vector<PlayerId>& players);
std::string format_history(const TranscriptView& view,
                           const std::vector<PlayerId>& players);

}  // namespace undercover
