#include "undercover/prompts.hpp"

#include <array>
#include <cctype>

#include "undercover/error.hpp"
#include "undercover/text.hpp"

namespace undercover {
namespace detail {
const std::map<std::string_view, std::string>& embedded_templates();
}  // namespace detail

namespace {

struct TemplateEntry {
  TemplateId id;
  std::string_view name;
};

constexpr std::array<TemplateEntry, 12> kTemplates = {{
    {TemplateId::System, "system"},
    {TemplateId::NliDescribe, "nli_describe"},
    {TemplateId::NliVote, "nli_vote"},
    {TemplateId::AttDescribe, "att_describe"},
    {TemplateId::AttVote, "att_vote"},
    {TemplateId::NeuroSymDescribe, "ns_describe"},
    {TemplateId::NeuroSymVote, "ns_vote"},
    {TemplateId::NeuroSymRules, "ns_rules"},
    {TemplateId::NeuroSymGuess, "ns_guess"},
    {TemplateId::NeuroSymUpdateGuess, "ns_update_guess"},
    {TemplateId::Formalize, "formalize"},
    {TemplateId::SyntaxRefine, "syntax_refine"},
}};

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  if (!(std::islower(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s) {
    const auto u = static_cast<unsigned char>(c);
    if (!(std::islower(u) || std::isdigit(u) || c == '_')) return false;
  }
  return true;
}

// Calls on_text for literal runs and on_group for each brace group's content.
template <typename OnText, typename OnGroup>
void scan_template(std::string_view tmpl, OnText on_text, OnGroup on_group) {
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const std::size_t open = tmpl.find('{', pos);
    if (open == std::string_view::npos) {
      on_text(tmpl.substr(pos));
      return;
    }
    const std::size_t close = tmpl.find('}', open + 1);
    if (close == std::string_view::npos) {
      on_text(tmpl.substr(pos));
      return;
    }
    on_text(tmpl.substr(pos, open - pos));
    on_group(tmpl.substr(open + 1, close - open - 1));
    pos = close + 1;
  }
}

std::string format_descriptions(const TranscriptView& view,
                                const std::vector<PlayerId>& players) {
  std::string out;
  for (PlayerId p : players) {
    std::string block;
    for (const auto& d : view.descriptions) {
      if (d.player != p) continue;
      block += "Round " + std::to_string(d.round) + ": " + d.text + "\n";
    }
    if (block.empty()) continue;
    out += to_string(p) + ":\n" + block;
  }
  if (out.empty()) return "None";
  out.pop_back();
  return out;
}

std::string format_last_votes(const TranscriptView& view) {
  if (view.vote_history.empty()) return "None";
  const VoteTally& last = view.vote_history.back();
  std::vector<std::string> parts;
  for (const auto& [voter, target] : last.votes) {
    parts.push_back(to_string(voter) + " voted for " + to_string(target));
  }
  std::string out = text::join(parts, ", ") + ". ";
  if (last.eliminated) {
    out += to_string(*last.eliminated) + " was eliminated.";
  } else {
    out += "The vote was tied and nobody was eliminated.";
  }
  return out;
}

}  // namespace

std::string_view template_name(TemplateId id) {
  for (const auto& e : kTemplates) {
    if (e.id == id) return e.name;
  }
  fail(ErrorCode::UnknownTemplate, "unknown template id");
}

TemplateId template_from_name(std::string_view name) {
  for (const auto& e : kTemplates) {
    if (e.name == name) return e.id;
  }
  fail(ErrorCode::UnknownTemplate, "unknown template '" + std::string(name) + "'");
}

const std::string& template_text(TemplateId id) {
  static const std::map<TemplateId, std::string> texts = [] {
    std::map<TemplateId, std::string> out;
    const auto& raw = detail::embedded_templates();
    for (const auto& e : kTemplates) {
      auto it = raw.find(e.name);
      if (it == raw.end()) continue;
      std::string t = it->second;
      while (!t.empty() && (t.back() == '\n' || t.back() == '\r')) t.pop_back();
      out.emplace(e.id, std::move(t));
    }
    return out;
  }();
  auto it = texts.find(id);
  if (it == texts.end()) {
    fail(ErrorCode::UnknownTemplate,
         "template '" + std::string(template_name(id)) + "' is not embedded");
  }
  return it->second;
}

std::vector<std::string> template_placeholders(TemplateId id) {
  std::vector<std::string> names;
  scan_template(
      template_text(id), [](std::string_view) {},
      [&](std::string_view group) {
        if (!is_identifier(group)) return;
        for (const auto& n : names) {
          if (n == group) return;
        }
        names.emplace_back(group);
      });
  return names;
}

std::string render_template_text(std::string_view tmpl, const PromptValues& values) {
  std::string out;
  out.reserve(tmpl.size() * 2);
  scan_template(
      tmpl, [&](std::string_view literal) { out += literal; },
      [&](std::string_view group) {
        if (!is_identifier(group)) {
          out += group;
          return;
        }
        auto it = values.find(std::string(group));
        if (it == values.end()) {
          fail(ErrorCode::MissingPlaceholder,
               "no value for placeholder {" + std::string(group) + "}");
        }
        out += it->second;
      });
  return out;
}

std::string render_template(TemplateId id, const PromptValues& values) {
  return render_template_text(template_text(id), values);
}

std::string format_player_list(const std::vector<PlayerId>& players) {
  if (players.empty()) return "None";
  std::vector<std::string> names;
  names.reserve(players.size());
  for (PlayerId p : players) names.push_back(to_string(p));
  return text::join(names, ", ");
}

std::string format_history(const TranscriptView& view,
                           const std::vector<PlayerId>& players) {
  return format_descriptions(view, players);
}

PromptValues view_values(const TranscriptView& view) {
  PromptValues v;
  v["round_number"] = std::to_string(view.round);
  v["player_number"] = std::to_string(view.viewer.value);
  v["word"] = view.own_word;
  v["alive_players"] = format_player_list(view.alive);
  v["other_alive_players"] = format_player_list(view.other_alive());

  std::vector<PlayerId> eliminated;
  for (const auto& e : view.eliminated) eliminated.push_back(e.player);
  v["eliminated_players"] = format_player_list(eliminated);

  v["votes_description"] = format_last_votes(view);
  v["consecutive_tie_count"] = "Consecutive tied votes so far: " +
                               std::to_string(view.tie_streak) + " (the spy wins at " +
                               std::to_string(view.tie_limit) + ").";

  v["alive_descriptions"] = format_history(view, view.alive);
  v["other_alive_descriptions"] = format_history(view, view.other_alive());
  v["eliminated_descriptions"] = format_history(view, eliminated);
  v["self_description"] = format_history(view, {view.viewer});

  if (auto last = view.last_elimination()) {
    v["last_eliminated_player"] = "The last eliminated player is " +
                                  to_string(last->player) + " (round " +
                                  std::to_string(last->round) + ").";
    v["voted_out_player_number"] = std::to_string(last->player.value);
    v["voted_out_player_descriptions"] = format_history(view, {last->player});
  } else {
    v["last_eliminated_player"] = "No player has been eliminated yet.";
  }
  return v;
}

std::string render_prompt(TemplateId id, const TranscriptView& view,
                          const PromptValues& extras) {
  PromptValues values = view_values(view);
  for (const auto& [k, val] : extras) values[k] = val;
  return render_template(id, values);
}

std::vector<ChatMessage> to_messages(std::string_view rendered) {
  std::vector<ChatMessage> out;
  std::optional<ChatMessage> current;
  std::string preamble;
  auto flush = [&] {
    if (current) {
      current->content = text::trim(current->content);
      out.push_back(std::move(*current));
      current.reset();
    }
  };
  for (const auto& line : text::split_lines(rendered)) {
    std::string_view rest;
    std::optional<ChatRole> role;
    if (line.rfind("SYSTEM:", 0) == 0) {
      role = ChatRole::System;
      rest = std::string_view(line).substr(7);
    } else if (line.rfind("USER:", 0) == 0) {
      role = ChatRole::User;
      rest = std::string_view(line).substr(5);
    }
    if (role) {
      flush();
      current = ChatMessage{*role, std::string(rest)};
      if (!current->content.empty() && current->content.front() == ' ') {
        current->content.erase(0, 1);
      }
      continue;
    }
    std::string& target = current ? current->content : preamble;
    if (!target.empty() || current) target += "\n";
    target += line;
  }
  flush();
  preamble = text::trim(preamble);
  if (!preamble.empty()) {
    out.insert(out.begin(), ChatMessage{ChatRole::User, preamble});
  }
  return out;
}

}  // namespace undercover
