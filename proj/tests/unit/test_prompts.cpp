#include <gtest/gtest.h>

#include <regex>

#include "support.hpp"
#include "undercover/error.hpp"
#include "undercover/prompts.hpp"

namespace undercover {
namespace {

const TemplateId kAll[] = {
    TemplateId::System,        TemplateId::NliDescribe,      TemplateId::NliVote,
    TemplateId::AttDescribe,   TemplateId::AttVote,          TemplateId::NeuroSymDescribe,
    TemplateId::NeuroSymVote,  TemplateId::NeuroSymRules,    TemplateId::NeuroSymGuess,
    TemplateId::NeuroSymUpdateGuess, TemplateId::Formalize,  TemplateId::SyntaxRefine,
};

PromptValues fill_all(TemplateId id) {
  PromptValues v;
  for (const auto& name : template_placeholders(id)) v[name] = "<" + name + ">";
  return v;
}

TEST(Prompts, NamesRoundTrip) {
  for (TemplateId id : kAll) EXPECT_EQ(template_from_name(template_name(id)), id);
  EXPECT_THROW(template_from_name("nope"), Error);
}

TEST(Prompts, EveryTemplateRendersWithoutLeftoverPlaceholders) {
  const std::regex placeholder(R"(\{[A-Za-z_][A-Za-z0-9_]*\})");
  for (TemplateId id : kAll) {
    const std::string out = render_template(id, fill_all(id));
    EXPECT_FALSE(std::regex_search(out, placeholder)) << template_name(id);
    EXPECT_FALSE(out.empty());
  }
}

TEST(Prompts, MissingValueThrows) {
  PromptValues v = fill_all(TemplateId::NliVote);
  ASSERT_FALSE(v.empty());
  v.erase(v.begin());
  try {
    render_template(TemplateId::NliVote, v);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingPlaceholder);
  }
}

TEST(Prompts, NonIdentifierBraceGroupsAreUnwrapped) {
  EXPECT_EQ(render_template_text("a {x} b {say one thing}", {{"x", "1"}}), "a 1 b say one thing");
}

TEST(Prompts, VoteTemplateEndsWithPlayer) {
  const std::string& t = template_text(TemplateId::NliVote);
  EXPECT_NE(t.find("Vote:\nPlayer"), std::string::npos);
}

TEST(Prompts, SplitsRoleSections) {
  const auto m = to_messages("SYSTEM: be brief\nUSER: hello\nthere");
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0].role, ChatRole::System);
  EXPECT_EQ(m[0].content, "be brief");
  EXPECT_EQ(m[1].role, ChatRole::User);
  EXPECT_EQ(m[1].content, "hello\nthere");
  const auto plain = to_messages("just text");
  ASSERT_EQ(plain.size(), 1u);
  EXPECT_EQ(plain[0].role, ChatRole::User);
}

TEST(Prompts, ViewValuesDescribeTheTable) {
  GameConfig c;
  c.n_players = 4;
  c.word_pair = testing::pair_named("Earl Grey Tea");
  c.spy_seat = PlayerId{4};
  GameState s = new_game(c);
  s = submit_description(std::move(s), PlayerId{1}, "First words.");
  const TranscriptView v = transcript_view(s, PlayerId{2});
  const std::string out = render_prompt(TemplateId::NliDescribe, v);
  EXPECT_NE(out.find("Earl Grey Tea"), std::string::npos);
  EXPECT_NE(out.find("First words."), std::string::npos);
  EXPECT_EQ(out.find("Ceylon"), std::string::npos);
  EXPECT_EQ(format_player_list({PlayerId{1}, PlayerId{3}}).find("3") != std::string::npos, true);
}

}  // namespace
}  // namespace undercover
