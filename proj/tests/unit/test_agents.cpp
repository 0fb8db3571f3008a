#include <gtest/gtest.h>

#include "support.hpp"
#include "undercover/agents.hpp"
#include "undercover/error.hpp"

namespace undercover {
namespace {

GameState fresh(PlayerId spy = PlayerId{4}) {
  GameConfig c;
  c.n_players = 4;
  c.word_pair = testing::pair_named("Earl Grey Tea");
  c.spy_seat = spy;
  return new_game(c);
}

GameState voting() {
  GameState s = fresh();
  for (int p = 1; p <= 4; ++p) {
    s = submit_description(std::move(s), PlayerId{p}, "Words number " + std::to_string(p) + ".");
  }
  return s;
}

Agent make_agent(AgentKind kind, std::vector<std::string> replies, int retries = 2,
                 std::shared_ptr<SequenceBackend>* out = nullptr) {
  auto b = std::make_shared<SequenceBackend>(std::move(replies));
  if (out) *out = b;
  AgentSpec spec;
  spec.kind = kind;
  return Agent(PlayerId{1}, spec, LlmHandle{b, "seq"},
               testing::pair_named("Earl Grey Tea").citizen_reference, retries);
}

TEST(Agents, KindStrings) {
  for (AgentKind k : {AgentKind::StandardNli, AgentKind::StandardAttNli, AgentKind::NeuroSymAttNli,
                      AgentKind::Scripted}) {
    EXPECT_EQ(agent_kind_from_string(to_string(k)), k);
  }
  EXPECT_THROW(agent_kind_from_string("oracle"), Error);
}

TEST(Agents, SpecValidation) {
  AgentSpec s;
  s.kind = AgentKind::Scripted;
  EXPECT_THROW(s.validate(), Error);
  s.script = ActionScript{};
  EXPECT_NO_THROW(s.validate());
  s.kind = AgentKind::StandardNli;
  EXPECT_THROW(s.validate(), Error);
}

TEST(Agents, NliDescribe) {
  Agent a = make_agent(AgentKind::StandardNli, {"A drink scented with bergamot."});
  const auto act = a.act(transcript_view(fresh(), PlayerId{1}));
  EXPECT_EQ(act.type, AgentAction::Type::Described);
  EXPECT_EQ(act.text, "A drink scented with bergamot.");
  EXPECT_EQ(act.parse_attempts, 1);
  EXPECT_FALSE(act.fallback_used);
  EXPECT_EQ(a.history().size(), 2u);
}

TEST(Agents, OwnWordIsRejectedThenRetried) {
  Agent a = make_agent(AgentKind::StandardNli, {"It is Earl Grey tea.", "Bergamot scented."});
  const auto act = a.act(transcript_view(fresh(), PlayerId{1}));
  EXPECT_EQ(act.text, "Bergamot scented.");
  EXPECT_EQ(act.parse_attempts, 2);
  ASSERT_EQ(act.rejections.size(), 1u);
}

TEST(Agents, FallbackAfterRetries) {
  Agent a = make_agent(AgentKind::StandardNli, {"a\nb", "c\nd", "e\nf"});
  const auto act = a.act(transcript_view(fresh(), PlayerId{1}));
  EXPECT_TRUE(act.fallback_used);
  EXPECT_EQ(act.rejections.size(), 3u);
  EXPECT_FALSE(contains_phrase(act.text, "Earl Grey Tea"));
  EXPECT_FALSE(act.text.empty());
}

TEST(Agents, SelfVoteIsRejected) {
  Agent a = make_agent(AgentKind::StandardNli, {"1", "Player 3"});
  const auto act = a.act(transcript_view(voting(), PlayerId{1}));
  EXPECT_EQ(act.type, AgentAction::Type::Voted);
  EXPECT_EQ(act.target, PlayerId{3});
  EXPECT_EQ(act.parse_attempts, 2);
}

TEST(Agents, VoteFallbackPicksAnAlivePlayer) {
  Agent a = make_agent(AgentKind::StandardNli, {"?", "?"}, 1);
  const auto act = a.act(transcript_view(voting(), PlayerId{1}));
  EXPECT_TRUE(act.fallback_used);
  EXPECT_NE(act.target, PlayerId{1});
}

TEST(Agents, AttNeedsReasoningSection) {
  Agent a = make_agent(AgentKind::StandardAttNli,
                       {"Description: A scented drink.",
                        "Reasoning Process: I am not the spy. Player 4 seems off.\n"
                        "Description: A scented drink."});
  const auto act = a.act(transcript_view(fresh(), PlayerId{1}));
  EXPECT_EQ(act.parse_attempts, 2);
  ASSERT_TRUE(act.attribution.has_value());
  EXPECT_EQ(act.attribution->self, IdentityHypothesis::Citizen);
  ASSERT_TRUE(a.last_attribution().has_value());
}

TEST(Agents, AttributionFromRationale) {
  const TranscriptView v = transcript_view(voting(), PlayerId{1});
  const auto spy_self = attribution_from_rationale(v, "I am likely the spy.");
  EXPECT_EQ(spy_self.self, IdentityHypothesis::Spy);
  for (const auto& [p, h] : spy_self.others) EXPECT_EQ(h, IdentityHypothesis::Citizen);
  const auto by_vote = attribution_from_rationale(v, "I am not the spy.", PlayerId{3});
  EXPECT_EQ(by_vote.others.at(PlayerId{3}), IdentityHypothesis::Spy);
  EXPECT_EQ(by_vote.others.at(PlayerId{2}), IdentityHypothesis::Citizen);
}

TEST(Agents, NeuroSymRequiresCompleteRecord) {
  Agent a = make_agent(AgentKind::NeuroSymAttNli, {});
  GameState s = fresh();
  s = submit_description(std::move(s), PlayerId{1}, "Mine.");
  s = submit_description(std::move(s), PlayerId{2}, "Theirs.");
  s = submit_description(std::move(s), PlayerId{3}, "Others.");
  s = submit_description(std::move(s), PlayerId{4}, "Last.");
  const LogicalRecord empty;
  GuessWord g;
  g.word = "Green Tea";
  try {
    a.act_neurosym(transcript_view(s, PlayerId{1}), empty, g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IncompleteRecord);
  }
}

TEST(Agents, ScriptedFollowsScript) {
  ActionScript script;
  script.descriptions[PlayerId{1}][1] = "Scripted words.";
  script.votes[PlayerId{1}][1] = PlayerId{2};
  AgentSpec spec;
  spec.kind = AgentKind::Scripted;
  spec.script = script;
  Agent a(PlayerId{1}, spec, LlmHandle{}, "Some reference.", 2);
  EXPECT_EQ(a.act(transcript_view(fresh(), PlayerId{1})).text, "Scripted words.");
  EXPECT_EQ(a.act(transcript_view(voting(), PlayerId{1})).target, PlayerId{2});
}

TEST(Agents, HistoryCarriesAcrossActions) {
  std::shared_ptr<SequenceBackend> b;
  Agent a = make_agent(AgentKind::StandardNli, {"First.", "Player 2"}, 2, &b);
  a.act(transcript_view(fresh(), PlayerId{1}));
  a.act(transcript_view(voting(), PlayerId{1}));
  EXPECT_EQ(a.history().size(), 4u);
  EXPECT_EQ(a.history()[1].content, "First.");
  EXPECT_EQ(b->calls(), 2u);
}

TEST(Agents, ContainsPhrase) {
  EXPECT_TRUE(contains_phrase("I love earl-grey TEA a lot", "Earl Grey Tea"));
  EXPECT_FALSE(contains_phrase("early greyish teas", "Earl Grey Tea"));
}

}  // namespace
}  // namespace undercover
