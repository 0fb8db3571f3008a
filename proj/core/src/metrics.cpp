#include "undercover/metrics.hpp"

#include <set>

#include "undercover/error.hpp"
#include "undercover/text.hpp"

namespace undercover {
namespace {

MetricValue weighted(std::vector<RoundValue> per_round) {
  std::vector<int> rounds;
  rounds.reserve(per_round.size());
  for (const auto& r : per_round) rounds.push_back(r.round);
  const auto w = round_weights(rounds);
  MetricValue out;
  for (std::size_t i = 0; i < per_round.size(); ++i) {
    per_round[i].weight = w[i];
    out.value += w[i] * per_round[i].value;
  }
  out.trace = std::move(per_round);
  return out;
}

std::map<int, std::string> own_descriptions(PlayerId agent,
                                            const std::vector<Description>& transcript) {
  std::map<int, std::string> out;
  for (const auto& d : transcript) {
    if (d.player == agent) out[d.round] = d.text;
  }
  return out;
}

}  // namespace

std::vector<double> round_weights(const std::vector<int>& rounds) {
  if (rounds.empty()) fail(ErrorCode::EmptyRounds, "no rounds to weight");
  long long total = 0;
  int previous = 0;
  for (int r : rounds) {
    if (r <= previous) {
      fail(ErrorCode::PreconditionViolation, "rounds must be positive and strictly increasing");
    }
    previous = r;
    total += r;
  }
  std::vector<double> w;
  w.reserve(rounds.size());
  for (int r : rounds) w.push_back(static_cast<double>(r) / static_cast<double>(total));
  return w;
}

MetricValue attributional_soundness(PlayerId agent, const std::vector<Description>& transcript,
                                    const WordPair& pair, const Embedder& embedder) {
  if (text::trim(pair.citizen_reference).empty() || text::trim(pair.spy_reference).empty()) {
    fail(ErrorCode::MissingReference, "word pair lacks a reference sentence");
  }
  const auto own = own_descriptions(agent, transcript);
  if (own.empty()) {
    fail(ErrorCode::NoQualifyingRound, to_string(agent) + " has no descriptions");
  }
  std::vector<RoundValue> per_round;
  for (const auto& [round, d] : own) {
    const double num = embedder.sim(d, pair.citizen_reference);
    const double den = embedder.sim(d, pair.spy_reference);
    per_round.push_back({round, num / den, 0.0});
  }
  return weighted(std::move(per_round));
}

MetricValue attributional_alignment(PlayerId agent, const std::vector<Description>& transcript,
                                    const Embedder& embedder) {
  const auto own = own_descriptions(agent, transcript);
  std::vector<RoundValue> per_round;
  for (const auto& [round, d] : own) {
    double sum = 0.0;
    int others = 0;
    for (const auto& other : transcript) {
      if (other.round != round || other.player == agent) continue;
      sum += embedder.sim(d, other.text);
      ++others;
    }
    if (others == 0) continue;
    per_round.push_back({round, sum / others, 0.0});
  }
  if (per_round.empty()) {
    fail(ErrorCode::NoQualifyingRound,
         to_string(agent) + " never described alongside another player");
  }
  return weighted(std::move(per_round));
}

std::vector<AgentAttribution> attribution_report(
    const std::vector<Description>& transcript, const WordPair& pair,
    const std::map<PlayerId, Role>& roles, const std::map<PlayerId, std::string>& kinds,
    const Embedder& embedder) {
  std::set<PlayerId> describers;
  for (const auto& d : transcript) describers.insert(d.player);
  std::vector<AgentAttribution> out;
  for (PlayerId p : describers) {
    AgentAttribution a;
    a.player = p;
    if (auto it = roles.find(p); it != roles.end()) a.role = it->second;
    if (auto it = kinds.find(p); it != kinds.end()) a.kind = it->second;
    a.as = attributional_soundness(p, transcript, pair, embedder);
    a.aa = attributional_alignment(p, transcript, embedder);
    a.att_score = attributional_score(a.as.value, a.aa.value);
    out.push_back(std::move(a));
  }
  return out;
}

GameMetrics aggregate_game_metrics(const std::vector<GameOutcome>& outcomes) {
  if (outcomes.empty()) fail(ErrorCode::EmptyInput, "no games to aggregate");
  GameMetrics m;
  m.n_games = static_cast<int>(outcomes.size());
  int spy_wins = 0;
  double elimination = 0.0;
  double rounds = 0.0;
  for (const auto& o : outcomes) {
    if (o.winner == Winner::Spy) ++spy_wins;
    if (o.n_players < 2) fail(ErrorCode::PreconditionViolation, "outcome without player count");
    elimination += static_cast<double>(o.eliminated_citizens) / (o.n_players - 1);
    rounds += o.rounds_played;
  }
  m.spy_win_rate = static_cast<double>(spy_wins) / m.n_games;
  m.citizen_elimination_rate = elimination / m.n_games;
  m.avg_rounds = rounds / m.n_games;
  return m;
}

}  // namespace undercover
