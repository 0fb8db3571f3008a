#pragma once

#include <map>
#include <string>
#include <vector>

#include "undercover/game.hpp"
#include "undercover/similarity.hpp"

namespace undercover {

// Reference AttScores of the strongest fixed-opponent runs and the average
// neuro-symbolic win rate. Reference values only; nothing here reproduces them.
inline constexpr double kReferenceAttScores[] = {0.6, 0.688, 0.780};
inline constexpr double kReferenceNeuroSymWinRate = 0.1708;

// w_r = r / sum(rounds). Throws EmptyRounds, or PreconditionViolation when
// the rounds are not positive and strictly increasing.
std::vector<double> round_weights(const std::vector<int>& rounds);

struct RoundValue {
  int round = 0;
  double value = 0.0;
  double weight = 0.0;
};

struct MetricValue {
  double value = 0.0;
  std::vector<RoundValue> trace;
};

// Round-weighted sim(d, citizen_reference) / sim(d, spy_reference) over the
// rounds the agent described in. Throws MissingReference, NoQualifyingRound.
MetricValue attributional_soundness(PlayerId agent, const std::vector<Description>& transcript,
                                    const WordPair& pair, const Embedder& embedder);

// Round-weighted mean similarity to the other same-round descriptions.
// Rounds with fewer than two describers are skipped. Throws NoQualifyingRound.
MetricValue attributional_alignment(PlayerId agent, const std::vector<Description>& transcript,
                                    const Embedder& embedder);

inline double attributional_score(double as, double aa) { return as * aa; }

struct AgentAttribution {
  PlayerId player;
  Role role = Role::Citizen;
  std::string kind;
  MetricValue as;
  MetricValue aa;
  double att_score = 0.0;
};

// One entry per player with at least one description.
std::vector<AgentAttribution> attribution_report(
    const std::vector<Description>& transcript, const WordPair& pair,
    const std::map<PlayerId, Role>& roles, const std::map<PlayerId, std::string>& kinds,
    const Embedder& embedder);

struct GameMetrics {
  double spy_win_rate = 0.0;
  double citizen_elimination_rate = 0.0;
  double avg_rounds = 0.0;
  int n_games = 0;
};

// Throws EmptyInput.
GameMetrics aggregate_game_metrics(const std::vector<GameOutcome>& outcomes);

}  // namespace undercover
