#include "undercover/game.hpp"

#include <algorithm>
#include <limits>
#include <random>

#include "undercover/error.hpp"
#include "undercover/hash.hpp"
#include "undercover/text.hpp"

namespace undercover {

std::string to_string(PlayerId id) { return "Player " + std::to_string(id.value); }

std::string_view to_string(Role role) {
  return role == Role::Spy ? "Spy" : "Citizen";
}

std::string_view to_string(Winner winner) {
  return winner == Winner::Spy ? "spy" : "citizens";
}

std::string_view to_string(EndReason reason) {
  switch (reason) {
    case EndReason::SpyEliminated: return "spy_eliminated";
    case EndReason::SurvivedToFinal: return "survived_to_final";
    case EndReason::TieLimit: return "tie_limit";
  }
  return "unknown";
}

std::string_view to_string(ViewStage stage) {
  switch (stage) {
    case ViewStage::Describing: return "describing";
    case ViewStage::Voting: return "voting";
    case ViewStage::Finished: return "finished";
  }
  return "unknown";
}

void WordPair::validate() const {
  if (text::trim(citizen_word).empty() || text::trim(spy_word).empty()) {
    fail(ErrorCode::InvalidConfig, "word pair has an empty word");
  }
  if (citizen_word == spy_word) {
    fail(ErrorCode::InvalidConfig,
         "citizen and spy words are equal: '" + citizen_word + "'");
  }
  if (text::trim(citizen_reference).empty() ||
      text::trim(spy_reference).empty()) {
    fail(ErrorCode::InvalidConfig,
         "word pair '" + citizen_word + "'/'" + spy_word +
             "' is missing a reference sentence");
  }
}

void GameConfig::validate() const {
  if (n_players < 3) {
    fail(ErrorCode::InvalidConfig,
         "n_players must be at least 3, got " + std::to_string(n_players));
  }
  if (tie_limit < 1) {
    fail(ErrorCode::InvalidConfig, "tie_limit must be at least 1");
  }
  if (max_parse_retries < 0) {
    fail(ErrorCode::InvalidConfig, "max_parse_retries must be non-negative");
  }
  word_pair.validate();
  if (spy_seat && (spy_seat->value < 1 || spy_seat->value > n_players)) {
    fail(ErrorCode::InvalidConfig,
         "spy_seat " + std::to_string(spy_seat->value) + " outside 1.." +
             std::to_string(n_players));
  }
}

std::map<PlayerId, int> VoteTally::counts() const {
  std::map<PlayerId, int> out;
  for (const auto& [voter, target] : votes) ++out[target];
  return out;
}

PlayerId draw_spy_seat(std::uint64_t seed, int n_players) {
  // mt19937_64 is fully specified by the standard; the bounded draw is done
  // by hand because std::uniform_int_distribution is implementation-defined.
  std::mt19937_64 rng(splitmix64(seed));
  const std::uint64_t n = static_cast<std::uint64_t>(n_players);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return PlayerId{static_cast<int>(x % n) + 1};
}

std::vector<PlayerId> GameState::players() const {
  std::vector<PlayerId> out;
  out.reserve(assignments_.size());
  for (const auto& [id, _] : assignments_) out.push_back(id);
  return out;
}

bool GameState::has_player(PlayerId id) const {
  return assignments_.count(id) > 0;
}

bool GameState::is_alive(PlayerId id) const {
  return std::binary_search(alive_.begin(), alive_.end(), id);
}

PlayerId GameState::spy() const {
  for (const auto& [id, a] : assignments_) {
    if (a.role == Role::Spy) return id;
  }
  fail(ErrorCode::InvalidConfig, "game has no spy");
}

const std::string& GameState::word_of(PlayerId id) const {
  auto it = assignments_.find(id);
  if (it == assignments_.end()) {
    fail(ErrorCode::UnknownPlayer, to_string(id));
  }
  return it->second.word;
}

Role GameState::role_of(PlayerId id) const {
  auto it = assignments_.find(id);
  if (it == assignments_.end()) {
    fail(ErrorCode::UnknownPlayer, to_string(id));
  }
  return it->second.role;
}

bool GameState::is_describing() const {
  return std::holds_alternative<Describing>(phase_);
}
bool GameState::is_voting() const {
  return std::holds_alternative<Voting>(phase_);
}
bool GameState::is_finished() const {
  return std::holds_alternative<Finished>(phase_);
}

PlayerId GameState::next_speaker() const {
  if (const auto* d = std::get_if<Describing>(&phase_)) return d->next_speaker;
  fail(ErrorCode::WrongPhase, "not in the description phase");
}

GameState new_game(const GameConfig& config) {
  config.validate();
  GameState s;
  s.config_ = config;
  const PlayerId spy =
      config.spy_seat ? *config.spy_seat
                      : draw_spy_seat(config.seed, config.n_players);
  for (int i = 1; i <= config.n_players; ++i) {
    const PlayerId id{i};
    const bool is_spy = id == spy;
    s.assignments_[id] = Assignment{
        is_spy ? config.word_pair.spy_word : config.word_pair.citizen_word,
        is_spy ? Role::Spy : Role::Citizen};
    s.alive_.push_back(id);
  }
  s.round_ = 1;
  s.phase_ = Describing{s.alive_.front()};
  s.tie_streak_ = 0;
  return s;
}

GameState submit_description(GameState state, PlayerId player,
                             std::string_view text) {
  const auto* describing = std::get_if<Describing>(&state.phase_);
  if (!describing) {
    fail(ErrorCode::WrongPhase, "descriptions are only accepted while describing");
  }
  if (!state.has_player(player)) fail(ErrorCode::UnknownPlayer, to_string(player));
  if (!state.is_alive(player)) {
    fail(ErrorCode::OutOfTurn, to_string(player) + " has been eliminated");
  }
  if (describing->next_speaker != player) {
    fail(ErrorCode::OutOfTurn, to_string(player) + " spoke out of turn; " +
                                   to_string(describing->next_speaker) +
                                   " is next");
  }
  std::string clean = text::trim(text);
  if (clean.empty()) fail(ErrorCode::EmptyText, to_string(player));

  const std::string normalized = text::normalize_whitespace(clean);
  for (const auto& d : state.descriptions_) {
    if (d.round == state.round_ &&
        text::normalize_whitespace(d.text) == normalized) {
      fail(ErrorCode::DuplicateDescription,
           to_string(player) + " repeated " + to_string(d.player) +
               "'s description");
    }
  }
  state.descriptions_.push_back(Description{state.round_, player, std::move(clean)});

  auto it = std::upper_bound(state.alive_.begin(), state.alive_.end(), player);
  if (it == state.alive_.end()) {
    state.phase_ = Voting{};
  } else {
    state.phase_ = Describing{*it};
  }
  return state;
}

std::pair<GameState, VoteTally> apply_votes(GameState state,
                                            const Ballot& votes) {
  if (!state.is_voting()) {
    fail(ErrorCode::WrongPhase, "votes are only accepted while voting");
  }
  for (PlayerId voter : state.alive_) {
    if (!votes.count(voter)) {
      fail(ErrorCode::IncompleteBallot, to_string(voter) + " did not vote");
    }
  }
  for (const auto& [voter, target] : votes) {
    if (!state.is_alive(voter)) {
      fail(ErrorCode::IncompleteBallot,
           to_string(voter) + " is not an alive voter");
    }
    if (voter == target) fail(ErrorCode::SelfVote, to_string(voter));
    if (!state.is_alive(target)) {
      fail(ErrorCode::DeadTarget, to_string(voter) + " voted for " +
                                      to_string(target) +
                                      ", who is not alive");
    }
  }

  VoteTally tally;
  tally.round = state.round_;
  tally.votes = votes;
  const auto counts = tally.counts();
  int best = 0;
  int holders = 0;
  PlayerId leader;
  for (const auto& [target, n] : counts) {
    if (n > best) {
      best = n;
      holders = 1;
      leader = target;
    } else if (n == best) {
      ++holders;
    }
  }
  if (holders == 1) {
    tally.eliminated = leader;
    state.alive_.erase(
        std::find(state.alive_.begin(), state.alive_.end(), leader));
    state.eliminated_.push_back(Elimination{leader, state.round_});
    state.tie_streak_ = 0;
  } else {
    ++state.tie_streak_;
  }
  state.vote_history_.push_back(tally);

  const PlayerId spy = state.spy();
  auto finish = [&](Winner w, EndReason r) {
    int eliminated_citizens = 0;
    for (const auto& e : state.eliminated_) {
      if (e.player != spy) ++eliminated_citizens;
    }
    state.phase_ = Finished{GameOutcome{w, r, state.round_, eliminated_citizens,
                                        state.config_.n_players}};
  };

  if (tally.eliminated && *tally.eliminated == spy) {
    finish(Winner::Citizens, EndReason::SpyEliminated);
  } else if (state.tie_streak_ >= state.config_.tie_limit) {
    finish(Winner::Spy, EndReason::TieLimit);
  } else if (state.alive_.size() <= 2) {
    finish(Winner::Spy, EndReason::SurvivedToFinal);
  } else {
    ++state.round_;
    state.phase_ = Describing{state.alive_.front()};
  }
  return {std::move(state), std::move(tally)};
}

std::optional<GameOutcome> outcome(const GameState& state) {
  if (const auto* f = std::get_if<Finished>(&state.phase())) return f->outcome;
  return std::nullopt;
}

bool TranscriptView::is_alive(PlayerId id) const {
  return std::find(alive.begin(), alive.end(), id) != alive.end();
}

std::vector<PlayerId> TranscriptView::other_alive() const {
  std::vector<PlayerId> out;
  for (PlayerId p : alive) {
    if (p != viewer) out.push_back(p);
  }
  return out;
}

std::vector<std::string> TranscriptView::descriptions_of(PlayerId id) const {
  std::vector<std::string> out;
  for (const auto& d : descriptions) {
    if (d.player == id) out.push_back(d.text);
  }
  return out;
}

std::vector<PlayerId> TranscriptView::alive_describers() const {
  std::vector<PlayerId> out;
  for (PlayerId p : other_alive()) {
    if (!descriptions_of(p).empty()) out.push_back(p);
  }
  return out;
}

std::optional<Elimination> TranscriptView::last_elimination() const {
  if (eliminated.empty()) return std::nullopt;
  return eliminated.back();
}

TranscriptView transcript_view(const GameState& state, PlayerId viewer) {
  if (!state.has_player(viewer)) fail(ErrorCode::UnknownPlayer, to_string(viewer));
  TranscriptView v;
  v.viewer = viewer;
  v.own_word = state.word_of(viewer);
  v.n_players = state.config().n_players;
  v.tie_limit = state.config().tie_limit;
  v.round = state.round();
  if (const auto* d = std::get_if<Describing>(&state.phase())) {
    v.stage = ViewStage::Describing;
    v.next_speaker = d->next_speaker;
  } else if (state.is_voting()) {
    v.stage = ViewStage::Voting;
  } else {
    v.stage = ViewStage::Finished;
  }
  v.alive = state.alive();
  v.eliminated = state.eliminated();
  v.descriptions = state.descriptions();
  v.vote_history = state.vote_history();
  v.tie_streak = state.tie_streak();
  return v;
}

}  // namespace undercover
