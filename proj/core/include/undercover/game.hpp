#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace undercover {

struct PlayerId {
  int value = 0;
  constexpr auto operator<=>(const PlayerId&) const = default;
};

std::string to_string(PlayerId id);  // "Player 3"

struct WordPair {
  std::string citizen_word;
  std::string spy_word;
  // Human-written definition sentences, used by the metrics.
  std::string citizen_reference;
  std::string spy_reference;

  void validate() const;
};

struct GameConfig {
  int n_players = 6;
  WordPair word_pair;
  int tie_limit = 3;
  int max_parse_retries = 3;
  std::uint64_t seed = 0;
  // Pins the spy seat instead of drawing it from `seed`. Scripted scenarios only.
  std::optional<PlayerId> spy_seat;

  void validate() const;
};

enum class Role { Spy, Citizen };
std::string_view to_string(Role role);

struct Assignment {
  std::string word;
  Role role = Role::Citizen;
};

struct Description {
  int round = 0;
  PlayerId player;
  std::string text;
};

struct Elimination {
  PlayerId player;
  int round = 0;
};

enum class Winner { Citizens, Spy };
enum class EndReason { SpyEliminated, SurvivedToFinal, TieLimit };
std::string_view to_string(Winner winner);
std::string_view to_string(EndReason reason);

struct GameOutcome {
  Winner winner = Winner::Citizens;
  EndReason reason = EndReason::SpyEliminated;
  int rounds_played = 0;
  int eliminated_citizens = 0;
  int n_players = 0;

  bool operator==(const GameOutcome&) const = default;
};

struct VoteTally {
  int round = 0;
  std::map<PlayerId, PlayerId> votes;  // voter -> target
  std::optional<PlayerId> eliminated;  // empty means the vote was tied

  bool is_tie() const { return !eliminated.has_value(); }
  std::map<PlayerId, int> counts() const;
};

struct Describing {
  PlayerId next_speaker;
};
struct Voting {};
struct Finished {
  GameOutcome outcome;
};
using Phase = std::variant<Describing, Voting, Finished>;

using Ballot = std::map<PlayerId, PlayerId>;

class GameState;

GameState new_game(const GameConfig& config);
GameState submit_description(GameState state, PlayerId player,
                             std::string_view text);
std::pair<GameState, VoteTally> apply_votes(GameState state,
                                            const Ballot& votes);
std::optional<GameOutcome> outcome(const GameState& state);

// Authoritative state of one game. Only the free functions above move it
// forward; every reachable value satisfies the game invariants.
class GameState {
 public:
  const GameConfig& config() const { return config_; }
  const std::map<PlayerId, Assignment>& assignments() const {
    return assignments_;
  }
  const std::vector<PlayerId>& alive() const { return alive_; }
  const std::vector<Elimination>& eliminated() const { return eliminated_; }
  int round() const { return round_; }
  const Phase& phase() const { return phase_; }
  const std::vector<Description>& descriptions() const {
    return descriptions_;
  }
  const std::vector<VoteTally>& vote_history() const { return vote_history_; }
  int tie_streak() const { return tie_streak_; }

  std::vector<PlayerId> players() const;
  bool has_player(PlayerId id) const;
  bool is_alive(PlayerId id) const;
  PlayerId spy() const;
  const std::string& word_of(PlayerId id) const;
  Role role_of(PlayerId id) const;

  bool is_describing() const;
  bool is_voting() const;
  bool is_finished() const;
  // Throws WrongPhase unless the game is in the description phase.
  PlayerId next_speaker() const;

 private:
  GameState() = default;

  GameConfig config_;
  std::map<PlayerId, Assignment> assignments_;
  std::vector<PlayerId> alive_;
  std::vector<Elimination> eliminated_;
  int round_ = 1;
  Phase phase_ = Voting{};
  std::vector<Description> descriptions_;
  std::vector<VoteTally> vote_history_;
  int tie_streak_ = 0;

  friend GameState new_game(const GameConfig& config);
  friend GameState submit_description(GameState state, PlayerId player,
                                      std::string_view text);
  friend std::pair<GameState, VoteTally> apply_votes(GameState state,
                                                     const Ballot& votes);
};

enum class ViewStage { Describing, Voting, Finished };
std::string_view to_string(ViewStage stage);

// What one player is allowed to see. Carries the viewer's own word and the
// public record only: no other word and no role.
struct TranscriptView {
  PlayerId viewer;
  std::string own_word;
  int n_players = 0;
  int tie_limit = 0;
  int round = 0;
  ViewStage stage = ViewStage::Describing;
  std::optional<PlayerId> next_speaker;
  std::vector<PlayerId> alive;
  std::vector<Elimination> eliminated;
  std::vector<Description> descriptions;
  std::vector<VoteTally> vote_history;
  int tie_streak = 0;

  bool is_alive(PlayerId id) const;
  std::vector<PlayerId> other_alive() const;
  std::vector<std::string> descriptions_of(PlayerId id) const;
  // Players other than the viewer who are alive and have described at least
  // once.
  std::vector<PlayerId> alive_describers() const;
  std::optional<Elimination> last_elimination() const;
};

TranscriptView transcript_view(const GameState& state, PlayerId viewer);

// Spy seat drawn for a seed; what new_game uses when no seat is pinned.
PlayerId draw_spy_seat(std::uint64_t seed, int n_players);

}  // namespace undercover

template <>
struct std::hash<undercover::PlayerId> {
  std::size_t operator()(const undercover::PlayerId& id) const noexcept {
    return std::hash<int>{}(id.value);
  }
};
