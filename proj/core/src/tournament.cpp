#include "undercover/tournament.hpp"

#include <atomic>
#include <charconv>
#include <fstream>
#include <mutex>
#include <thread>

#include "undercover/error.hpp"
#include "undercover/hash.hpp"
#include "undercover/mock_llm.hpp"
#include "undercover/neurosym.hpp"
#include "undercover/text.hpp"

namespace undercover {
namespace {

constexpr std::string_view kDuplicateCorrection =
    "Your description is identical to another player's description in this round. "
    "Give a different description.";

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Json attribution_json(const IdentityAttribution& a, PlayerId player, int round,
                      ViewStage stage) {
  Json others = Json::object();
  for (const auto& [p, h] : a.others) others[std::to_string(p.value)] = std::string(to_string(h));
  return {{"player", player.value},
          {"round", round},
          {"stage", std::string(to_string(stage))},
          {"self", std::string(to_string(a.self))},
          {"others", others},
          {"rationale", a.rationale}};
}

Json verdict_json(const ProverVerdict& v) {
  Json j = {{"status", std::string(to_string(v.verdict))}};
  j["messages"] = v.trace ? Json(v.trace->messages) : Json::array();
  return j;
}

Json record_json(const LogicalRecord& record, PlayerId verifier, int round, ViewStage stage) {
  Json entries = Json::array();
  for (const auto& [key, e] : record.entries) {
    Json je = {{"player", e.player.value},
               {"round", e.round},
               {"verdict", verdict_json(e.verdict)},
               {"theory_digest", e.theory_digest}};
    if (e.error) je["error"] = *e.error;
    entries.push_back(std::move(je));
  }
  return {{"verifier", verifier.value},
          {"round", round},
          {"stage", std::string(to_string(stage))},
          {"entries", entries}};
}

Json guess_json(const GuessWord& g, PlayerId player, int round) {
  return {{"player", player.value}, {"round", round}, {"word", g.word}, {"flagged", g.flagged}};
}

std::string assignments_digest(const GameState& state) {
  Json a = Json::object();
  for (const auto& [p, asg] : state.assignments()) {
    a[std::to_string(p.value)] = {{"word", asg.word}, {"role", std::string(to_string(asg.role))}};
  }
  return digest_hex(canonical(a));
}

class EventLog {
 public:
  explicit EventLog(const EventSink& sink) : sink_(sink) {}

  void append(std::string type, Json body) {
    Event e;
    e.seq = static_cast<int>(events_.size());
    e.type = std::move(type);
    e.body = std::move(body);
    e.prev = events_.empty() ? "" : events_.back().digest;
    e.digest = event_digest(e.seq, e.type, e.body, e.prev);
    events_.push_back(e);
    if (sink_) sink_(events_.back());
  }

  std::vector<Event> take() { return std::move(events_); }

 private:
  const EventSink& sink_;
  std::vector<Event> events_;
};

const std::string& reference_of(const WordPair& pair, const std::string& word) {
  return word == pair.citizen_word ? pair.citizen_reference : pair.spy_reference;
}

[[noreturn]] void corrupt(const std::string& msg) { fail(ErrorCode::CorruptRecord, msg); }

}  // namespace

std::string_view to_string(ContestMode mode) {
  switch (mode) {
    case ContestMode::FixedOpponent: return "fixed_opponent";
    case ContestMode::RoundRobin: return "round_robin";
    case ContestMode::Custom: return "custom";
  }
  return "fixed_opponent";
}

ContestMode contest_mode_from_string(std::string_view s) {
  if (s == "fixed_opponent") return ContestMode::FixedOpponent;
  if (s == "round_robin") return ContestMode::RoundRobin;
  if (s == "custom") return ContestMode::Custom;
  fail(ErrorCode::InvalidConfig, "unknown contest mode '" + std::string(s) + "'");
}

void ContestSpec::validate() const {
  if (n_games < 1) fail(ErrorCode::InvalidConfig, "n_games must be at least 1");
  if (word_pairs.empty()) fail(ErrorCode::InvalidConfig, "word_pairs must not be empty");
  for (const auto& p : word_pairs) p.validate();
  if (n_players < 3) fail(ErrorCode::InvalidConfig, "n_players must be at least 3");
  if (tie_limit < 1) fail(ErrorCode::InvalidConfig, "tie_limit must be at least 1");
  if (max_parse_retries < 0) fail(ErrorCode::InvalidConfig, "max_parse_retries must be >= 0");
  if (spy_seat && (spy_seat->value < 1 || spy_seat->value > n_players)) {
    fail(ErrorCode::InvalidConfig, "spy_seat outside 1..n_players");
  }
  if (mode == ContestMode::Custom) {
    if (static_cast<int>(seats.size()) != n_players) {
      fail(ErrorCode::InvalidConfig, "custom contests need one seat spec per player");
    }
    for (const auto& s : seats) s.validate();
  } else {
    spy_agent.validate();
    citizen_agent.validate();
  }
}

Json to_json(const AgentSpec& spec) {
  Json j = {{"kind", std::string(to_string(spec.kind))}, {"backend", spec.backend}};
  if (spec.script) {
    Json d = Json::object();
    for (const auto& [seat, rounds] : spec.script->descriptions) {
      for (const auto& [r, t] : rounds) d[std::to_string(seat.value)][std::to_string(r)] = t;
    }
    Json v = Json::object();
    for (const auto& [seat, rounds] : spec.script->votes) {
      for (const auto& [r, t] : rounds) v[std::to_string(seat.value)][std::to_string(r)] = t.value;
    }
    j["script"] = {{"descriptions", d}, {"votes", v}};
  }
  return j;
}

AgentSpec agent_spec_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    fail(ErrorCode::InvalidConfig, "agent spec needs a string 'kind'");
  }
  AgentSpec spec;
  spec.kind = agent_kind_from_string(j.at("kind").get<std::string>());
  spec.backend = j.value("backend", std::string());
  if (j.contains("script")) {
    try {
      ActionScript script;
      const Json& s = j.at("script");
      const Json descriptions = s.value("descriptions", Json::object());
      const Json votes = s.value("votes", Json::object());
      for (const auto& [seat, rounds] : descriptions.items()) {
        for (const auto& [r, t] : rounds.items()) {
          script.descriptions[PlayerId{std::stoi(seat)}][std::stoi(r)] = t.get<std::string>();
        }
      }
      for (const auto& [seat, rounds] : votes.items()) {
        for (const auto& [r, t] : rounds.items()) {
          script.votes[PlayerId{std::stoi(seat)}][std::stoi(r)] = PlayerId{t.get<int>()};
        }
      }
      spec.script = std::move(script);
    } catch (const std::exception& e) {
      fail(ErrorCode::InvalidConfig, std::string("bad agent script: ") + e.what());
    }
  }
  spec.validate();
  return spec;
}

Json to_json(const ContestSpec& spec) {
  Json pairs = Json::array();
  for (const auto& p : spec.word_pairs) pairs.push_back(to_json(p));
  Json seats = Json::array();
  for (const auto& s : spec.seats) seats.push_back(to_json(s));
  Json j = {{"mode", std::string(to_string(spec.mode))},
            {"spy_agent", to_json(spec.spy_agent)},
            {"citizen_agent", to_json(spec.citizen_agent)},
            {"seats", seats},
            {"n_games", spec.n_games},
            {"word_pairs", pairs},
            {"base_seed", spec.base_seed},
            {"n_players", spec.n_players},
            {"tie_limit", spec.tie_limit},
            {"max_parse_retries", spec.max_parse_retries}};
  if (spec.spy_seat) j["spy_seat"] = spec.spy_seat->value;
  return j;
}

ContestSpec contest_spec_from_json(const Json& j) {
  if (!j.is_object()) fail(ErrorCode::InvalidConfig, "contest must be an object");
  ContestSpec spec;
  try {
    spec.mode = contest_mode_from_string(j.value("mode", std::string("fixed_opponent")));
    if (j.contains("spy_agent")) spec.spy_agent = agent_spec_from_json(j.at("spy_agent"));
    if (j.contains("citizen_agent")) {
      spec.citizen_agent = agent_spec_from_json(j.at("citizen_agent"));
    }
    for (const auto& s : j.value("seats", Json::array())) {
      spec.seats.push_back(agent_spec_from_json(s));
    }
    spec.n_games = j.value("n_games", 30);
    for (const auto& p : j.value("word_pairs", Json::array())) {
      spec.word_pairs.push_back(word_pair_from_json(p));
    }
    spec.base_seed = j.value("base_seed", std::uint64_t{0});
    spec.n_players = j.value("n_players", 6);
    spec.tie_limit = j.value("tie_limit", 3);
    spec.max_parse_retries = j.value("max_parse_retries", 3);
    if (j.contains("spy_seat") && !j.at("spy_seat").is_null()) {
      spec.spy_seat = PlayerId{j.at("spy_seat").get<int>()};
    }
  } catch (const Json::exception& e) {
    fail(ErrorCode::InvalidConfig, std::string("bad contest field: ") + e.what());
  }
  spec.validate();
  return spec;
}

std::string ContestSpec::digest() const { return digest_hex(canonical(to_json(*this))); }

std::uint64_t game_seed(std::uint64_t base_seed, int game_index) {
  return hash_combine(base_seed, static_cast<std::uint64_t>(game_index));
}

int total_games(const ContestSpec& spec) {
  const int base = spec.n_games * static_cast<int>(spec.word_pairs.size());
  return spec.mode == ContestMode::RoundRobin ? 2 * base : base;
}

const WordPair& word_pair_for(const ContestSpec& spec, int game_index) {
  return spec.word_pairs[static_cast<std::size_t>(game_index) % spec.word_pairs.size()];
}

std::map<PlayerId, AgentSpec> seating(const ContestSpec& spec, int game_index, PlayerId spy) {
  std::map<PlayerId, AgentSpec> out;
  const bool swapped = spec.mode == ContestMode::RoundRobin &&
                       game_index >= spec.n_games * static_cast<int>(spec.word_pairs.size());
  for (int i = 1; i <= spec.n_players; ++i) {
    const PlayerId p{i};
    if (spec.mode == ContestMode::Custom) {
      out[p] = spec.seats[static_cast<std::size_t>(i - 1)];
    } else if ((p == spy) != swapped) {
      out[p] = spec.spy_agent;
    } else {
      out[p] = spec.citizen_agent;
    }
  }
  return out;
}

std::string event_digest(int seq, const std::string& type, const Json& body,
                         const std::string& prev) {
  return digest_hex(prev + "|" + std::to_string(seq) + "|" + type + "|" + canonical(body));
}

Json to_json(const Event& e) {
  return {{"seq", e.seq}, {"type", e.type}, {"body", e.body}, {"prev", e.prev},
          {"digest", e.digest}};
}

std::string to_line(const Event& e) { return canonical(to_json(e)); }

std::string GameRecord::to_jsonl() const {
  std::string out;
  for (const auto& e : events) out += to_line(e) + "\n";
  return out;
}

void verify_chain(const std::vector<Event>& events) {
  std::string prev;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Event& e = events[i];
    if (e.seq != static_cast<int>(i)) corrupt("event " + std::to_string(i) + " has seq " + std::to_string(e.seq));
    if (e.prev != prev) corrupt("event " + std::to_string(i) + " does not chain to its predecessor");
    if (e.digest != event_digest(e.seq, e.type, e.body, e.prev)) {
      corrupt("event " + std::to_string(i) + " digest mismatch");
    }
    prev = e.digest;
  }
}

GameRecord GameRecord::from_jsonl(std::string_view text) {
  GameRecord rec;
  int line_no = 0;
  for (const auto& line : text::split_lines(text)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
      Event e;
      e.seq = j.at("seq").get<int>();
      e.type = j.at("type").get<std::string>();
      e.body = j.at("body");
      e.prev = j.at("prev").get<std::string>();
      e.digest = j.at("digest").get<std::string>();
      rec.events.push_back(std::move(e));
    } catch (const Json::exception& ex) {
      corrupt("line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  if (rec.events.empty()) corrupt("empty event log");
  verify_chain(rec.events);
  const Event& first = rec.events.front();
  if (first.type != "game_started") corrupt("log does not start with game_started");
  try {
    rec.game_index = first.body.at("game_index").get<int>();
    rec.seed = first.body.at("seed").get<std::uint64_t>();
    rec.spec_digest = first.body.at("spec_digest").get<std::string>();
    for (const auto& e : rec.events) {
      if (e.type == "outcome") rec.outcome = outcome_from_json(e.body);
      if (e.type == "aborted") {
        rec.aborted = true;
        rec.abort_reason = e.body.value("reason", std::string());
      }
      if ((e.type == "description" || e.type == "vote") && e.body.value("fallback_used", false)) {
        rec.fallback_used = true;
      }
    }
  } catch (const Json::exception& ex) {
    corrupt(std::string("malformed event body: ") + ex.what());
  } catch (const Error& ex) {
    corrupt(ex.what());
  }
  return rec;
}

GameState initial_state(const GameRecord& record) {
  if (record.events.empty() || record.events.front().type != "game_started") {
    corrupt("record has no game_started event");
  }
  const Json& body = record.events.front().body;
  GameConfig config;
  try {
    config = game_config_from_json(body.at("config"));
  } catch (const Json::exception& e) {
    corrupt(std::string("bad game config: ") + e.what());
  } catch (const Error& e) {
    corrupt(e.what());
  }
  GameState state = new_game(config);
  if (body.value("assignments_digest", std::string()) != assignments_digest(state)) {
    corrupt("assignments do not match the recorded digest");
  }
  return state;
}

GameOutcome replay(const GameRecord& record) {
  verify_chain(record.events);
  GameState state = initial_state(record);
  Ballot ballot;
  std::optional<GameOutcome> recorded;
  try {
    for (const auto& e : record.events) {
      if (e.type == "aborted") {
        fail(ErrorCode::PreconditionViolation, "aborted games have no outcome to replay");
      }
      if (recorded) corrupt("events after the outcome");
      if (e.type == "description") {
        state = submit_description(std::move(state), PlayerId{e.body.at("player").get<int>()},
                                   e.body.at("text").get<std::string>());
      } else if (e.type == "vote") {
        if (e.body.at("round").get<int>() != state.round()) corrupt("vote from another round");
        ballot[PlayerId{e.body.at("voter").get<int>()}] = PlayerId{e.body.at("target").get<int>()};
      } else if (e.type == "tally") {
        auto [next, tally] = apply_votes(std::move(state), ballot);
        state = std::move(next);
        ballot.clear();
        if (canonical(to_json(tally)) != canonical(e.body)) corrupt("tally differs on replay");
      } else if (e.type == "outcome") {
        recorded = outcome_from_json(e.body);
      }
    }
  } catch (const Json::exception& ex) {
    corrupt(std::string("malformed event: ") + ex.what());
  } catch (const Error& ex) {
    if (ex.code() == ErrorCode::CorruptRecord || ex.code() == ErrorCode::PreconditionViolation) {
      throw;
    }
    corrupt(std::string("event rejected by the engine: ") + ex.what());
  }
  if (!recorded) corrupt("log ends without an outcome");
  const auto actual = outcome(state);
  if (!actual) corrupt("replayed game did not finish");
  if (!(*actual == *recorded)) corrupt("replayed outcome differs from the recorded one");
  return *actual;
}

Runtime mock_runtime(const std::vector<WordPair>& lexicon) {
  Runtime rt;
  rt.llm_for = [lexicon](const AgentSpec& spec, PlayerId, std::uint64_t seed) {
    MockLlm::Options opts;
    opts.seed = seed;
    return LlmHandle{std::make_shared<MockLlm>(lexicon, opts), "mock-" + spec.backend};
  };
  rt.prover = std::make_shared<MockProver>(lexicon);
  return rt;
}

GameRecord run_game(const ContestSpec& spec, int game_index, const Runtime& runtime,
                    const EventSink& sink) {
  GameRecord rec;
  rec.game_index = game_index;
  rec.seed = game_seed(spec.base_seed, game_index);
  rec.spec_digest = spec.digest();

  GameConfig config;
  config.n_players = spec.n_players;
  config.word_pair = word_pair_for(spec, game_index);
  config.tie_limit = spec.tie_limit;
  config.max_parse_retries = spec.max_parse_retries;
  config.seed = rec.seed;
  config.spy_seat = spec.spy_seat;
  GameState state = new_game(config);
  const auto seats = seating(spec, game_index, state.spy());

  EventLog log(sink);
  {
    Json seat_json = Json::object();
    for (const auto& [p, s] : seats) {
      seat_json[std::to_string(p.value)] = {{"kind", std::string(to_string(s.kind))},
                                            {"backend", s.backend}};
    }
    log.append("game_started", {{"game_index", game_index},
                                {"seed", rec.seed},
                                {"spec_digest", rec.spec_digest},
                                {"config", to_json(config)},
                                {"seats", seat_json},
                                {"assignments_digest", assignments_digest(state)}});
  }

  std::map<PlayerId, Agent> agents;
  for (const auto& [p, s] : seats) {
    const LlmHandle llm = s.kind == AgentKind::Scripted ? LlmHandle{}
                                                          : runtime.llm_for(s, p, rec.seed);
    agents.emplace(p, Agent(p, s, llm, reference_of(config.word_pair, state.word_of(p)),
                            config.max_parse_retries));
  }
  std::map<PlayerId, GuessWord> guesses;
  std::map<PlayerId, LogicalRecord> records;

  auto neurosym_inputs = [&](PlayerId p, const TranscriptView& view) -> NeuroSymInputs {
    Agent& agent = agents.at(p);
    if (agent.kind() != AgentKind::NeuroSymAttNli) return {};
    if (!runtime.prover) fail(ErrorCode::ProverUnavailable, "no prover configured");
    if (!guesses.count(p)) {
      guesses[p] = initial_guess(view, agent.llm());
      log.append("guess", guess_json(guesses[p], p, view.round));
    }
    records[p] = build_logical_record(view, view.own_word, agent.llm(), *runtime.prover,
                                      runtime.theory_dump_dir);
    log.append("logical_record", record_json(records[p], p, view.round, view.stage));
    return {&records[p], &guesses[p]};
  };

  auto log_action = [&](const AgentAction& a, PlayerId p, const TranscriptView& view) {
    if (a.attribution) {
      log.append("attribution", attribution_json(*a.attribution, p, view.round, view.stage));
    }
    if (a.fallback_used) rec.fallback_used = true;
  };

  try {
    while (!state.is_finished()) {
      while (state.is_describing()) {
        const PlayerId p = state.next_speaker();
        const TranscriptView view = transcript_view(state, p);
        Agent& agent = agents.at(p);
        const NeuroSymInputs ns = neurosym_inputs(p, view);
        AgentAction action = agent.act(view, ns);
        int duplicates = 0;
        bool fallback_tried = action.fallback_used;
        std::string text = action.text;
        while (true) {
          try {
            // Copy: a rejected description must leave the state intact.
            state = submit_description(state, p, text);
            break;
          } catch (const Error& e) {
            if (e.code() != ErrorCode::DuplicateDescription) throw;
            ++duplicates;
            if (duplicates <= config.max_parse_retries && !fallback_tried) {
              action = agent.act(view, ns, std::string(kDuplicateCorrection));
              fallback_tried = action.fallback_used;
            } else if (!fallback_tried) {
              action = agent.fallback(view, action.attribution);
              fallback_tried = true;
            } else {
              action.text += " (" + to_string(p) + ", take " + std::to_string(duplicates) + ")";
            }
            text = action.text;
          }
        }
        log_action(action, p, view);
        log.append("description", {{"round", view.round},
                                   {"player", p.value},
                                   {"text", text},
                                   {"parse_attempts", action.parse_attempts},
                                   {"fallback_used", action.fallback_used},
                                   {"duplicate_retries", duplicates}});
      }
      if (!state.is_voting()) break;

      // Every vote is collected against the same pre-vote state.
      const int round = state.round();
      Ballot ballot;
      std::vector<std::pair<PlayerId, AgentAction>> votes;
      for (PlayerId p : state.alive()) {
        const TranscriptView view = transcript_view(state, p);
        const NeuroSymInputs ns = neurosym_inputs(p, view);
        AgentAction action = agents.at(p).act(view, ns);
        if (action.type != AgentAction::Type::Voted) {
          action = agents.at(p).fallback(view, action.attribution);
        }
        ballot[p] = action.target;
        log_action(action, p, view);
        log.append("vote", {{"round", round},
                            {"voter", p.value},
                            {"target", action.target.value},
                            {"parse_attempts", action.parse_attempts},
                            {"fallback_used", action.fallback_used}});
      }
      auto [next, tally] = apply_votes(std::move(state), ballot);
      state = std::move(next);
      log.append("tally", to_json(tally));

      if (tally.eliminated && !state.is_finished()) {
        const PlayerId out = *tally.eliminated;
        for (PlayerId p : state.alive()) {
          Agent& agent = agents.at(p);
          if (agent.kind() != AgentKind::NeuroSymAttNli || !guesses.count(p)) continue;
          const RecordEntry* entry = records.count(p) ? records[p].find(out, round) : nullptr;
          const TranscriptView view = transcript_view(state, p);
          Json body = {{"player", p.value},
                       {"round", view.round},
                       {"eliminated", out.value},
                       {"old", guesses[p].word}};
          if (!entry || entry->verdict.verdict != Verdict::Invalid || entry->error) {
            body["checked"] = false;
            body["record_verdict"] = entry ? std::string(to_string(entry->verdict.verdict)) : "none";
            body["new"] = guesses[p].word;
            log.append("guess_update", std::move(body));
            continue;
          }
          const Verification check =
              verify_description(out, view.descriptions_of(out), guesses[p].word, agent.llm(),
                                 *runtime.prover, runtime.theory_dump_dir);
          const IdentityHypothesis self = agent.last_attribution()
                                              ? agent.last_attribution()->self
                                              : IdentityHypothesis::Citizen;
          const GuessUpdate upd =
              update_guess(guesses[p], self, view, check.verdict, check.theory.source, agent.llm());
          guesses[p] = upd.guess;
          body["checked"] = true;
          body["record_verdict"] = "invalid";
          body["self"] = std::string(to_string(self));
          body["verdict"] = verdict_json(check.verdict);
          body["theory_digest"] = check.theory.digest();
          body["branch"] = std::string(to_string(upd.branch));
          body["new"] = upd.guess.word;
          body["changed"] = upd.changed;
          body["flagged"] = upd.flagged;
          log.append("guess_update", std::move(body));
        }
      }
    }
    rec.outcome = outcome(state);
    log.append("outcome", to_json(*rec.outcome));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::BackendUnavailable && e.code() != ErrorCode::ProverUnavailable) {
      throw;
    }
    rec.aborted = true;
    rec.abort_reason = e.what();
    rec.outcome.reset();
    log.append("aborted", {{"reason", rec.abort_reason}, {"round", state.round()}});
  }
  rec.events = log.take();
  return rec;
}

ContestReport build_report(const std::vector<GameRecord>& records, const Embedder& embedder,
                           const ReportOptions& options) {
  ContestReport report;
  report.options = options;
  report.n_records = static_cast<int>(records.size());
  std::vector<GameOutcome> outcomes;
  std::map<std::pair<std::string, std::string>, GroupAttribution> groups;

  for (const auto& rec : records) {
    GameSummary g;
    g.game_index = rec.game_index;
    g.seed = rec.seed;
    g.aborted = rec.aborted;
    g.fallback_used = rec.fallback_used;
    g.outcome = rec.outcome;
    const GameState state = initial_state(rec);
    const WordPair& pair = state.config().word_pair;
    g.citizen_word = pair.citizen_word;
    g.spy_word = pair.spy_word;
    if (rec.aborted || !rec.outcome) {
      ++report.aborted;
      report.games.push_back(std::move(g));
      continue;
    }
    if (options.exclude_fallback_games && rec.fallback_used) {
      ++report.excluded_fallback;
      report.games.push_back(std::move(g));
      continue;
    }
    g.counted = true;
    outcomes.push_back(*rec.outcome);

    std::vector<Description> transcript;
    std::map<PlayerId, std::string> kinds;
    for (const auto& e : rec.events) {
      if (e.type == "description") {
        transcript.push_back({e.body.at("round").get<int>(),
                              PlayerId{e.body.at("player").get<int>()},
                              e.body.at("text").get<std::string>()});
      }
    }
    for (const auto& [seat, s] : rec.events.front().body.at("seats").items()) {
      kinds[PlayerId{std::stoi(seat)}] = s.at("kind").get<std::string>();
    }
    std::map<PlayerId, Role> roles;
    for (const auto& [p, a] : state.assignments()) roles[p] = a.role;
    for (const auto& a : attribution_report(transcript, pair, roles, kinds, embedder)) {
      PlayerAttribution pa;
      pa.player = a.player;
      pa.role = a.role == Role::Spy ? "spy" : "citizen";
      pa.kind = a.kind;
      pa.as = a.as.value;
      pa.aa = a.aa.value;
      pa.att_score = a.att_score;
      pa.as_trace = a.as.trace;
      pa.aa_trace = a.aa.trace;
      auto& grp = groups[{pa.role, pa.kind}];
      grp.role = pa.role;
      grp.kind = pa.kind;
      ++grp.n;
      grp.as += pa.as;
      grp.aa += pa.aa;
      grp.att_score += pa.att_score;
      g.players.push_back(std::move(pa));
    }
    report.games.push_back(std::move(g));
  }
  if (!outcomes.empty()) report.metrics = aggregate_game_metrics(outcomes);
  for (auto& [key, grp] : groups) {
    grp.as /= grp.n;
    grp.aa /= grp.n;
    grp.att_score /= grp.n;
    report.attribution.push_back(grp);
  }
  return report;
}

namespace {

Json trace_json(const std::vector<RoundValue>& trace) {
  Json out = Json::array();
  for (const auto& r : trace) out.push_back({{"round", r.round}, {"value", r.value}, {"weight", r.weight}});
  return out;
}

}  // namespace

Json to_json(const ContestReport& report) {
  Json j;
  j["n_records"] = report.n_records;
  j["aborted"] = report.aborted;
  j["excluded_fallback"] = report.excluded_fallback;
  if (report.metrics) {
    j["metrics"] = {{"spy_win_rate", report.metrics->spy_win_rate},
                    {"citizen_elimination_rate", report.metrics->citizen_elimination_rate},
                    {"avg_rounds", report.metrics->avg_rounds},
                    {"n_games", report.metrics->n_games}};
  } else {
    j["metrics"] = nullptr;
  }
  Json groups = Json::array();
  for (const auto& g : report.attribution) {
    groups.push_back({{"role", g.role},
                      {"kind", g.kind},
                      {"n", g.n},
                      {"as", g.as},
                      {"aa", g.aa},
                      {"att_score", g.att_score}});
  }
  j["attribution"] = groups;
  Json games = Json::array();
  for (const auto& g : report.games) {
    Json jg = {{"game_index", g.game_index},
               {"seed", g.seed},
               {"citizen_word", g.citizen_word},
               {"spy_word", g.spy_word},
               {"aborted", g.aborted},
               {"fallback_used", g.fallback_used},
               {"counted", g.counted}};
    jg["outcome"] = g.outcome ? to_json(*g.outcome) : Json(nullptr);
    Json players = Json::array();
    for (const auto& p : g.players) {
      Json jp = {{"player", p.player.value}, {"role", p.role},   {"kind", p.kind},
                 {"as", p.as},               {"aa", p.aa},       {"att_score", p.att_score}};
      if (report.options.verbose) {
        jp["as_trace"] = trace_json(p.as_trace);
        jp["aa_trace"] = trace_json(p.aa_trace);
      }
      players.push_back(std::move(jp));
    }
    jg["players"] = players;
    games.push_back(std::move(jg));
  }
  j["games"] = games;
  j["reference"] = {{"att_scores", Json(std::vector<double>(std::begin(kReferenceAttScores),
                                                            std::end(kReferenceAttScores)))},
                    {"neurosym_win_rate", kReferenceNeuroSymWinRate}};
  return j;
}

std::string to_csv(const ContestReport& report) {
  auto quote = [](const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out += '"';
      out += c;
    }
    return out + "\"";
  };
  std::string out =
      "game_index,seed,citizen_word,spy_word,counted,winner,reason,rounds_played,"
      "eliminated_citizens,player,role,kind,as,aa,att_score\n";
  for (const auto& g : report.games) {
    std::string prefix = std::to_string(g.game_index) + "," + std::to_string(g.seed) + "," +
                         quote(g.citizen_word) + "," + quote(g.spy_word) + "," +
                         (g.counted ? "1" : "0") + ",";
    if (g.outcome) {
      prefix += std::string(to_string(g.outcome->winner)) + "," +
                std::string(to_string(g.outcome->reason)) + "," +
                std::to_string(g.outcome->rounds_played) + "," +
                std::to_string(g.outcome->eliminated_citizens) + ",";
    } else {
      prefix += "aborted,,,,";
    }
    if (g.players.empty()) {
      out += prefix + ",,,,,\n";
      continue;
    }
    for (const auto& p : g.players) {
      out += prefix + std::to_string(p.player.value) + "," + p.role + "," + p.kind + "," +
             fmt_double(p.as) + "," + fmt_double(p.aa) + "," + fmt_double(p.att_score) + "\n";
    }
  }
  return out;
}

std::string game_file_name(int game_index) {
  std::string n = std::to_string(game_index);
  if (n.size() < 4) n.insert(0, 4 - n.size(), '0');
  return "game_" + n + ".jsonl";
}

ContestResult run_contest(const ContestSpec& spec, const Runtime& runtime,
                          const Embedder& embedder, const ContestOptions& options) {
  spec.validate();
  const int n = total_games(spec);
  std::vector<std::optional<GameRecord>> slots(static_cast<std::size_t>(n));
  std::atomic<int> next{0};
  std::mutex error_mu;
  std::exception_ptr first_error;
  if (options.out_dir) std::filesystem::create_directories(*options.out_dir / "games");

  auto worker = [&] {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        std::ofstream file;
        EventSink sink;
        if (options.out_dir) {
          file.open(*options.out_dir / "games" / game_file_name(i), std::ios::binary);
          if (!file) fail(ErrorCode::Io, "cannot write " + game_file_name(i));
          sink = [&file](const Event& e) { file << to_line(e) << "\n" << std::flush; };
        }
        slots[static_cast<std::size_t>(i)] = run_game(spec, i, runtime, sink);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  const int workers = std::max(1, std::min(options.workers, n));
  {
    std::vector<std::jthread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
  }
  if (first_error) std::rethrow_exception(first_error);

  ContestResult result;
  result.records.reserve(slots.size());
  for (auto& s : slots) result.records.push_back(std::move(*s));
  result.report = build_report(result.records, embedder, options.report);
  return result;
}

ConsistencyReport consistency_check(const GameRecord& record, const ConsistencyOracle& oracle) {
  const GameState state = initial_state(record);
  std::vector<Description> descriptions;
  for (const auto& e : record.events) {
    if (e.type != "description") continue;
    descriptions.push_back({e.body.at("round").get<int>(), PlayerId{e.body.at("player").get<int>()},
                            e.body.at("text").get<std::string>()});
  }
  std::map<PlayerId, std::string> words;
  for (const auto& [p, a] : state.assignments()) words[p] = a.word;
  return consistency_check(descriptions, words, oracle);
}

}  // namespace undercover
