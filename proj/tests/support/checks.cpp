#include <chrono>
#include <cmath>
#include <sstream>
#include <unistd.h>

#include "commands.hpp"
#include "support.hpp"
#include "undercover/error.hpp"
#include "undercover/metrics.hpp"
#include "undercover/neurosym.hpp"
#include "undercover/serialize.hpp"
#include "undercover/text.hpp"

namespace undercover::testing {
namespace {

using Clock = std::chrono::steady_clock;

class Check {
 public:
  explicit Check(std::string name) : start_(Clock::now()) { result_.name = std::move(name); }

  // Records the first failure only; later ones are usually consequences.
  bool expect(bool ok, const std::string& what) {
    if (!ok && failures_++ == 0) first_ = what;
    return ok;
  }
  void note(const std::string& s) { notes_ += (notes_.empty() ? "" : "; ") + s; }

  CheckResult finish(double time_limit = 0.0) {
    result_.seconds = std::chrono::duration<double>(Clock::now() - start_).count();
    if (time_limit > 0.0) {
      std::ostringstream os;
      os << "runtime " << result_.seconds << " s exceeds " << time_limit << " s";
      expect(result_.seconds < time_limit, os.str());
    }
    result_.pass = failures_ == 0;
    result_.detail = result_.pass ? notes_ : first_ + " (" + std::to_string(failures_) + " failures)";
    return result_;
  }

 private:
  CheckResult result_;
  Clock::time_point start_;
  int failures_ = 0;
  std::string first_;
  std::string notes_;
};

template <typename F>
CheckResult guarded(const std::string& name, F&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    CheckResult r;
    r.name = name;
    r.detail = std::string("threw: ") + e.what();
    return r;
  }
}

std::string round_text(int round, int player, const std::string& topic) {
  return "Round " + std::to_string(round) + " thought from player " + std::to_string(player) +
         " about " + topic + ".";
}

GameState voting_state(int n_players, PlayerId spy, std::uint64_t seed = 1) {
  GameConfig c;
  c.n_players = n_players;
  c.word_pair = pair_named("Earl Grey Tea");
  c.seed = seed;
  c.spy_seat = spy;
  GameState s = new_game(c);
  while (s.is_describing()) {
    const PlayerId p = s.next_speaker();
    s = submit_description(std::move(s), p, round_text(s.round(), p.value, "a warm drink"));
  }
  return s;
}

int count_votes_for(const Json& tally, int player) {
  int n = 0;
  for (const auto& [voter, target] : tally.at("votes").items()) n += target.get<int>() == player;
  return n;
}

}  // namespace

CheckResult check_golden_case_study() {
  return guarded("golden case-study replay", [] {
    Check c("golden case-study replay");
    const GameRecord rec = run_case_study();
    c.expect(!rec.aborted, "game aborted: " + rec.abort_reason);
    c.expect(rec.outcome.has_value(), "no outcome");
    if (rec.outcome) {
      c.expect(rec.outcome->winner == Winner::Citizens, "citizens did not win");
      c.expect(rec.outcome->reason == EndReason::SpyEliminated, "spy not eliminated");
      c.expect(rec.outcome->rounds_played == 1, "game did not end in round 1");
    }
    int tallies = 0;
    for (const auto& e : rec.events) {
      if (e.type != "tally") continue;
      ++tallies;
      const Json& res = e.body.at("result");
      c.expect(res.at("kind") == "eliminated" && res.at("player") == 6, "player 6 not eliminated");
      c.expect(count_votes_for(e.body, 6) == 5, "player 6 did not receive 5 votes");
    }
    c.expect(tallies == 1, "expected one vote");
    c.expect(!rec.fallback_used, "a scripted reply was not parsed");
    c.expect(matches_golden("case_study.jsonl", rec.to_jsonl()), "transcript differs from golden file");
    c.note("Citizens win in round 1, player 6 out 5-1");
    return c.finish(1.0);
  });
}

CheckResult check_tie_rules() {
  return guarded("tie rules", [] {
    Check c("tie rules");
    const WordPair& pair = pair_named("Earl Grey Tea");

    // Three consecutive 3-3 splits between players 1 and 4.
    std::vector<std::vector<std::string>> desc(3, std::vector<std::string>(6));
    for (int r = 0; r < 3; ++r) {
      for (int p = 0; p < 6; ++p) desc[r][p] = round_text(r + 1, p + 1, "a warm drink");
    }
    const std::vector<std::vector<int>> votes(3, {4, 4, 4, 1, 1, 1});
    const GameRecord tied = run_game(scripted_contest(pair, 6, PlayerId{6}, desc, votes), 0, {});
    c.expect(tied.outcome && tied.outcome->winner == Winner::Spy &&
                 tied.outcome->reason == EndReason::TieLimit && tied.outcome->rounds_played == 3,
             "three ties did not end Spy/TieLimit in round 3");
    c.expect(replay(tied) == *tied.outcome, "tie game does not replay");

    // Two ties, then a citizen elimination resets the streak.
    GameState s = voting_state(6, PlayerId{6});
    const Ballot tie = {{PlayerId{1}, PlayerId{4}}, {PlayerId{2}, PlayerId{4}}, {PlayerId{3}, PlayerId{4}},
                        {PlayerId{4}, PlayerId{1}}, {PlayerId{5}, PlayerId{1}}, {PlayerId{6}, PlayerId{1}}};
    for (int i = 1; i <= 2; ++i) {
      auto [next, t] = apply_votes(std::move(s), tie);
      c.expect(t.is_tie() && next.tie_streak() == i, "tie streak did not count up");
      s = std::move(next);
      while (s.is_describing()) {
        const PlayerId p = s.next_speaker();
        s = submit_description(std::move(s), p, round_text(s.round(), p.value, "a warm drink"));
      }
    }
    const Ballot out2 = {{PlayerId{1}, PlayerId{2}}, {PlayerId{2}, PlayerId{1}}, {PlayerId{3}, PlayerId{2}},
                         {PlayerId{4}, PlayerId{2}}, {PlayerId{5}, PlayerId{2}}, {PlayerId{6}, PlayerId{2}}};
    auto [after, t3] = apply_votes(std::move(s), out2);
    c.expect(t3.eliminated == PlayerId{2}, "plurality target not eliminated");
    c.expect(after.tie_streak() == 0, "tie streak not reset");
    c.expect(after.is_describing() && after.round() == 4 && after.alive().size() == 5,
             "game did not continue to round 4");

    // Every ballot at n=6 against the oracle.
    const GameState base = voting_state(6, PlayerId{6});
    long exhaustive = 0;
    long mismatches = 0;
    auto target_of = [](int voter, int k) { return k + 1 >= voter ? k + 2 : k + 1; };
    for (int code = 0; code < 15625; ++code) {
      int x = code;
      Ballot b;
      for (int v = 1; v <= 6; ++v) {
        b[PlayerId{v}] = PlayerId{target_of(v, x % 5)};
        x /= 5;
      }
      auto [next, t] = apply_votes(base, b);
      const auto expect_out = oracle_tally(b);
      ++exhaustive;
      bool ok = t.eliminated == expect_out;
      ok = ok && next.tie_streak() == (expect_out ? 0 : 1);
      ok = ok && next.alive().size() == (expect_out ? 5u : 6u);
      if (expect_out && *expect_out == PlayerId{6}) ok = ok && next.is_finished();
      if (!ok) ++mismatches;
    }
    c.expect(mismatches == 0, std::to_string(mismatches) + " of 15625 ballots disagree with the oracle");

    // Ballots restricted to two candidates.
    long restricted = 0;
    for (int a = 1; a <= 6; ++a) {
      for (int bcand = a + 1; bcand <= 6; ++bcand) {
        for (int mask = 0; mask < 64; ++mask) {
          Ballot b;
          for (int v = 1; v <= 6; ++v) {
            int t = (mask >> (v - 1)) & 1 ? bcand : a;
            if (t == v) t = v == a ? bcand : a;
            b[PlayerId{v}] = PlayerId{t};
          }
          auto [next, t] = apply_votes(base, b);
          ++restricted;
          if (t.eliminated != oracle_tally(b)) ++mismatches;
        }
      }
    }

    // Sampled ballots at other table sizes and seats.
    std::mt19937_64 rng(20241014);
    for (int i = 0; i < 10000; ++i) {
      const int n = std::uniform_int_distribution<int>(3, 8)(rng);
      const PlayerId spy{std::uniform_int_distribution<int>(1, n)(rng)};
      const GameState st = voting_state(n, spy, rng());
      Ballot b;
      for (int v = 1; v <= n; ++v) {
        int t = std::uniform_int_distribution<int>(1, n - 1)(rng);
        if (t >= v) ++t;
        b[PlayerId{v}] = PlayerId{t};
      }
      auto [next, t] = apply_votes(st, b);
      if (t.eliminated != oracle_tally(b)) ++mismatches;
    }
    c.expect(mismatches == 0, "tally disagrees with the oracle");
    c.note(std::to_string(exhaustive) + " exhaustive, " + std::to_string(restricted) +
           " two-candidate, 10000 sampled ballots");
    return c.finish();
  });
}

CheckResult check_metrics_oracle() {
  return guarded("metrics oracle equivalence", [] {
    Check c("metrics oracle equivalence");
    const auto embedder = mock_embedder();
    const auto pairs = word_pairs();
    std::mt19937_64 rng(4242);
    std::vector<std::string> vocab;
    for (const auto& p : pairs) {
      for (const auto& t : text::tokenize(p.citizen_reference + " " + p.spy_reference)) vocab.push_back(t);
    }
    double worst = 0.0;
    double worst_weight = 0.0;
    int agents = 0;
    for (int g = 0; g < 200; ++g) {
      const WordPair& pair = pairs[rng() % pairs.size()];
      const int n = std::uniform_int_distribution<int>(2, 6)(rng);
      const int rounds = std::uniform_int_distribution<int>(1, 4)(rng);
      std::vector<int> alive(n);
      std::iota(alive.begin(), alive.end(), 1);
      std::vector<Description> transcript;
      for (int r = 1; r <= rounds && !alive.empty(); ++r) {
        std::string shared;
        for (int p : alive) {
          std::string s;
          const int len = std::uniform_int_distribution<int>(1, 8)(rng);
          for (int k = 0; k < len; ++k) s += (k ? " " : "") + vocab[rng() % vocab.size()];
          if (rng() % 10 == 0 && !shared.empty()) s = shared;
          shared = s;
          transcript.push_back({r, PlayerId{p}, s});
        }
        if (alive.size() > 1 && rng() % 2) alive.erase(alive.begin() + static_cast<long>(rng() % alive.size()));
      }
      std::shuffle(transcript.begin(), transcript.end(), rng);
      for (int p = 1; p <= n; ++p) {
        const PlayerId id{p};
        const OracleMetrics want = oracle_metrics(id, transcript, pair);
        const MetricValue as = attributional_soundness(id, transcript, pair, *embedder);
        ++agents;
        worst = std::max(worst, std::abs(as.value - want.as));
        double ws = 0;
        for (const auto& rv : as.trace) ws += rv.weight;
        worst_weight = std::max(worst_weight, std::abs(ws - 1.0));
        if (!want.has_aa) {
          bool threw = false;
          try {
            attributional_alignment(id, transcript, *embedder);
          } catch (const Error& e) {
            threw = e.code() == ErrorCode::NoQualifyingRound;
          }
          c.expect(threw, "alignment without other describers did not report NoQualifyingRound");
          continue;
        }
        const MetricValue aa = attributional_alignment(id, transcript, *embedder);
        ws = 0;
        for (const auto& rv : aa.trace) ws += rv.weight;
        worst_weight = std::max(worst_weight, std::abs(ws - 1.0));
        worst = std::max(worst, std::abs(aa.value - want.aa));
        worst = std::max(worst, std::abs(attributional_score(as.value, aa.value) - want.att));
      }
    }
    std::ostringstream os;
    os << "max |engine - oracle| = " << worst << ", max |sum w - 1| = " << worst_weight;
    c.expect(worst <= 1e-9, os.str());
    c.expect(worst_weight <= 1e-12, os.str());
    c.note(std::to_string(agents) + " agents over 200 transcripts, " + os.str());
    return c.finish(10.0);
  });
}

CheckResult check_round_weights() {
  return guarded("round weights", [] {
    Check c("round weights");
    const std::vector<std::pair<std::vector<int>, std::vector<double>>> cases = {
        {{1}, {1.0}}, {{1, 2}, {1.0 / 3, 2.0 / 3}}, {{1, 2, 3}, {1.0 / 6, 2.0 / 6, 3.0 / 6}}};
    for (const auto& [rounds, want] : cases) {
      const auto got = round_weights(rounds);
      c.expect(got.size() == want.size(), "weight count");
      for (std::size_t i = 0; i < want.size() && i < got.size(); ++i) {
        c.expect(std::abs(got[i] - want[i]) <= 1e-12, "weight mismatch");
      }
    }
    c.note("[1], [1/3,2/3], [1/6,1/3,1/2]");
    return c.finish();
  });
}

CheckResult check_majority_exhaustive() {
  return guarded("early-stop majority exhaustiveness", [] {
    Check c("early-stop majority exhaustiveness");
    const Verdict all[] = {Verdict::Valid, Verdict::Invalid, Verdict::SyntaxError};
    int max_runs = 0;
    for (int code = 0; code < 81; ++code) {
      std::vector<ProverResponse> seq;
      int x = code;
      for (int i = 0; i < 4; ++i) {
        seq.push_back({all[x % 3], {"run " + std::to_string(i)}});
        x /= 3;
      }
      SequenceProver prover(seq);
      const MajorityResult m = early_stop_majority("theory", prover);
      max_runs = std::max(max_runs, static_cast<int>(m.runs.size()));
      c.expect(m.runs.size() <= 4, "more than four runs");
      c.expect(prover.calls() == m.runs.size(), "run count differs from prover calls");
      int count = 0;
      for (auto v : m.runs) count += v == m.verdict.verdict;
      c.expect(count >= 2, "returned outcome seen fewer than twice");
      // Oracle: the first outcome whose count reaches two.
      std::map<Verdict, int> seen;
      std::optional<Verdict> first;
      std::size_t used = 0;
      for (const auto& r : seq) {
        ++used;
        if (++seen[r.status] == 2) {
          first = r.status;
          break;
        }
      }
      c.expect(first == m.verdict.verdict && used == m.runs.size(), "differs from the oracle");
      c.expect(m.verdict.trace.has_value() == (m.verdict.verdict != Verdict::Valid),
               "trace present exactly on non-valid verdicts");
    }
    c.note("81 sequences, at most " + std::to_string(max_runs) + " runs");
    return c.finish();
  });
}

CheckResult check_refinement_bound() {
  return guarded("syntax refinement bound", [] {
    Check c("syntax refinement bound");
    Theory theory;
    theory.source = "theory Hypothesis imports Main begin\n" + std::string(kSyntaxErrorMarker) + "\nend\n";
    FunctionProver never_clean([](const std::string&) {
      return ProverResponse{Verdict::SyntaxError, {"Inner syntax error"}};
    });
    int repair_calls = 0;
    LlmHandle llm{std::make_shared<FunctionBackend>([&](const ChatRequest&) {
                    ++repair_calls;
                    return std::string("theory Hypothesis imports Main begin\n") +
                           std::string(kSyntaxErrorMarker) + "\nend";
                  }),
                  "repair"};
    const RefineResult r = refine_syntax(theory, never_clean, llm);
    c.expect(r.repairs == 5 && repair_calls == 5, "never-clean prover did not get exactly 5 repairs");
    c.expect(!r.clean, "dirty theory flagged clean");
    c.expect(never_clean.calls() == 5, "prover checks differ from repair iterations");

    SequenceProver fixed({{Verdict::SyntaxError, {"e1"}}, {Verdict::SyntaxError, {"e2"}},
                          {Verdict::Invalid, {"no proof"}}});
    repair_calls = 0;
    const RefineResult r2 = refine_syntax(theory, fixed, llm);
    c.expect(r2.repairs == 2 && repair_calls == 2 && r2.clean, "fixed-on-second-repair case");
    c.note("5 repairs then dirty; 2 repairs then clean");
    return c.finish();
  });
}

CheckResult check_guess_update() {
  return guarded("guess-update branches", [] {
    Check c("guess-update branches");
    const auto pairs = word_pairs();
    std::mt19937_64 rng(99);
    std::map<GuessBranch, int> hits;
    int combos_ok = 0;
    for (int i = 0; i < 1000; ++i) {
      const WordPair& pair = pairs[rng() % pairs.size()];
      GameConfig cfg;
      cfg.word_pair = pair;
      cfg.seed = rng();
      cfg.spy_seat = PlayerId{6};
      GameState s = new_game(cfg);
      while (s.is_describing()) {
        const PlayerId p = s.next_speaker();
        s = submit_description(std::move(s), p, round_text(1, p.value, "the card"));
      }
      Ballot b;
      for (int v = 1; v <= 6; ++v) b[PlayerId{v}] = PlayerId{v == 2 ? 3 : 2};
      s = apply_votes(std::move(s), b).first;
      const PlayerId me{std::uniform_int_distribution<int>(3, 6)(rng)};
      const TranscriptView view = transcript_view(s, me);

      GuessWord guess;
      guess.word = "Mystery" + std::to_string(rng() % 50);
      const IdentityHypothesis self = rng() % 2 ? IdentityHypothesis::Spy : IdentityHypothesis::Citizen;
      const Verdict vk = std::vector<Verdict>{Verdict::Valid, Verdict::Invalid, Verdict::SyntaxError}[rng() % 3];
      const ProverVerdict verdict = make_verdict(vk, {"Failed to finish proof"});
      const int reply_kind = static_cast<int>(rng() % 6);
      const std::string fresh = "Candidate" + std::to_string(rng() % 1000);
      int calls = 0;
      LlmHandle llm{std::make_shared<FunctionBackend>([&](const ChatRequest&) -> std::string {
                      ++calls;
                      switch (reply_kind) {
                        case 0: return "Reasoning: ...\nThe opponent's word: " + view.own_word;
                        case 1: return "The opponent's word: " + text::to_lower(view.own_word);
                        case 2: return "";
                        case 3: return "Reasoning: keep it.\nThe opponent's word: " + guess.word;
                        case 4: fail(ErrorCode::BackendUnavailable, "down");
                        default: return "Reasoning: the errors are severe.\nThe opponent's word: " + fresh;
                      }
                    }),
                    "mock"};
      const GuessUpdate u = update_guess(guess, self, view, verdict, "theory text", llm);
      ++hits[u.branch];
      bool ok = !text::iequals(u.guess.word, view.own_word);
      ok = ok && u.guess.history.size() == guess.history.size() + 1;
      if (vk == Verdict::Valid) {
        ok = ok && u.branch == GuessBranch::KeptValid && u.guess.word == guess.word && calls == 0;
      } else if (self == IdentityHypothesis::Spy) {
        ok = ok && u.branch == GuessBranch::SpyUpdate && calls == 1;
        ok = ok && (reply_kind == 5 ? u.guess.word == fresh : u.guess.word == guess.word);
      } else {
        ok = ok && calls == 1;
        ok = ok && (reply_kind == 5 ? u.branch == GuessBranch::CitizenUpdate && u.guess.word == fresh
                                    : u.branch == GuessBranch::CitizenKeep && u.guess.word == guess.word);
      }
      ok = ok && u.changed == (u.guess.word != guess.word);
      combos_ok += ok;
      c.expect(ok, "fixture " + std::to_string(i) + " took the wrong branch");
    }
    for (auto b : {GuessBranch::KeptValid, GuessBranch::SpyUpdate, GuessBranch::CitizenKeep,
                   GuessBranch::CitizenUpdate}) {
      c.expect(hits[b] > 0, std::string("branch never exercised: ") + std::string(to_string(b)));
    }
    std::ostringstream os;
    os << combos_ok << "/1000 fixtures; kept_valid " << hits[GuessBranch::KeptValid] << ", spy_update "
       << hits[GuessBranch::SpyUpdate] << ", citizen_keep " << hits[GuessBranch::CitizenKeep]
       << ", citizen_update " << hits[GuessBranch::CitizenUpdate];
    c.note(os.str());
    return c.finish();
  });
}

CheckResult check_information_hiding() {
  return guarded("information hiding", [] {
    Check c("information hiding");
    const AgentKind kinds[] = {AgentKind::StandardNli, AgentKind::StandardAttNli, AgentKind::NeuroSymAttNli};
    long prompts = 0;
    long views = 0;
    for (int g = 0; g < 100; ++g) {
      ContestSpec spec = mock_contest(1, 1000003ULL * static_cast<std::uint64_t>(g) + 17, kinds[g % 3],
                                      kinds[(g / 3) % 3]);
      std::map<PlayerId, std::shared_ptr<RecordingBackend>> seats;
      Runtime rt = mock_runtime(spec.word_pairs);
      auto inner = rt.llm_for;
      rt.llm_for = [&seats, inner](const AgentSpec& s, PlayerId seat, std::uint64_t seed) {
        LlmHandle h = inner(s, seat, seed);
        auto rec = std::make_shared<RecordingBackend>(h.backend);
        seats[seat] = rec;
        return LlmHandle{rec, h.model};
      };
      const GameRecord record = run_game(spec, g % total_games(spec), rt);
      GameState state = initial_state(record);
      auto foreign_for = [&](PlayerId p) {
        std::vector<std::string> out;
        const auto& pair = state.config().word_pair;
        for (const auto& w : {pair.citizen_word, pair.spy_word}) {
          if (w != state.word_of(p)) out.push_back(w);
        }
        return out;
      };
      for (const auto& [seat, rec] : seats) {
        const auto foreign = foreign_for(seat);
        for (const auto& ex : rec->exchanges()) {
          for (const auto& m : ex.request.messages) {
            ++prompts;
            const auto hits = leaked_terms(m.content, foreign);
            c.expect(hits.empty(), "game " + std::to_string(g) + ": prompt to " + to_string(seat) +
                                       " contains '" + (hits.empty() ? "" : hits.front()) + "'");
          }
        }
      }
      auto scan_views = [&](const GameState& s) {
        for (PlayerId p : s.players()) {
          ++views;
          const auto hits = leaked_terms(canonical(to_json(transcript_view(s, p))), foreign_for(p));
          c.expect(hits.empty(), "game " + std::to_string(g) + ": view of " + to_string(p) + " leaks");
        }
      };
      scan_views(state);
      Ballot ballot;
      for (const auto& e : record.events) {
        if (e.type == "description") {
          state = submit_description(std::move(state), PlayerId{e.body.at("player").get<int>()},
                                     e.body.at("text").get<std::string>());
          scan_views(state);
        } else if (e.type == "vote") {
          ballot[PlayerId{e.body.at("voter").get<int>()}] = PlayerId{e.body.at("target").get<int>()};
        } else if (e.type == "tally") {
          state = apply_votes(std::move(state), ballot).first;
          ballot.clear();
          scan_views(state);
        }
      }
    }
    c.note(std::to_string(prompts) + " messages and " + std::to_string(views) + " views scanned");
    return c.finish();
  });
}

namespace {

Json mutated_body(const Event& e) {
  Json b = e.body;
  if (e.type == "description") {
    b["text"] = b["text"].get<std::string>() + " Altered.";
  } else if (e.type == "vote") {
    b["target"] = b["target"].get<int>() == 1 ? 2 : 1;
  } else if (e.type == "outcome") {
    b["winner"] = b["winner"] == "spy" ? "citizens" : "spy";
  } else if (e.type == "tally") {
    auto& votes = b["votes"];
    const std::string first = votes.begin().key();
    votes[first] = votes[first].get<int>() == 1 ? 2 : 1;
  } else {
    b["tampered"] = true;
  }
  return b;
}

bool detected(const GameRecord& rec, const std::vector<Event>& events) {
  GameRecord copy = rec;
  copy.events = events;
  try {
    const GameRecord parsed = GameRecord::from_jsonl(copy.to_jsonl());
    if (!parsed.outcome) return true;
    return !(replay(parsed) == *parsed.outcome) || !(*parsed.outcome == *rec.outcome);
  } catch (const Error& e) {
    return e.code() == ErrorCode::CorruptRecord;
  }
}

}  // namespace

CheckResult check_replay_closure() {
  return guarded("replay closure", [] {
    Check c("replay closure");
    const ContestSpec spec = mock_contest(5, 77, AgentKind::NeuroSymAttNli, AgentKind::StandardAttNli);
    const Runtime rt = mock_runtime(spec.word_pairs);
    const Embedder embedder(std::make_shared<MockEmbeddingProvider>());
    ContestOptions opts;
    opts.workers = 2;
    const ContestResult result = run_contest(spec, rt, embedder, opts);
    c.expect(result.records.size() == 50, "expected 50 games");
    long mutations = 0;
    for (const auto& rec : result.records) {
      if (!c.expect(!rec.aborted && rec.outcome, "game aborted")) continue;
      const GameRecord parsed = GameRecord::from_jsonl(rec.to_jsonl());
      c.expect(replay(parsed) == *rec.outcome, "game " + std::to_string(rec.game_index) + " replays differently");
      for (std::size_t i = 0; i < rec.events.size(); ++i) {
        for (int rehash = 0; rehash < 2; ++rehash) {
          auto events = rec.events;
          events[i].body = mutated_body(events[i]);
          if (rehash) events[i].digest = event_digest(events[i].seq, events[i].type, events[i].body, events[i].prev);
          ++mutations;
          c.expect(detected(rec, events), "undetected mutation of event " + std::to_string(i) + " (" +
                                              events[i].type + ") in game " + std::to_string(rec.game_index));
        }
      }
      if (rec.events.size() > 2) {
        auto swapped = rec.events;
        std::swap(swapped[1], swapped[2]);
        ++mutations;
        c.expect(detected(rec, swapped), "undetected reorder");
        auto truncated = rec.events;
        truncated.pop_back();
        ++mutations;
        c.expect(detected(rec, truncated), "undetected truncation");
      }
    }
    c.note("50 games replayed, " + std::to_string(mutations) + " mutations detected");
    return c.finish();
  });
}

CheckResult check_consistency() {
  return guarded("consistency checker", [] {
    Check c("consistency checker");
    const auto pairs = word_pairs();
    const KeywordConsistencyOracle oracle(pairs);
    int games = 0;
    for (const auto& pair : pairs) {
      const PlayerId spy{6};
      auto truthful = [&](int round, int player) {
        const std::string& ref = player == spy.value ? pair.spy_reference : pair.citizen_reference;
        std::vector<std::string> toks;
        for (const auto& t : text::tokenize(ref)) {
          if (!text::is_stopword(t)) toks.push_back(t);
        }
        std::string s = "Round " + std::to_string(round) + " player " + std::to_string(player) + ":";
        for (int k = 0; k < 3; ++k) s += " " + toks[(static_cast<std::size_t>(round * 3 + player) + k) % toks.size()];
        return s + ".";
      };
      std::vector<std::vector<std::string>> desc(3, std::vector<std::string>(6));
      for (int r = 0; r < 3; ++r) {
        for (int p = 0; p < 6; ++p) desc[r][p] = truthful(r + 1, p + 1);
      }
      const std::vector<std::vector<int>> votes(3, {4, 4, 4, 1, 1, 1});
      const GameRecord clean = run_game(scripted_contest(pair, 6, spy, desc, votes), 0, {});
      const ConsistencyReport r1 = consistency_check(clean, oracle);
      c.expect(r1.checks == 18, "expected 18 cumulative checks");
      c.expect(r1.violations.empty(), "truthful game reported a violation for " + pair.citizen_word);

      // Player 3, a citizen, describes the spy word in round 2.
      std::string lie = "Round 2 player 3:";
      const auto own = text::content_tokens(pair.citizen_reference);
      for (const auto& t : text::content_tokens(pair.spy_reference)) {
        if (!own.count(t)) lie += " " + t;
      }
      desc[1][2] = lie + ".";
      const GameRecord dirty = run_game(scripted_contest(pair, 6, spy, desc, votes), 0, {});
      const ConsistencyReport r2 = consistency_check(dirty, oracle);
      std::set<std::pair<int, int>> got;
      for (const auto& v : r2.violations) got.insert({v.player.value, v.round});
      c.expect(got == std::set<std::pair<int, int>>{{3, 2}, {3, 3}},
               "injected contradiction not flagged at rounds 2 and 3 only for " + pair.citizen_word);
      ++games;
    }
    c.expect(consistency_check(std::vector<Description>{}, {}, oracle).violations.empty(), "empty game");
    c.note(std::to_string(games) + " truthful and " + std::to_string(games) + " injected games");
    return c.finish();
  });
}

namespace {

void compare_json(const Json& a, const Json& b, const std::string& path, double& worst,
                  std::vector<std::string>& diffs) {
  if (a.is_number_float() || b.is_number_float()) {
    if (!a.is_number() || !b.is_number()) {
      diffs.push_back(path);
      return;
    }
    worst = std::max(worst, std::abs(a.get<double>() - b.get<double>()));
    return;
  }
  if (a.type() != b.type()) {
    diffs.push_back(path);
    return;
  }
  if (a.is_object()) {
    if (a.size() != b.size()) diffs.push_back(path);
    for (const auto& [k, v] : a.items()) {
      if (!b.contains(k)) {
        diffs.push_back(path + "/" + k);
        continue;
      }
      compare_json(v, b.at(k), path + "/" + k, worst, diffs);
    }
  } else if (a.is_array()) {
    if (a.size() != b.size()) {
      diffs.push_back(path);
      return;
    }
    for (std::size_t i = 0; i < a.size(); ++i) compare_json(a[i], b[i], path + "/" + std::to_string(i), worst, diffs);
  } else if (a != b) {
    diffs.push_back(path);
  }
}

}  // namespace

CheckResult check_score_reproduces_play() {
  return guarded("score reproduces play", [] {
    Check c("score reproduces play");
    const auto dir = std::filesystem::temp_directory_path() /
                     ("undercover_score_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    Json cfg = {{"contest",
                 {{"mode", "round_robin"},
                  {"n_games", 1},
                  {"base_seed", 5},
                  {"spy_agent", {{"kind", "neurosym_att_nli"}, {"backend", "mock"}}},
                  {"citizen_agent", {{"kind", "standard_att_nli"}, {"backend", "mock"}}}}},
                {"word_pairs", (source_dir() / "configs" / "word_pairs.json").string()},
                {"embedder", {{"kind", "mock"}, {"dim", 256}}}};
    write_text(dir / "config.json", cfg.dump(2));
    std::ostringstream out, err;
    cli::PlayOptions play;
    play.config = dir / "config.json";
    play.out = dir / "run";
    play.workers = 2;
    c.expect(cli::cmd_play(play, out, err) == 0, "play failed: " + err.str());
    cli::ScoreOptions score;
    score.in = dir / "run";
    c.expect(cli::cmd_score(score, out, err) == 0, "score failed: " + err.str());
    const Json played = Json::parse(read_text(dir / "run" / "report.json"));
    const Json scored = Json::parse(read_text(dir / "run" / "score.json"));
    double worst = 0.0;
    std::vector<std::string> diffs;
    compare_json(played, scored, "", worst, diffs);
    c.expect(diffs.empty(), "reports differ at " + (diffs.empty() ? "" : diffs.front()));
    std::ostringstream os;
    os << "max numeric difference " << worst;
    c.expect(worst <= 1e-9, os.str());
    c.expect(played.at("metrics").is_object(), "play report has no metrics");
    c.note(std::to_string(played.at("n_records").get<int>()) + " games, " + os.str());
    std::filesystem::remove_all(dir);
    return c.finish();
  });
}

std::vector<std::function<CheckResult()>> all_checks() {
  return {check_golden_case_study, check_tie_rules,       check_metrics_oracle,
          check_round_weights,     check_majority_exhaustive, check_refinement_bound,
          check_guess_update,      check_information_hiding,  check_replay_closure,
          check_consistency,       check_score_reproduces_play};
}

}  // namespace undercover::testing
