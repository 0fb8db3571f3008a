#include <benchmark/benchmark.h>

#include "undercover/config.hpp"
#include "undercover/metrics.hpp"
#include "undercover/tournament.hpp"

namespace {

using namespace undercover;

const std::vector<WordPair>& pairs() {
  static const auto p = load_word_pairs(UNDERCOVER_BENCH_WORD_PAIRS);
  return p;
}

void BM_MockEmbed(benchmark::State& state) {
  MockEmbeddingProvider p(static_cast<int>(state.range(0)));
  const std::string text = "A type of black tea flavoured with oil from the rind of bergamot.";
  for (auto _ : state) benchmark::DoNotOptimize(p.embed_one(text));
}
BENCHMARK(BM_MockEmbed)->Arg(256)->Arg(1024);

void BM_ApplyVotes(benchmark::State& state) {
  GameConfig c;
  c.n_players = static_cast<int>(state.range(0));
  c.word_pair = pairs().front();
  GameState s = new_game(c);
  for (PlayerId p : s.alive()) s = submit_description(std::move(s), p, "words of " + to_string(p));
  Ballot b;
  for (PlayerId p : s.alive()) b[p] = p == PlayerId{1} ? PlayerId{2} : PlayerId{1};
  for (auto _ : state) benchmark::DoNotOptimize(apply_votes(s, b));
}
BENCHMARK(BM_ApplyVotes)->Arg(6)->Arg(12);

void BM_AttributionReport(benchmark::State& state) {
  ContestSpec spec;
  spec.n_games = 1;
  spec.word_pairs = {pairs().front()};
  const GameRecord r = run_game(spec, 0, mock_runtime(pairs()));
  const Embedder e(std::make_shared<MockEmbeddingProvider>());
  for (auto _ : state) benchmark::DoNotOptimize(build_report({r}, e));
}
BENCHMARK(BM_AttributionReport);

void BM_RunGame(benchmark::State& state) {
  ContestSpec spec;
  spec.n_games = 1;
  spec.word_pairs = {pairs().front()};
  spec.spy_agent.kind = static_cast<AgentKind>(state.range(0));
  spec.citizen_agent.kind = AgentKind::StandardAttNli;
  const Runtime rt = mock_runtime(pairs());
  for (auto _ : state) benchmark::DoNotOptimize(run_game(spec, 0, rt));
}
BENCHMARK(BM_RunGame)
    ->Arg(static_cast<int>(AgentKind::StandardNli))
    ->Arg(static_cast<int>(AgentKind::NeuroSymAttNli))
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
