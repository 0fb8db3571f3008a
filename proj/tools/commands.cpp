#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "undercover/config.hpp"
#include "undercover/error.hpp"
#include "undercover/service.hpp"

namespace undercover::cli {
namespace {

namespace fs = std::filesystem;

constexpr std::string_view kToolVersion = "0.1.0";

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + p.string());
  out << content;
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::InvalidConfig:
      return kConfigError;
    default:
      return kRuntimeError;
  }
}

Json embedder_json(const EmbedderConfig& c) {
  return {{"kind", c.kind}, {"url", c.url}, {"dim", c.dim}};
}

EmbedderConfig embedder_from_manifest(const Json& j) {
  EmbedderConfig c;
  c.kind = j.value("kind", std::string("mock"));
  c.url = j.value("url", std::string());
  c.dim = j.value("dim", 256);
  return c;
}

void print_summary(const ContestReport& r, std::ostream& out) {
  out << "games: " << r.n_records << " (aborted " << r.aborted << ", excluded "
      << r.excluded_fallback << ")\n";
  if (r.metrics) {
    out << std::fixed << std::setprecision(4) << "spy win rate: " << r.metrics->spy_win_rate
        << "\ncitizen elimination rate: " << r.metrics->citizen_elimination_rate
        << "\naverage rounds: " << r.metrics->avg_rounds << "\n";
  }
  for (const auto& g : r.attribution) {
    out << std::fixed << std::setprecision(4) << g.role << "/" << g.kind << " n=" << g.n
        << " AS=" << g.as << " AA=" << g.aa << " AttScore=" << g.att_score << "\n";
  }
  out.unsetf(std::ios::floatfield);
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
}

}  // namespace

std::vector<GameRecord> load_records(const fs::path& dir) {
  const fs::path games = dir / "games";
  if (!fs::is_directory(games)) fail(ErrorCode::Io, "no games/ directory under " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(games)) {
    if (entry.path().extension() == ".jsonl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<GameRecord> records;
  for (const auto& f : files) {
    try {
      records.push_back(GameRecord::from_jsonl(read_file(f)));
    } catch (const Error& e) {
      fail(e.code(), f.filename().string() + ": " + e.what());
    }
  }
  return records;
}

int cmd_play(const PlayOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    AppConfig config = load_config(opts.config);
    if (opts.seed) config.contest.base_seed = *opts.seed;
    if (opts.workers < 1) fail(ErrorCode::InvalidConfig, "--workers must be at least 1");
    if (fs::exists(opts.out) && !fs::is_empty(opts.out)) {
      if (!opts.force) {
        fail(ErrorCode::InvalidConfig,
             opts.out.string() + " exists and is not empty; pass --force to overwrite");
      }
      fs::remove_all(opts.out);
    }
    fs::create_directories(opts.out);

    const Runtime runtime = make_runtime(config, opts.live);
    const Embedder embedder(make_embedding_provider(config.embedder));
    ContestOptions co;
    co.workers = opts.workers;
    co.out_dir = opts.out;
    co.report.exclude_fallback_games = opts.exclude_fallback_games;
    co.report.verbose = opts.verbose;
    const ContestResult result = run_contest(config.contest, runtime, embedder, co);

    Json files = Json::array();
    for (const auto& r : result.records) files.push_back("games/" + game_file_name(r.game_index));
    const Json manifest = {{"tool_version", std::string(kToolVersion)},
                           {"contest", to_json(config.contest)},
                           {"spec_digest", config.contest.digest()},
                           {"backend", opts.live ? "live" : "mock"},
                           {"embedder", embedder_json(config.embedder)},
                           {"embedder_model", embedder.provider().model_id()},
                           {"exclude_fallback_games", opts.exclude_fallback_games},
                           {"games", files}};
    write_file(opts.out / "manifest.json", manifest.dump(2) + "\n");
    write_file(opts.out / "report.json", to_json(result.report).dump(2) + "\n");
    write_file(opts.out / "report.csv", to_csv(result.report));
    print_summary(result.report, out);
    out << "wrote " << result.records.size() << " game logs to " << (opts.out / "games").string()
        << "\n";
    return static_cast<int>(kOk);
  });
}

int cmd_score(const ScoreOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Json manifest = Json::parse(read_file(opts.in / "manifest.json"));
    const auto records = load_records(opts.in);
    for (const auto& r : records) {
      if (r.spec_digest != manifest.value("spec_digest", std::string())) {
        fail(ErrorCode::CorruptRecord,
             "game " + std::to_string(r.game_index) + " was played under a different contest spec");
      }
    }
    const Embedder embedder(
        make_embedding_provider(embedder_from_manifest(manifest.value("embedder", Json::object()))));
    ReportOptions ro;
    ro.exclude_fallback_games = opts.exclude_fallback_games;
    ro.verbose = opts.verbose;
    const ContestReport report = build_report(records, embedder, ro);
    const fs::path target = opts.out.value_or(opts.in / "score.json");
    write_file(target, to_json(report).dump(2) + "\n");
    print_summary(report, out);
    return static_cast<int>(kOk);
  });
}

int cmd_words(const WordsOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    std::vector<WordPair> pairs;
    EmbedderConfig ec;
    const Json j = Json::parse(read_file(opts.config));
    if (j.is_object() && j.contains("contest")) {
      const AppConfig c = load_config(opts.config);
      pairs = c.contest.word_pairs;
      ec = c.embedder;
    } else {
      pairs = load_word_pairs(opts.config);
    }
    const Embedder embedder(make_embedding_provider(ec));
    out << "citizen_word,spy_word,cosine,playable\n";
    for (const auto& p : pairs) {
      const WordPairSimilarity s = word_pair_similarity(embedder, p);
      out << '"' << p.citizen_word << "\",\"" << p.spy_word << "\"," << std::setprecision(6)
          << s.cosine << "," << (s.playable ? "yes" : "no") << "\n";
    }
    out << "# playability threshold " << kPlayabilityThreshold << " is advisory ("
        << embedder.provider().model_id() << ")\n";
    return static_cast<int>(kOk);
  });
}

int cmd_validate(const ValidateOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const AppConfig c = load_config(opts.config);
    out << "config ok: " << total_games(c.contest) << " games, " << c.contest.word_pairs.size()
        << " word pairs, spec " << c.contest.digest().substr(0, 12) << "\n";
    for (const auto& path : opts.records) {
      const GameRecord rec = GameRecord::from_jsonl(read_file(path));
      if (rec.aborted) {
        out << path.string() << ": chain ok, aborted (" << rec.abort_reason << ")\n";
        continue;
      }
      const GameOutcome o = replay(rec);
      out << path.string() << ": replay ok, " << to_string(o.winner) << " by "
          << to_string(o.reason) << " after " << o.rounds_played << " rounds\n";
    }
    return static_cast<int>(kOk);
  });
}

int cmd_serve_mock(const ServeOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    std::vector<WordPair> lexicon;
    if (opts.config) lexicon = load_config(*opts.config).contest.word_pairs;
    ServiceServer server(std::make_shared<MockEmbeddingProvider>(),
                         std::make_shared<MockProver>(lexicon));
    out << "serving mock /embed, /prove, /health on http://" << opts.host << ":" << opts.port
        << std::endl;
    server.run(opts.host, opts.port);
    return static_cast<int>(kOk);
  });
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Undercover-V agent tournaments"};
  app.require_subcommand(1);

  PlayOptions play;
  std::string backend = "mock";
  std::uint64_t seed = 0;
  auto* p = app.add_subcommand("play", "Run a contest and write game logs and reports");
  p->add_option("--config", play.config, "Contest config JSON")->required()->check(CLI::ExistingFile);
  p->add_option("--out", play.out, "Output directory")->required();
  p->add_option("--backend", backend, "mock or live")->check(CLI::IsMember({"mock", "live"}));
  p->add_option("--workers", play.workers, "Parallel games")->check(CLI::PositiveNumber);
  auto* seed_opt = p->add_option("--seed", seed, "Override the contest base seed");
  p->add_flag("--exclude-fallback-games", play.exclude_fallback_games);
  p->add_flag("--force", play.force, "Overwrite a non-empty output directory");
  p->add_flag("--verbose", play.verbose, "Include per-round metric traces");

  ScoreOptions score;
  std::string score_out;
  auto* s = app.add_subcommand("score", "Recompute metrics from existing game logs");
  s->add_option("--in", score.in, "Directory written by play")->required()->check(CLI::ExistingDirectory);
  auto* score_out_opt = s->add_option("--out", score_out, "Report path (default <in>/score.json)");
  s->add_flag("--exclude-fallback-games", score.exclude_fallback_games);
  s->add_flag("--verbose", score.verbose);

  WordsOptions words;
  auto* w = app.add_subcommand("words", "Print word-pair similarity");
  w->add_option("--config", words.config, "Config or word-pair JSON")->required()->check(CLI::ExistingFile);

  ValidateOptions validate;
  auto* v = app.add_subcommand("validate", "Check a config and optionally replay game logs");
  v->add_option("--config", validate.config)->required()->check(CLI::ExistingFile);
  v->add_option("records", validate.records, "Game logs to replay")->check(CLI::ExistingFile);

  ServeOptions serve;
  std::string serve_config;
  auto* m = app.add_subcommand("serve-mock", "Serve the sidecar protocol with mock backends");
  auto* serve_config_opt = m->add_option("--config", serve_config)->check(CLI::ExistingFile);
  m->add_option("--host", serve.host);
  m->add_option("--port", serve.port);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kConfigError;
  }

  if (*p) {
    play.live = backend == "live";
    if (*seed_opt) play.seed = seed;
    return cmd_play(play, out, err);
  }
  if (*s) {
    if (*score_out_opt) score.out = score_out;
    return cmd_score(score, out, err);
  }
  if (*w) return cmd_words(words, out, err);
  if (*v) return cmd_validate(validate, out, err);
  if (*serve_config_opt) serve.config = serve_config;
  return cmd_serve_mock(serve, out, err);
}

}  // namespace undercover::cli
