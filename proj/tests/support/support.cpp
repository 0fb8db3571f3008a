#include "support.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

#include "undercover/config.hpp"
#include "undercover/error.hpp"
#include "undercover/serialize.hpp"
#include "undercover/text.hpp"

namespace undercover::testing {

std::filesystem::path source_dir() { return UNDERCOVER_SOURCE_DIR; }
std::filesystem::path fixture_path(const std::string& name) {
  return source_dir() / "tests" / "fixtures" / name;
}
std::filesystem::path golden_path(const std::string& name) {
  return source_dir() / "tests" / "golden" / name;
}

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& p, const std::string& s) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << s;
}

bool matches_golden(const std::string& name, const std::string& actual) {
  const auto path = golden_path(name);
  const char* update = std::getenv("UNDERCOVER_UPDATE_GOLDEN");
  if (update && std::string(update) == "1") {
    write_text(path, actual);
    return true;
  }
  if (!std::filesystem::exists(path)) return false;
  return read_text(path) == actual;
}

std::vector<WordPair> word_pairs() {
  static const std::vector<WordPair> pairs =
      load_word_pairs(source_dir() / "configs" / "word_pairs.json");
  return pairs;
}

const WordPair& pair_named(const std::string& citizen_word) {
  static const std::vector<WordPair> pairs = word_pairs();
  for (const auto& p : pairs) {
    if (p.citizen_word == citizen_word) return p;
  }
  fail(ErrorCode::InvalidConfig, "no word pair for " + citizen_word);
}

std::shared_ptr<Embedder> mock_embedder() {
  return std::make_shared<Embedder>(std::make_shared<MockEmbeddingProvider>());
}

std::optional<PlayerId> oracle_tally(const Ballot& ballot) {
  int counts[64] = {};
  for (const auto& [voter, target] : ballot) counts[target.value] += 1;
  int best = -1;
  int best_count = 0;
  bool unique = false;
  for (int p = 0; p < 64; ++p) {
    if (counts[p] > best_count) {
      best_count = counts[p];
      best = p;
      unique = true;
    } else if (counts[p] == best_count && best_count > 0) {
      unique = false;
    }
  }
  if (!unique) return std::nullopt;
  return PlayerId{best};
}

namespace {

double raw_dot_cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return dot / std::sqrt(na * nb);
}

}  // namespace

OracleMetrics oracle_metrics(PlayerId agent, const std::vector<Description>& transcript,
                             const WordPair& pair, int dim) {
  MockEmbeddingProvider provider(dim);
  auto sim = [&](const std::string& a, const std::string& b) {
    double c = a == b ? 1.0 : raw_dot_cosine(provider.embed_one(a), provider.embed_one(b));
    double s = (1.0 + c) / 2.0;
    if (s < 1e-6) s = 1e-6;
    if (s > 1.0) s = 1.0;
    return s;
  };

  OracleMetrics m;
  double as_num = 0, as_den = 0;
  double aa_num = 0, aa_den = 0;
  for (const auto& d : transcript) {
    if (d.player != agent) continue;
    const double r = d.round;
    as_num += r * (sim(d.text, pair.citizen_reference) / sim(d.text, pair.spy_reference));
    as_den += r;
    double total = 0;
    int others = 0;
    for (const auto& o : transcript) {
      if (o.round == d.round && o.player != agent) {
        total += sim(d.text, o.text);
        ++others;
      }
    }
    if (others > 0) {
      aa_num += r * (total / others);
      aa_den += r;
    }
  }
  m.as = as_num / as_den;
  m.has_aa = aa_den > 0;
  m.aa = m.has_aa ? aa_num / aa_den : 0.0;
  m.att = m.as * m.aa;
  return m;
}

CaseStudy load_case_study() {
  const Json fx = Json::parse(read_text(fixture_path("case_study.json")));
  CaseStudy t;
  t.spec.mode = ContestMode::Custom;
  t.spec.n_games = 1;
  t.spec.word_pairs = {word_pair_from_json(fx.at("word_pair"))};
  t.spec.n_players = fx.at("n_players").get<int>();
  t.spec.spy_seat = PlayerId{fx.at("spy_seat").get<int>()};
  t.spec.tie_limit = fx.at("tie_limit").get<int>();
  t.spec.base_seed = fx.at("base_seed").get<std::uint64_t>();
  for (int i = 1; i <= t.spec.n_players; ++i) {
    AgentSpec s;
    s.kind = agent_kind_from_string(fx.at("seats").at(std::to_string(i)).get<std::string>());
    s.backend = "case_study";
    t.spec.seats.push_back(s);
    t.replies[PlayerId{i}] =
        fx.at("replies").at(std::to_string(i)).get<std::vector<std::string>>();
  }
  const auto replies = t.replies;
  t.runtime.llm_for = [replies](const AgentSpec&, PlayerId seat, std::uint64_t) {
    return LlmHandle{std::make_shared<SequenceBackend>(replies.at(seat)), "case_study"};
  };
  return t;
}

GameRecord run_case_study() {
  const CaseStudy t = load_case_study();
  return run_game(t.spec, 0, t.runtime);
}

ContestSpec scripted_contest(const WordPair& pair, int n_players, PlayerId spy_seat,
                             const std::vector<std::vector<std::string>>& descriptions,
                             const std::vector<std::vector<int>>& votes, int tie_limit) {
  ActionScript script;
  for (std::size_t r = 0; r < descriptions.size(); ++r) {
    for (std::size_t p = 0; p < descriptions[r].size(); ++p) {
      if (!descriptions[r][p].empty()) {
        script.descriptions[PlayerId{static_cast<int>(p) + 1}][static_cast<int>(r) + 1] =
            descriptions[r][p];
      }
    }
  }
  for (std::size_t r = 0; r < votes.size(); ++r) {
    for (std::size_t p = 0; p < votes[r].size(); ++p) {
      if (votes[r][p] > 0) {
        script.votes[PlayerId{static_cast<int>(p) + 1}][static_cast<int>(r) + 1] =
            PlayerId{votes[r][p]};
      }
    }
  }
  ContestSpec spec;
  spec.mode = ContestMode::Custom;
  spec.n_games = 1;
  spec.word_pairs = {pair};
  spec.n_players = n_players;
  spec.tie_limit = tie_limit;
  spec.spy_seat = spy_seat;
  for (int i = 0; i < n_players; ++i) {
    AgentSpec s;
    s.kind = AgentKind::Scripted;
    s.script = script;
    spec.seats.push_back(s);
  }
  return spec;
}

ContestSpec mock_contest(int n_games, std::uint64_t seed, AgentKind spy, AgentKind citizen,
                         ContestMode mode) {
  ContestSpec spec;
  spec.mode = mode;
  spec.n_games = n_games;
  spec.base_seed = seed;
  spec.word_pairs = word_pairs();
  spec.spy_agent = AgentSpec{spy, "mock", std::nullopt};
  spec.citizen_agent = AgentSpec{citizen, "mock", std::nullopt};
  return spec;
}

std::vector<std::string> leaked_terms(const std::string& text,
                                      const std::vector<std::string>& foreign_words) {
  std::vector<std::string> hits;
  const auto tokens = text::tokenize(text);
  for (const auto& w : foreign_words) {
    const auto wt = text::tokenize(w);
    if (wt.empty() || wt.size() > tokens.size()) continue;
    for (std::size_t i = 0; i + wt.size() <= tokens.size(); ++i) {
      if (std::equal(wt.begin(), wt.end(), tokens.begin() + static_cast<long>(i))) {
        hits.push_back(w);
        break;
      }
    }
  }
  for (const std::string role : {"Spy", "Citizen"}) {
    std::size_t pos = 0;
    while ((pos = text.find(role, pos)) != std::string::npos) {
      const bool left = pos == 0 || !std::isalnum(static_cast<unsigned char>(text[pos - 1]));
      const std::size_t end = pos + role.size();
      const bool right = end >= text.size() || !std::isalnum(static_cast<unsigned char>(text[end]));
      if (left && right) {
        hits.push_back(role);
        break;
      }
      pos = end;
    }
  }
  return hits;
}

}  // namespace undercover::testing
