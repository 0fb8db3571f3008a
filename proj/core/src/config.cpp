#include "undercover/config.hpp"

#include <fstream>
#include <sstream>

#include "undercover/error.hpp"
#include "undercover/mock_llm.hpp"

namespace undercover {
namespace {

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return Json::parse(ss.str());
  } catch (const Json::exception& e) {
    fail(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

BackendConfig backend_from_json(const std::string& name, const Json& j,
                                const std::filesystem::path& base_dir) {
  if (!j.is_object()) fail(ErrorCode::InvalidConfig, "backend '" + name + "' must be an object");
  BackendConfig b;
  b.kind = j.value("kind", std::string("http"));
  b.ref.base_url = j.value("base_url", std::string());
  b.ref.model = j.value("model", std::string(b.kind == "http" ? "" : b.kind));
  b.ref.auth_env = j.value("auth_env", std::string());
  b.ref.temperature = j.value("temperature", 0.0);
  if (b.kind == "http") {
    if (b.ref.base_url.empty()) {
      fail(ErrorCode::InvalidConfig, "backend '" + name + "' needs a base_url");
    }
    b.ref.validate();
  } else if (b.kind == "scripted") {
    if (!j.contains("path")) fail(ErrorCode::InvalidConfig, "backend '" + name + "' needs a path");
    b.script = resolve(base_dir, j.at("path").get<std::string>());
  } else if (b.kind != "mock") {
    fail(ErrorCode::InvalidConfig, "backend '" + name + "' has unknown kind '" + b.kind + "'");
  }
  return b;
}

void check_backend_names(const AppConfig& c) {
  std::vector<AgentSpec> specs = c.contest.seats;
  specs.push_back(c.contest.spy_agent);
  specs.push_back(c.contest.citizen_agent);
  for (const auto& s : specs) {
    if (s.kind == AgentKind::Scripted || s.backend.empty() || s.backend == "mock") continue;
    if (!c.backends.count(s.backend)) {
      fail(ErrorCode::InvalidConfig, "agent refers to undefined backend '" + s.backend + "'");
    }
  }
}

}  // namespace

std::vector<WordPair> word_pairs_from_json(const Json& j) {
  if (!j.is_array()) fail(ErrorCode::InvalidConfig, "word pairs must be an array");
  std::vector<WordPair> out;
  for (const auto& p : j) {
    try {
      out.push_back(word_pair_from_json(p));
    } catch (const Json::exception& e) {
      fail(ErrorCode::InvalidConfig, std::string("bad word pair: ") + e.what());
    } catch (const Error& e) {
      fail(ErrorCode::InvalidConfig, e.what());
    }
    out.back().validate();
  }
  return out;
}

std::vector<WordPair> load_word_pairs(const std::filesystem::path& path) {
  Json j = read_json(path);
  if (j.is_object() && j.contains("word_pairs")) j = j.at("word_pairs");
  return word_pairs_from_json(j);
}

AppConfig config_from_json(const Json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object() || !j.contains("contest")) {
    fail(ErrorCode::InvalidConfig, "config needs a 'contest' object");
  }
  AppConfig c;
  Json contest = j.at("contest");
  if (j.contains("word_pairs")) {
    const Json& wp = j.at("word_pairs");
    const auto pairs = wp.is_string() ? load_word_pairs(resolve(base_dir, wp.get<std::string>()))
                                      : word_pairs_from_json(wp);
    Json arr = Json::array();
    for (const auto& p : pairs) arr.push_back(to_json(p));
    contest["word_pairs"] = arr;
  }
  c.contest = contest_spec_from_json(contest);

  const Json backends = j.value("backends", Json::object());
  for (const auto& [name, b] : backends.items()) {
    c.backends[name] = backend_from_json(name, b, base_dir);
  }
  check_backend_names(c);

  try {
    if (j.contains("prover")) {
      const Json& p = j.at("prover");
      c.prover.kind = p.value("kind", std::string("mock"));
      c.prover.url = p.value("url", std::string());
      c.prover.timeout_s = p.value("timeout_s", 60.0);
      if (p.contains("flaky") && !p.at("flaky").is_null()) c.prover.flaky = p.at("flaky").get<double>();
      c.prover.flaky_seed = p.value("flaky_seed", std::uint64_t{0});
    }
    if (j.contains("embedder")) {
      const Json& e = j.at("embedder");
      c.embedder.kind = e.value("kind", std::string("mock"));
      c.embedder.url = e.value("url", std::string());
      c.embedder.dim = e.value("dim", 256);
    }
    if (j.contains("theory_dump_dir")) {
      c.theory_dump_dir = resolve(base_dir, j.at("theory_dump_dir").get<std::string>());
    }
  } catch (const Json::exception& e) {
    fail(ErrorCode::InvalidConfig, e.what());
  }
  if (c.prover.kind != "mock" && c.prover.kind != "http") {
    fail(ErrorCode::InvalidConfig, "prover kind must be mock or http");
  }
  if (c.prover.kind == "http" && c.prover.url.empty()) {
    fail(ErrorCode::InvalidConfig, "http prover needs a url");
  }
  if (c.prover.flaky && (*c.prover.flaky < 0.0 || *c.prover.flaky > 1.0)) {
    fail(ErrorCode::InvalidConfig, "prover.flaky must be in [0, 1]");
  }
  if (c.embedder.kind != "mock" && c.embedder.kind != "service") {
    fail(ErrorCode::InvalidConfig, "embedder kind must be mock or service");
  }
  if (c.embedder.kind == "service" && c.embedder.url.empty()) {
    fail(ErrorCode::InvalidConfig, "service embedder needs a url");
  }
  if (c.embedder.dim < 1) fail(ErrorCode::InvalidConfig, "embedder.dim must be positive");
  return c;
}

AppConfig load_config(const std::filesystem::path& path) {
  return config_from_json(read_json(path), path.parent_path());
}

std::shared_ptr<Prover> make_prover(const ProverConfig& config,
                                    const std::vector<WordPair>& lexicon) {
  std::shared_ptr<Prover> p;
  if (config.kind == "http") {
    p = std::make_shared<HttpProver>(config.url, config.timeout_s);
  } else {
    p = std::make_shared<MockProver>(lexicon);
  }
  if (config.flaky) p = std::make_shared<FlakyProver>(p, config.flaky_seed, *config.flaky);
  return p;
}

std::shared_ptr<EmbeddingProvider> make_embedding_provider(const EmbedderConfig& config) {
  if (config.kind == "service") return std::make_shared<ServiceEmbeddingProvider>(config.url);
  return std::make_shared<MockEmbeddingProvider>(config.dim);
}

Runtime make_runtime(const AppConfig& config, bool live) {
  Runtime rt = mock_runtime(config.contest.word_pairs);
  rt.prover = make_prover(config.prover, config.contest.word_pairs);
  rt.theory_dump_dir = config.theory_dump_dir;
  if (!live) return rt;

  std::map<std::string, std::shared_ptr<ChatBackend>> shared;
  for (const auto& [name, b] : config.backends) {
    if (b.kind == "http") shared[name] = std::make_shared<HttpChatBackend>(b.ref);
    if (b.kind == "scripted") shared[name] = ScriptedBackend::load(b.script);
  }
  auto mock = rt.llm_for;
  rt.llm_for = [shared, mock, backends = config.backends](const AgentSpec& spec, PlayerId seat,
                                                          std::uint64_t seed) {
    auto it = shared.find(spec.backend);
    if (it == shared.end()) return mock(spec, seat, seed);
    return LlmHandle{it->second, backends.at(spec.backend).ref.model};
  };
  return rt;
}

}  // namespace undercover
