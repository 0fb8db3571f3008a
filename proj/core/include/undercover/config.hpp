#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "undercover/chat.hpp"
#include "undercover/prover.hpp"
#include "undercover/similarity.hpp"
#include "undercover/tournament.hpp"

namespace undercover {

// Named chat backend. kind "http" talks to an OpenAI-compatible endpoint,
// "mock" uses the built-in mock model, "scripted" replays a reply file.
struct BackendConfig {
  std::string kind = "http";
  ChatBackendRef ref;
  std::filesystem::path script;
};

struct ProverConfig {
  std::string kind = "mock";  // mock | http
  std::string url;
  double timeout_s = 60.0;
  std::optional<double> flaky;  // flip probability for the mock
  std::uint64_t flaky_seed = 0;
};

struct EmbedderConfig {
  std::string kind = "mock";  // mock | service
  std::string url;
  int dim = 256;
};

struct AppConfig {
  ContestSpec contest;
  std::map<std::string, BackendConfig> backends;
  ProverConfig prover;
  EmbedderConfig embedder;
  std::optional<std::filesystem::path> theory_dump_dir;
};

// Throws Error(InvalidConfig) or Error(Io). Relative paths inside the file
// resolve against the file's directory.
AppConfig load_config(const std::filesystem::path& path);
AppConfig config_from_json(const Json& j, const std::filesystem::path& base_dir = {});
std::vector<WordPair> load_word_pairs(const std::filesystem::path& path);
std::vector<WordPair> word_pairs_from_json(const Json& j);

std::shared_ptr<Prover> make_prover(const ProverConfig& config,
                                    const std::vector<WordPair>& lexicon);
std::shared_ptr<EmbeddingProvider> make_embedding_provider(const EmbedderConfig& config);
// live=false routes every agent to the mock model regardless of its backend.
Runtime make_runtime(const AppConfig& config, bool live);

}  // namespace undercover
