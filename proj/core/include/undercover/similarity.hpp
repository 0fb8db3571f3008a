#pragma once

#include <memory>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "undercover/game.hpp"

namespace undercover {

using EmbeddingVector = std::vector<double>;

// Floor applied to mapped similarities so ratios stay finite.
inline constexpr double kSimEpsilon = 1e-6;
// Word pairs below this raw cosine rarely give the spy a chance; advisory only.
inline constexpr double kPlayabilityThreshold = 0.7931;

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  // One vector per text, each of length dim(). Throws ProviderUnavailable.
  virtual std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) = 0;
  virtual int dim() const = 0;
  virtual std::string model_id() const = 0;
};

// Signed hashed bag of words, L2-normalized. Output depends only on the
// input bytes.
class MockEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit MockEmbeddingProvider(int dim = 256);
  std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override;
  int dim() const override { return dim_; }
  std::string model_id() const override;

  EmbeddingVector embed_one(std::string_view text) const;

 private:
  int dim_;
};

// Client for an embedding service: POST {url}/embed {"texts": [...]} ->
// {"vectors": [[...]], "dim": n, "model_id": "..."}.
class ServiceEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit ServiceEmbeddingProvider(std::string base_url, int timeout_seconds = 30);
  std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override;
  int dim() const override;
  std::string model_id() const override;
  // GET {url}/health; true when the service answers 200.
  bool healthy() const;

 private:
  std::string base_url_;
  int timeout_seconds_;
  mutable std::shared_mutex mu_;
  mutable int dim_ = 0;
  mutable std::string model_id_;
};

double norm(const EmbeddingVector& v);
EmbeddingVector normalized(EmbeddingVector v);
// Raw cosine in [-1, 1]; 0 when either vector is zero.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);
// (1 + c) / 2 clamped to [kSimEpsilon, 1].
double map_similarity(double cosine);

// Provider facade: rejects empty text, normalizes, memoizes by text bytes.
// Safe for concurrent use.
class Embedder {
 public:
  explicit Embedder(std::shared_ptr<EmbeddingProvider> provider);

  EmbeddingVector embed(std::string_view text) const;
  // Mapped similarity in [kSimEpsilon, 1]; exactly 1 for identical text.
  double sim(std::string_view a, std::string_view b) const;
  double raw_cosine(std::string_view a, std::string_view b) const;

  const EmbeddingProvider& provider() const { return *provider_; }
  std::size_t cache_size() const;

 private:
  std::shared_ptr<EmbeddingProvider> provider_;
  mutable std::shared_mutex mu_;
  mutable std::unordered_map<std::string, EmbeddingVector> cache_;
};

struct WordPairSimilarity {
  double cosine = 0.0;  // raw, unmapped
  bool playable = false;  // cosine >= kPlayabilityThreshold
};

WordPairSimilarity word_pair_similarity(const Embedder& embedder, const WordPair& pair);

}  // namespace undercover
