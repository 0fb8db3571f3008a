#include "undercover/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "undercover/error.hpp"
#include "undercover/hash.hpp"
#include "undercover/text.hpp"

namespace undercover {

MockEmbeddingProvider::MockEmbeddingProvider(int dim) : dim_(dim) {
  if (dim_ <= 0) fail(ErrorCode::InvalidConfig, "embedding dim must be positive");
}

std::string MockEmbeddingProvider::model_id() const {
  return "mock-hashed-bow-" + std::to_string(dim_);
}

EmbeddingVector MockEmbeddingProvider::embed_one(std::string_view s) const {
  EmbeddingVector v(static_cast<std::size_t>(dim_), 0.0);
  const auto tokens = text::tokenize(s);
  auto add = [&](std::string_view key) {
    const std::uint64_t h = fnv1a64(key);
    const std::size_t slot = static_cast<std::size_t>(h % static_cast<std::uint64_t>(dim_));
    v[slot] += (h >> 63) != 0 ? -1.0 : 1.0;
  };
  for (const auto& t : tokens) add(t);
  if (norm(v) == 0.0) {
    // No tokens, or every token cancelled out: fall back to the raw bytes so
    // the vector can still be normalized.
    add(s);
  }
  return normalized(std::move(v));
}

std::vector<EmbeddingVector> MockEmbeddingProvider::embed_batch(
    const std::vector<std::string>& texts) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed_one(t));
  return out;
}

double norm(const EmbeddingVector& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

EmbeddingVector normalized(EmbeddingVector v) {
  const double n = norm(v);
  if (n == 0.0 || !std::isfinite(n)) return v;
  for (double& x : v) x /= n;
  return v;
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.size() != b.size()) {
    fail(ErrorCode::PreconditionViolation, "cosine of vectors with different dims");
  }
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  return std::clamp(dot / (na * nb), -1.0, 1.0);
}

double map_similarity(double c) {
  return std::clamp((1.0 + c) / 2.0, kSimEpsilon, 1.0);
}

Embedder::Embedder(std::shared_ptr<EmbeddingProvider> provider)
    : provider_(std::move(provider)) {
  if (!provider_) fail(ErrorCode::InvalidConfig, "embedder needs a provider");
}

EmbeddingVector Embedder::embed(std::string_view s) const {
  if (text::trim(s).empty()) fail(ErrorCode::EmptyText, "cannot embed empty text");
  std::string key(s);
  {
    std::shared_lock lock(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  auto vectors = provider_->embed_batch({key});
  if (vectors.size() != 1) {
    fail(ErrorCode::ProviderUnavailable, "provider returned " +
                                             std::to_string(vectors.size()) +
                                             " vectors for one text");
  }
  EmbeddingVector v = normalized(std::move(vectors.front()));
  for (double x : v) {
    if (!std::isfinite(x)) fail(ErrorCode::ProviderUnavailable, "non-finite embedding");
  }
  std::unique_lock lock(mu_);
  return cache_.try_emplace(std::move(key), std::move(v)).first->second;
}

double Embedder::raw_cosine(std::string_view a, std::string_view b) const {
  if (a == b) {
    embed(a);  // still validates the input
    return 1.0;
  }
  return cosine(embed(a), embed(b));
}

double Embedder::sim(std::string_view a, std::string_view b) const {
  return map_similarity(raw_cosine(a, b));
}

std::size_t Embedder::cache_size() const {
  std::shared_lock lock(mu_);
  return cache_.size();
}

WordPairSimilarity word_pair_similarity(const Embedder& embedder, const WordPair& pair) {
  WordPairSimilarity out;
  out.cosine = embedder.raw_cosine(pair.citizen_word, pair.spy_word);
  out.playable = out.cosine >= kPlayabilityThreshold;
  return out;
}

}  // namespace undercover
