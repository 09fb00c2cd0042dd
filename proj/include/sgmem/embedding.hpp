#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sgmem/errors.hpp"

namespace sgmem {

// Vectors are stored as 32-bit floats (the on-disk format) and compared in
// double precision. All stored vectors are L2-normalized at ingestion so
// cosine reduces to a dot product.
using EmbeddingVector = std::vector<float>;

inline double l2_norm(const EmbeddingVector& v) {
  double s = 0.0;
  for (float x : v) s += static_cast<double>(x) * static_cast<double>(x);
  return std::sqrt(s);
}

inline void l2_normalize(EmbeddingVector& v) {
  double norm = l2_norm(v);
  if (norm <= 0.0) throw ZeroVector("cannot normalize a zero vector");
  for (float& x : v) x = static_cast<float>(x / norm);
}

// cos(a, b), clamped to [-1, 1] against rounding.
inline double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.size() != b.size()) {
    throw DimensionMismatch("cosine: dim " + std::to_string(a.size()) +
                            " vs " + std::to_string(b.size()));
  }
  double dot = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  double na = l2_norm(a);
  double nb = l2_norm(b);
  if (na <= 0.0 || nb <= 0.0) throw ZeroVector("cosine of zero vector");
  return std::clamp(dot / (na * nb), -1.0, 1.0);
}

// cos(q, u) + epsilon. With epsilon = 1 scores lie in [0, 2]; the shift
// never changes rankings.
inline double shifted_similarity(const EmbeddingVector& q,
                                 const EmbeddingVector& u, double epsilon) {
  return cosine(q, u) + epsilon;
}

// Lowercased alphanumeric tokens; everything else separates.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : text) {
    unsigned char uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc)) {
      cur.push_back(static_cast<char>(std::tolower(uc)));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

// FNV-1a, 64-bit. Stable across platforms; used for token bucketing and
// prompt fingerprints.
inline uint64_t fnv1a64(std::string_view data) {
  uint64_t h = 14695981039346656037ull;
  for (char c : data) {
    h ^= static_cast<uint8_t>(c);
    h *= 1099511628211ull;
  }
  return h;
}

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual std::string name() const = 0;
  virtual size_t dim() const = 0;

  // One vector per text, each L2-normalized, dimension = dim(). Must be
  // deterministic within a provider instance and agree between batch and
  // single calls. Safe to call from multiple threads.
  virtual std::vector<EmbeddingVector> embed(
      const std::vector<std::string>& texts) const = 0;

  EmbeddingVector embed_one(const std::string& text) const {
    return embed({text}).front();
  }

  // Identifies the provider in persisted stores so a mismatched reload can
  // warn.
  std::string fingerprint() const {
    std::ostringstream os;
    os << name() << ":" << dim();
    return os.str();
  }
};

// Deterministic offline provider: bag-of-words over FNV-hashed token
// buckets, L2-normalized. Texts sharing no tokens get cosine 0 (up to
// bucket collisions); identical texts get cosine 1.
class HashingProvider final : public EmbeddingProvider {
 public:
  explicit HashingProvider(size_t dim = 256) : dim_(dim) {}

  std::string name() const override { return "hash-bow"; }
  size_t dim() const override { return dim_; }

  std::vector<EmbeddingVector> embed(
      const std::vector<std::string>& texts) const override {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
      EmbeddingVector v(dim_, 0.0f);
      for (const auto& tok : tokenize(text)) {
        v[bucket(tok)] += 1.0f;
      }
      if (l2_norm(v) <= 0.0) {
        // Token-free text (e.g. punctuation only) still needs a nonzero
        // vector: fall back to a single bucket keyed on the raw bytes.
        v[fnv1a64(text) % dim_] = 1.0f;
      }
      l2_normalize(v);
      out.push_back(std::move(v));
    }
    return out;
  }

  size_t bucket(std::string_view token) const { return fnv1a64(token) % dim_; }

 private:
  size_t dim_;
};

// Scores candidate sentences from one source sentence during KNN-graph
// construction. Scores induce a total order only together with the external
// ascending-id tie-break.
class NeighborScorer {
 public:
  enum class Kind : uint8_t { CosineDense = 0, Bm25 = 1 };

  virtual ~NeighborScorer() = default;
  virtual Kind kind() const = 0;
  virtual size_t size() const = 0;
  // Scores of every candidate against source `i`; entry `i` is ignored by
  // the caller.
  virtual std::vector<double> scores_from(size_t i) const = 0;
};

class CosineNeighborScorer final : public NeighborScorer {
 public:
  explicit CosineNeighborScorer(std::vector<EmbeddingVector> vectors)
      : vectors_(std::move(vectors)) {}

  Kind kind() const override { return Kind::CosineDense; }
  size_t size() const override { return vectors_.size(); }

  std::vector<double> scores_from(size_t i) const override {
    std::vector<double> scores(vectors_.size(), 0.0);
    for (size_t j = 0; j < vectors_.size(); ++j) {
      if (j == i) continue;
      scores[j] = cosine(vectors_[i], vectors_[j]);
    }
    return scores;
  }

 private:
  std::vector<EmbeddingVector> vectors_;
};

}  // namespace sgmem
