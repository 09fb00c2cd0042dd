#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "sgmem/embedding.hpp"

namespace sgmem {

// Okapi BM25 over a fixed document list. IDF is the Robertson/Sparck Jones
// form with +0.5 smoothing:
//
//   idf(t)       = ln((N - df + 0.5) / (df + 0.5) + 1)
//   score(q, d)  = sum over unique t in q of
//                  idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * |d| / avgdl))
//
// Defaults k1 = 1.2, b = 0.75.
struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

class Bm25Index {
 public:
  explicit Bm25Index(const std::vector<std::string>& docs,
                     Bm25Params params = {})
      : params_(params) {
    doc_tf_.reserve(docs.size());
    doc_len_.reserve(docs.size());
    double total_len = 0.0;
    for (const auto& doc : docs) {
      std::unordered_map<std::string, uint32_t> tf;
      auto tokens = tokenize(doc);
      for (const auto& t : tokens) ++tf[t];
      for (const auto& [term, _] : tf) ++df_[term];
      doc_len_.push_back(tokens.size());
      total_len += static_cast<double>(tokens.size());
      doc_tf_.push_back(std::move(tf));
    }
    avgdl_ = doc_tf_.empty() ? 0.0 : total_len / static_cast<double>(doc_tf_.size());
  }

  size_t size() const { return doc_tf_.size(); }

  double idf(const std::string& term) const {
    auto it = df_.find(term);
    if (it == df_.end()) return 0.0;
    double n = static_cast<double>(doc_tf_.size());
    double df = static_cast<double>(it->second);
    return std::log((n - df + 0.5) / (df + 0.5) + 1.0);
  }

  double score(const std::string& query, size_t doc) const {
    double s = 0.0;
    std::unordered_map<std::string, bool> seen;
    for (const auto& term : tokenize(query)) {
      if (seen[term]) continue;
      seen[term] = true;
      s += term_score(term, doc);
    }
    return s;
  }

  std::vector<double> score_all(const std::string& query) const {
    std::vector<double> scores(size(), 0.0);
    std::unordered_map<std::string, bool> seen;
    for (const auto& term : tokenize(query)) {
      if (seen[term]) continue;
      seen[term] = true;
      double idf_val = idf(term);
      if (idf_val == 0.0) continue;
      for (size_t d = 0; d < size(); ++d) {
        scores[d] += idf_val * tf_saturation(term, d);
      }
    }
    return scores;
  }

 private:
  double term_score(const std::string& term, size_t doc) const {
    double idf_val = idf(term);
    if (idf_val == 0.0) return 0.0;
    return idf_val * tf_saturation(term, doc);
  }

  double tf_saturation(const std::string& term, size_t doc) const {
    auto it = doc_tf_[doc].find(term);
    if (it == doc_tf_[doc].end() || avgdl_ == 0.0) return 0.0;
    double tf = static_cast<double>(it->second);
    double dl = static_cast<double>(doc_len_[doc]);
    double denom = tf + params_.k1 * (1.0 - params_.b + params_.b * dl / avgdl_);
    return tf * (params_.k1 + 1.0) / denom;
  }

  Bm25Params params_;
  std::vector<std::unordered_map<std::string, uint32_t>> doc_tf_;
  std::vector<size_t> doc_len_;
  std::unordered_map<std::string, uint32_t> df_;
  double avgdl_ = 0.0;
};

// KNN neighbor scoring where the source sentence's text acts as the query
// against every other sentence.
class Bm25NeighborScorer final : public NeighborScorer {
 public:
  explicit Bm25NeighborScorer(std::vector<std::string> texts,
                              Bm25Params params = {})
      : texts_(std::move(texts)), index_(texts_, params) {}

  Kind kind() const override { return Kind::Bm25; }
  size_t size() const override { return texts_.size(); }

  std::vector<double> scores_from(size_t i) const override {
    return index_.score_all(texts_[i]);
  }

 private:
  std::vector<std::string> texts_;
  Bm25Index index_;
};

}  // namespace sgmem
