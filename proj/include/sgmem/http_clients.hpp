#pragma once

#include <cstdlib>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "sgmem/embedding.hpp"
#include "sgmem/errors.hpp"
#include "sgmem/llm.hpp"

namespace sgmem {

// Connection settings for OpenAI-compatible endpoints. The API key is read
// from an environment variable, never from config files.
struct RemoteConfig {
  std::string base_url;  // e.g. "http://localhost:8000"
  std::string model;
  std::string api_key_env = "SGMEM_API_KEY";
  int timeout_seconds = 120;

  std::string api_key() const {
    const char* v = std::getenv(api_key_env.c_str());
    return v == nullptr ? "" : v;
  }
};

namespace detail {

inline nlohmann::json post_json(const RemoteConfig& config, const std::string& path,
                                const nlohmann::json& body) {
  httplib::Client client(config.base_url);
  client.set_read_timeout(config.timeout_seconds, 0);
  client.set_connection_timeout(10, 0);
  httplib::Headers headers;
  std::string key = config.api_key();
  if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);
  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) {
    throw ProviderUnavailable("no response from " + config.base_url + path);
  }
  if (res->status != 200) {
    throw ProviderUnavailable("HTTP " + std::to_string(res->status) + " from " +
                              config.base_url + path + ": " +
                              res->body.substr(0, 200));
  }
  auto parsed = nlohmann::json::parse(res->body, nullptr, false);
  if (parsed.is_discarded()) {
    throw ProviderUnavailable("non-JSON response from " + config.base_url + path);
  }
  return parsed;
}

}  // namespace detail

// /v1/embeddings client. Vectors are L2-normalized on ingestion like every
// other provider.
class HttpEmbeddingProvider final : public EmbeddingProvider {
 public:
  HttpEmbeddingProvider(RemoteConfig config, size_t dim)
      : config_(std::move(config)), dim_(dim) {}

  std::string name() const override { return "remote:" + config_.model; }
  size_t dim() const override { return dim_; }

  std::vector<EmbeddingVector> embed(
      const std::vector<std::string>& texts) const override {
    nlohmann::json body = {{"model", config_.model}, {"input", texts}};
    nlohmann::json res;
    try {
      res = detail::post_json(config_, "/v1/embeddings", body);
    } catch (const ProviderUnavailable&) {
      throw;
    }
    if (!res.contains("data") || !res["data"].is_array() ||
        res["data"].size() != texts.size()) {
      throw ProviderUnavailable("embedding response shape mismatch");
    }
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& item : res["data"]) {
      EmbeddingVector v = item.at("embedding").get<EmbeddingVector>();
      if (v.size() != dim_) {
        throw DimensionMismatch("remote embedding dim " +
                                std::to_string(v.size()) + ", expected " +
                                std::to_string(dim_));
      }
      l2_normalize(v);
      out.push_back(std::move(v));
    }
    return out;
  }

 private:
  RemoteConfig config_;
  size_t dim_;
};

// /v1/chat/completions client; the whole prompt ships as a single user
// message.
class HttpLlmClient final : public LlmClient {
 public:
  HttpLlmClient(RemoteConfig config, GenParams params = {})
      : config_(std::move(config)), params_(params) {}

  std::string name() const override { return "remote:" + config_.model; }

  std::string complete(const std::string& prompt) const override {
    nlohmann::json body = {
        {"model", config_.model},
        {"messages", {{{"role", "user"}, {"content", prompt}}}},
        {"temperature", params_.temperature},
        {"top_p", params_.top_p},
        {"max_tokens", params_.max_tokens},
    };
    nlohmann::json res;
    try {
      res = detail::post_json(config_, "/v1/chat/completions", body);
    } catch (const ProviderUnavailable& e) {
      throw LlmUnavailable(e.what());
    }
    try {
      std::string text =
          res.at("choices").at(0).at("message").at("content").get<std::string>();
      if (trim_copy(text).empty()) throw EmptyCompletion("empty completion");
      return text;
    } catch (const nlohmann::json::exception&) {
      throw LlmUnavailable("completion response shape mismatch");
    }
  }

 private:
  RemoteConfig config_;
  GenParams params_;
};

}  // namespace sgmem
