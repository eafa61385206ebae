#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "paraprobe/providers/providers.hpp"

namespace paraprobe::providers {

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text);

/// An HTTP service. The API key is read from `api_key_env` at call time and
/// sent as a bearer token; it is never stored in config files.
struct Endpoint {
  std::string base_url;  // scheme://host[:port]
  std::string path;
  std::string api_key_env;
  std::chrono::milliseconds timeout{60'000};
};

Endpoint endpoint_from_json(const nlohmann::json& j, std::string default_path);

/// POSTs a JSON body and parses the JSON response. Connection failures and
/// timeouts raise kProviderTimeout; non-2xx statuses and bad bodies raise
/// kProviderMalformedOutput.
nlohmann::json post_json(const Endpoint& endpoint, const nlohmann::json& body);
nlohmann::json get_json(const Endpoint& endpoint, const std::string& path);

/// Sampling parameters of a chat-completion model.
struct ChatModel {
  std::string model;
  int max_tokens = 2048;
  double temperature = 1.0;
  bool send_seed = true;
};

/// Paraphrase generator over the chat-completion contract
/// {model, prompt, max_tokens, temperature, seed?} -> {text}. One request per
/// requested text; request i carries a seed derived from (seed, i).
class RemoteGenerator final : public Generator {
 public:
  RemoteGenerator(Endpoint endpoint, ChatModel model) : endpoint_(std::move(endpoint)), model_(std::move(model)) {}
  std::vector<std::string> generate(std::string_view prompt, int count, std::uint64_t seed) const override;

 private:
  Endpoint endpoint_;
  ChatModel model_;
};

/// Reviewer over the same contract. The prompt is the reviewer prompt
/// followed by the document text, or the prompt alone with the compiled
/// artifact attached as base64.
class RemoteReviewer final : public Reviewer {
 public:
  RemoteReviewer(Endpoint endpoint, ChatModel model) : endpoint_(std::move(endpoint)), model_(std::move(model)) {}
  std::string complete(const ReviewRequest& request) const override;

 private:
  Endpoint endpoint_;
  ChatModel model_;
};

struct SidecarLimits {
  std::size_t max_batch = 16;
  std::size_t max_text_bytes = 1 << 20;
};

struct SidecarHealth {
  std::string status;
  std::vector<std::string> models;
};

/// Client for the scoring service: POST /v1/similarity, /v1/perplexity and
/// /v1/sentiment, GET /v1/limits and /v1/health. Batches larger than the
/// advertised maximum are split; the value order always follows the input.
class SidecarClient {
 public:
  explicit SidecarClient(Endpoint endpoint) : endpoint_(std::move(endpoint)) {}

  std::vector<double> similarity(const std::vector<std::pair<std::string, std::string>>& pairs) const;
  std::vector<double> perplexity(const std::vector<std::string>& texts) const;
  std::vector<double> sentiment(const std::vector<std::string>& texts) const;

  SidecarLimits limits() const;
  SidecarHealth health() const;
  /// Model id reported by the most recent scoring response.
  std::string last_model_id() const;

 private:
  std::vector<double> score_batches(const std::string& path, const std::string& field,
                                    const std::vector<nlohmann::json>& items) const;
  const SidecarLimits& cached_limits() const;

  Endpoint endpoint_;
  mutable std::optional<SidecarLimits> limits_;
  mutable std::string model_id_;
  mutable std::mutex mu_;
};

class SidecarSimilarity final : public SimilarityScorer {
 public:
  explicit SidecarSimilarity(std::shared_ptr<const SidecarClient> client) : client_(std::move(client)) {}
  double similarity(std::string_view a, std::string_view b) const override;

 private:
  std::shared_ptr<const SidecarClient> client_;
};

class SidecarPerplexity final : public PerplexityScorer {
 public:
  explicit SidecarPerplexity(std::shared_ptr<const SidecarClient> client) : client_(std::move(client)) {}
  double perplexity(std::string_view text) const override;

 private:
  std::shared_ptr<const SidecarClient> client_;
};

class SidecarSentiment final : public SentimentScorer {
 public:
  explicit SidecarSentiment(std::shared_ptr<const SidecarClient> client) : client_(std::move(client)) {}
  double sentiment(std::string_view text) const override;

 private:
  std::shared_ptr<const SidecarClient> client_;
};

}  // namespace paraprobe::providers
