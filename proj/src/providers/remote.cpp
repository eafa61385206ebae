#include "paraprobe/providers/remote.hpp"

#include <cmath>
#include <cstdlib>

#include "httplib.h"
#include "paraprobe/core/error.hpp"
#include "paraprobe/core/util.hpp"

namespace paraprobe::providers {

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int decode_char(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

httplib::Client make_client(const Endpoint& e) {
  httplib::Client cli(e.base_url);
  cli.set_connection_timeout(e.timeout);
  cli.set_read_timeout(e.timeout);
  cli.set_write_timeout(e.timeout);
  if (!e.api_key_env.empty()) {
    if (const char* key = std::getenv(e.api_key_env.c_str()); key && *key) cli.set_bearer_token_auth(key);
  }
  return cli;
}

nlohmann::json parse_response(const httplib::Result& res, const std::string& where) {
  if (!res) {
    throw Error(ErrorKind::kProviderTimeout, where + ": " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error(ErrorKind::kProviderMalformedOutput,
                where + ": HTTP " + std::to_string(res->status) + " " + res->body.substr(0, 200));
  }
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorKind::kProviderMalformedOutput, where + ": invalid JSON: " + ex.what());
  }
}

std::string text_field(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("text") || !j["text"].is_string()) {
    throw Error(ErrorKind::kProviderMalformedOutput, where + ": response lacks a 'text' string");
  }
  return j["text"].get<std::string>();
}

nlohmann::json chat_body(const ChatModel& m, std::string prompt, std::uint64_t seed) {
  nlohmann::json body = {
      {"model", m.model},
      {"prompt", std::move(prompt)},
      {"max_tokens", m.max_tokens},
      {"temperature", m.temperature},
  };
  // JSON numbers lose precision above 2^53
  if (m.send_seed) body["seed"] = seed & ((1ULL << 53) - 1);
  return body;
}

}  // namespace

std::string base64_encode(std::string_view bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const auto n = (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i])) << 16) |
                   (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i + 1])) << 8) |
                   static_cast<unsigned char>(bytes[i + 2]);
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += kAlphabet[(n >> 6) & 63];
    out += kAlphabet[n & 63];
  }
  const auto rest = bytes.size() - i;
  if (rest == 1) {
    const auto n = static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i])) << 16;
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += "==";
  } else if (rest == 2) {
    const auto n = (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i])) << 16) |
                   (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i + 1])) << 8);
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += kAlphabet[(n >> 6) & 63];
    out += '=';
  }
  return out;
}

std::string base64_decode(std::string_view text) {
  std::string out;
  std::uint32_t buffer = 0;
  int bits = 0;
  for (const char c : text) {
    if (c == '=') break;
    if (c == '\n' || c == '\r') continue;
    const int v = decode_char(c);
    if (v < 0) throw Error(ErrorKind::kInvalidArgument, "invalid base64 character");
    buffer = (buffer << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out += static_cast<char>((buffer >> bits) & 0xff);
    }
  }
  return out;
}

Endpoint endpoint_from_json(const nlohmann::json& j, std::string default_path) {
  Endpoint e;
  if (!j.contains("base_url")) throw Error(ErrorKind::kInvalidConfig, "endpoint needs base_url");
  e.base_url = j.at("base_url").get<std::string>();
  e.path = j.value("path", std::move(default_path));
  e.api_key_env = j.value("api_key_env", std::string());
  e.timeout = std::chrono::milliseconds(j.value("timeout_ms", 60'000));
  if (j.contains("api_key")) {
    throw Error(ErrorKind::kInvalidConfig, "API keys are read from the environment; use api_key_env");
  }
  return e;
}

nlohmann::json post_json(const Endpoint& endpoint, const nlohmann::json& body) {
  auto cli = make_client(endpoint);
  const auto res = cli.Post(endpoint.path, body.dump(), "application/json");
  return parse_response(res, "POST " + endpoint.base_url + endpoint.path);
}

nlohmann::json get_json(const Endpoint& endpoint, const std::string& path) {
  auto cli = make_client(endpoint);
  const auto res = cli.Get(path);
  return parse_response(res, "GET " + endpoint.base_url + path);
}

std::vector<std::string> RemoteGenerator::generate(std::string_view prompt, int count, std::uint64_t seed) const {
  if (count < 1) throw Error(ErrorKind::kInvalidArgument, "generate needs count >= 1");
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const auto body = chat_body(model_, std::string(prompt), derive_seed(seed, {static_cast<std::uint64_t>(i)}));
    auto text = std::string(trim(text_field(post_json(endpoint_, body), "generator")));
    if (text.empty()) throw Error(ErrorKind::kProviderMalformedOutput, "generator returned an empty paraphrase");
    out.push_back(std::move(text));
  }
  return out;
}

std::string RemoteReviewer::complete(const ReviewRequest& request) const {
  std::string prompt(request.reviewer_prompt);
  nlohmann::json body;
  if (request.attachment_path) {
    body = chat_body(model_, std::move(prompt), request.seed);
    body["attachment"] = base64_encode(read_file(*request.attachment_path));
  } else {
    prompt += "\n\n";
    prompt += request.document_text;
    body = chat_body(model_, std::move(prompt), request.seed);
  }
  return text_field(post_json(endpoint_, body), "reviewer");
}

SidecarLimits SidecarClient::limits() const {
  const auto j = get_json(endpoint_, "/v1/limits");
  SidecarLimits l;
  try {
    l.max_batch = j.at("max_batch").get<std::size_t>();
    l.max_text_bytes = j.at("max_text_bytes").get<std::size_t>();
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorKind::kProviderMalformedOutput, std::string("/v1/limits: ") + ex.what());
  }
  if (l.max_batch == 0) throw Error(ErrorKind::kProviderMalformedOutput, "/v1/limits: max_batch is 0");
  return l;
}

SidecarHealth SidecarClient::health() const {
  const auto j = get_json(endpoint_, "/v1/health");
  SidecarHealth h;
  h.status = j.value("status", std::string());
  if (j.contains("models") && j["models"].is_array()) {
    for (const auto& m : j["models"]) h.models.push_back(m.is_string() ? m.get<std::string>() : m.dump());
  } else if (j.contains("models") && j["models"].is_object()) {
    for (const auto& [k, v] : j["models"].items()) h.models.push_back(k);
  }
  return h;
}

std::string SidecarClient::last_model_id() const {
  std::lock_guard lock(mu_);
  return model_id_;
}

const SidecarLimits& SidecarClient::cached_limits() const {
  std::lock_guard lock(mu_);
  if (!limits_) limits_ = limits();
  return *limits_;
}

std::vector<double> SidecarClient::score_batches(const std::string& path, const std::string& field,
                                                 const std::vector<nlohmann::json>& items) const {
  const auto max_batch = cached_limits().max_batch;
  Endpoint e = endpoint_;
  e.path = path;
  std::vector<double> values;
  values.reserve(items.size());
  for (std::size_t begin = 0; begin < items.size(); begin += max_batch) {
    const auto end = std::min(items.size(), begin + max_batch);
    nlohmann::json batch = nlohmann::json::array();
    for (std::size_t i = begin; i < end; ++i) batch.push_back(items[i]);
    const auto j = post_json(e, {{field, std::move(batch)}});
    if (!j.contains("values") || !j["values"].is_array() || j["values"].size() != end - begin) {
      throw Error(ErrorKind::kProviderMalformedOutput, path + ": value count does not match the batch");
    }
    for (const auto& v : j["values"]) {
      if (!v.is_number() || !std::isfinite(v.get<double>())) {
        throw Error(ErrorKind::kProviderMalformedOutput, path + ": non-numeric value");
      }
      values.push_back(v.get<double>());
    }
    std::lock_guard lock(mu_);
    model_id_ = j.value("model_id", std::string());
  }
  return values;
}

std::vector<double> SidecarClient::similarity(const std::vector<std::pair<std::string, std::string>>& pairs) const {
  std::vector<nlohmann::json> items;
  for (const auto& [a, b] : pairs) {
    if (a.empty() || b.empty()) throw Error(ErrorKind::kInvalidArgument, "similarity of an empty text");
    items.push_back(nlohmann::json::array({a, b}));
  }
  return score_batches("/v1/similarity", "pairs", items);
}

std::vector<double> SidecarClient::perplexity(const std::vector<std::string>& texts) const {
  std::vector<nlohmann::json> items;
  for (const auto& t : texts) {
    if (t.empty()) throw Error(ErrorKind::kInvalidArgument, "perplexity of empty text");
    items.emplace_back(t);
  }
  return score_batches("/v1/perplexity", "texts", items);
}

std::vector<double> SidecarClient::sentiment(const std::vector<std::string>& texts) const {
  std::vector<nlohmann::json> items;
  for (const auto& t : texts) {
    if (t.empty()) throw Error(ErrorKind::kInvalidArgument, "sentiment of empty text");
    items.emplace_back(t);
  }
  return score_batches("/v1/sentiment", "texts", items);
}

double SidecarSimilarity::similarity(std::string_view a, std::string_view b) const {
  return client_->similarity({{std::string(a), std::string(b)}}).at(0);
}

double SidecarPerplexity::perplexity(std::string_view text) const {
  const double v = client_->perplexity({std::string(text)}).at(0);
  if (!(v > 0.0)) throw Error(ErrorKind::kProviderMalformedOutput, "perplexity must be positive");
  return v;
}

double SidecarSentiment::sentiment(std::string_view text) const {
  return client_->sentiment({std::string(text)}).at(0);
}

}  // namespace paraprobe::providers
