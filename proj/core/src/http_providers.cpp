// Copyright 2026 The CNE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <chrono>
#include <cstdlib>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "cne/annotator.hpp"
#include "cne/errors.hpp"
#include "cne/featurizer.hpp"
#include "cne/nli.hpp"

namespace cne {

using nlohmann::json;

namespace {

/// Token bucket limiting request rate to a remote endpoint.
class TokenBucket {
 public:
  TokenBucket(double capacity, double per_second)
      : capacity_(capacity), per_second_(per_second), tokens_(capacity),
        last_(std::chrono::steady_clock::now()) {}

  void acquire() {
    std::unique_lock<std::mutex> lock(mutex_);
    for (;;) {
      refill();
      if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return;
      }
      const double needed = (1.0 - tokens_) / per_second_;
      lock.unlock();
      std::this_thread::sleep_for(std::chrono::duration<double>(needed));
      lock.lock();
    }
  }

 private:
  void refill() {
    const auto now = std::chrono::steady_clock::now();
    const double elapsed = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    tokens_ = std::min(capacity_, tokens_ + elapsed * per_second_);
  }

  double capacity_;
  double per_second_;
  double tokens_;
  std::chrono::steady_clock::time_point last_;
  std::mutex mutex_;
};

struct ParsedEndpoint {
  std::string host_port;  // scheme://host:port
  std::string path;
};

ParsedEndpoint split_endpoint(const std::string& endpoint) {
  const std::size_t scheme = endpoint.find("://");
  if (scheme == std::string::npos) {
    throw ConfigError("endpoint must include a scheme: " + endpoint);
  }
  const std::size_t path_start = endpoint.find('/', scheme + 3);
  if (path_start == std::string::npos) return {endpoint, "/"};
  return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

/// POST JSON with rate limiting; the caller supplies retries via with_retries.
json post_json(const HttpProviderOptions& options, TokenBucket& bucket, const json& body) {
  bucket.acquire();
  const ParsedEndpoint endpoint = split_endpoint(options.endpoint);
  httplib::Client client(endpoint.host_port);
  client.set_connection_timeout(10);
  client.set_read_timeout(60);
  httplib::Headers headers;
  if (!options.api_key_env.empty()) {
    const char* key = std::getenv(options.api_key_env.c_str());
    if (key == nullptr) {
      throw ProviderError("api key env var not set: " + options.api_key_env, /*retryable=*/false);
    }
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  const auto result = client.Post(endpoint.path, headers, body.dump(), "application/json");
  if (!result) {
    throw ProviderError("transport failure to " + options.endpoint + ": " +
                            httplib::to_string(result.error()),
                        /*retryable=*/true);
  }
  if (result->status == 429 || result->status >= 500) {
    throw ProviderError("endpoint " + options.endpoint + " returned " +
                            std::to_string(result->status),
                        /*retryable=*/true);
  }
  if (result->status != 200) {
    throw ProviderError("endpoint " + options.endpoint + " returned " +
                            std::to_string(result->status) + ": " + result->body,
                        /*retryable=*/false);
  }
  try {
    return json::parse(result->body);
  } catch (const json::exception& e) {
    throw ProviderError("endpoint " + options.endpoint + " returned invalid JSON: " + e.what(),
                        /*retryable=*/false);
  }
}

class HttpNliProvider : public NliProvider {
 public:
  HttpNliProvider(std::string id, HttpProviderOptions options)
      : id_(std::move(id)), options_(std::move(options)),
        bucket_(options_.rate_capacity, options_.rate_per_second) {}

  std::string id() const override { return id_; }
  bool remote() const override { return true; }

  NliJudgment judge(std::string_view premise, const Hypothesis& hypothesis) override {
    const json body = {{"premise", std::string(premise)}, {"hypothesis", hypothesis.text}};
    const json reply = with_retries(options_.retry,
                                    [&](int) { return post_json(options_, bucket_, body); });
    return NliJudgment::from_scores(NliScores{reply.at("ent").get<double>(),
                                              reply.at("con").get<double>(),
                                              reply.at("neu").get<double>()});
  }

 private:
  std::string id_;
  HttpProviderOptions options_;
  TokenBucket bucket_;
};

class HttpLlmProvider : public LlmProvider {
 public:
  HttpLlmProvider(std::string id, std::string model, HttpProviderOptions options)
      : id_(std::move(id)), model_(std::move(model)), options_(std::move(options)),
        bucket_(options_.rate_capacity, options_.rate_per_second) {}

  std::string id() const override { return id_; }
  std::string model() const override { return model_; }
  bool remote() const override { return true; }

  std::string complete(const std::string& prompt, double temperature) override {
    const json body = {{"model", model_}, {"prompt", prompt}, {"temperature", temperature}};
    // Retries live in CachedLlmProvider; one attempt here.
    const json reply = post_json(options_, bucket_, body);
    return reply.at("text").get<std::string>();
  }

 private:
  std::string id_;
  std::string model_;
  HttpProviderOptions options_;
  TokenBucket bucket_;
};

class HttpEmbeddingProvider : public EmbeddingProvider {
 public:
  HttpEmbeddingProvider(std::string id, std::size_t dimension, std::size_t max_tokens,
                        HttpProviderOptions options)
      : id_(std::move(id)), dimension_(dimension), max_tokens_(max_tokens),
        options_(std::move(options)), bucket_(options_.rate_capacity, options_.rate_per_second) {}

  std::string id() const override { return id_; }
  bool remote() const override { return true; }
  std::size_t dimension() const override { return dimension_; }
  std::size_t max_tokens() const override { return max_tokens_; }

  Eigen::VectorXd embed(std::string_view text) override {
    const json body = {{"texts", {std::string(text)}}};
    const json reply = with_retries(options_.retry,
                                    [&](int) { return post_json(options_, bucket_, body); });
    const auto& vectors = reply.at("vectors");
    if (!vectors.is_array() || vectors.size() != 1) {
      throw ProviderError("embedding endpoint returned " + std::to_string(vectors.size()) +
                              " vectors for 1 text",
                          /*retryable=*/false);
    }
    const auto& values = vectors[0];
    if (values.size() != dimension_) {
      throw ValidationError("embedding endpoint returned dimension " +
                            std::to_string(values.size()) + ", expected " +
                            std::to_string(dimension_));
    }
    Eigen::VectorXd vec(static_cast<Eigen::Index>(dimension_));
    for (std::size_t i = 0; i < dimension_; ++i) {
      vec[static_cast<Eigen::Index>(i)] = values[i].get<double>();
    }
    if (!vec.allFinite()) throw ValidationError("embedding endpoint returned non-finite values");
    return vec;
  }

 private:
  std::string id_;
  std::size_t dimension_;
  std::size_t max_tokens_;
  HttpProviderOptions options_;
  TokenBucket bucket_;
};

}  // namespace

std::unique_ptr<NliProvider> make_http_nli_provider(std::string id, HttpProviderOptions options) {
  return std::make_unique<HttpNliProvider>(std::move(id), std::move(options));
}

std::unique_ptr<LlmProvider> make_http_llm_provider(std::string id, std::string model,
                                                    HttpProviderOptions options) {
  return std::make_unique<HttpLlmProvider>(std::move(id), std::move(model), std::move(options));
}

std::unique_ptr<EmbeddingProvider> make_http_embedding_provider(std::string id,
                                                                std::size_t dimension,
                                                                std::size_t max_tokens,
                                                                HttpProviderOptions options) {
  return std::make_unique<HttpEmbeddingProvider>(std::move(id), dimension, max_tokens,
                                                 std::move(options));
}

}  // namespace cne
