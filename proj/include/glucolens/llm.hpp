#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "glucolens/features.hpp"

namespace glucolens {

enum class LlmTarget { Auc, MaxBgl };

class PromptTemplate {
 public:
  // Must contain exactly one `{{input}}` slot. `{{target_description}}`,
  // `{{target_name}}` and `{{unit}}` are optional.
  explicit PromptTemplate(std::string body);

  static PromptTemplate builtin();
  static PromptTemplate load(const std::filesystem::path& path);

  const std::string& body() const { return body_; }

 private:
  std::string body_;
};

// Pure rendering: the Input block lists `name: value` (2 decimals) in the
// vector's own feature order.
std::string build_prompt(const PromptTemplate& tmpl, const FeatureVector& features, LlmTarget target);

// Whole-identifier occurrences of `name` in `text`.
int count_identifier(std::string_view text, std::string_view name);

// First number after the last marker ("prediction", "auc", "answer"; any
// case), else the first number anywhere. Raises NoNumberFound, or
// ImplausibleValue outside [0, 200000].
double parse_prediction(std::string_view raw);

std::string sha256_hex(std::string_view data);

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual const std::string& provider_id() const = 0;
  // Raw response text. Failures are reported as Error with code
  // TransientFailure (retryable), Timeout (retryable) or AuthFailure.
  virtual std::string complete(const std::string& prompt) = 0;
};

struct LlmPrediction {
  std::string provider_id;
  double value = 0.0;
  std::string raw_response;
  bool cached = false;

  bool operator==(const LlmPrediction&) const = default;
};

// Successful responses keyed by provider and SHA-256 of the prompt. Safe to
// share between threads; `persist` rewrites the whole file atomically.
class LlmCache {
 public:
  LlmCache() = default;
  explicit LlmCache(std::filesystem::path path);  // loads the file when it exists

  std::optional<LlmPrediction> lookup(const std::string& provider, const std::string& prompt) const;
  void store(const LlmPrediction& prediction, const std::string& prompt);
  void persist() const;
  std::size_t size() const;

 private:
  static std::string key(const std::string& provider, const std::string& prompt);

  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::map<std::string, std::pair<double, std::string>> entries_;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

// Keeps successive requests at least `min_interval` apart.
class RateLimiter {
 public:
  explicit RateLimiter(std::chrono::milliseconds min_interval, Sleeper sleeper = {});
  void acquire();

 private:
  std::chrono::milliseconds interval_;
  Sleeper sleep_;
  std::mutex mu_;
  std::optional<std::chrono::steady_clock::time_point> last_;
};

struct QueryOptions {
  int max_retries = 3;
  std::chrono::milliseconds backoff{250};  // doubled after each failed attempt
  Sleeper sleeper;                         // defaults to std::this_thread::sleep_for
  RateLimiter* limiter = nullptr;
};

// Cache first; on a miss, asks the client with retries. Transient failures
// that outlast the retries become Timeout; answers without a number become
// RefusedPrediction. Only successful answers are cached.
LlmPrediction query(LlmClient& client, const std::string& prompt, LlmCache* cache, const QueryOptions& opts = {});

// ---- providers ----

struct MockSpec {
  enum class Kind { Heuristic, Refuse, Fixed } kind = Kind::Heuristic;
  double noise = 0.10;  // relative spread of the heuristic's error
  double bias = 0.0;    // relative bias of the heuristic
  std::string fixed_response;
};

struct ProviderConfig {
  std::string id;
  std::string endpoint;
  std::string model;
  std::string api_style = "openai";  // "openai" or "anthropic"
  std::chrono::milliseconds timeout{30000};
  MockSpec mock;
};

// Providers used in the hybrid pipelines, in column order.
const std::vector<std::string>& hybrid_providers();
const std::string& best_provider();
// All built-in providers, including one that declines to answer.
const std::vector<ProviderConfig>& builtin_providers();
const ProviderConfig& find_provider(std::string_view id, const std::vector<ProviderConfig>& providers);

// GLUCOLENS_LLM_<ID>_KEY with the id upper-cased and non-alphanumerics mapped to '_'.
std::string credential_env_var(std::string_view provider_id);

// Deterministic offline stand-in for a provider.
class MockLlmClient : public LlmClient {
 public:
  explicit MockLlmClient(std::string provider_id, MockSpec spec = {});

  const std::string& provider_id() const override { return id_; }
  std::string complete(const std::string& prompt) override;

  // Number of completions served, for tests.
  int calls() const { return calls_; }

 private:
  std::string id_;
  MockSpec spec_;
  int calls_ = 0;
};

// Test double whose responses come from a callback.
class ScriptedLlmClient : public LlmClient {
 public:
  ScriptedLlmClient(std::string provider_id, std::function<std::string(const std::string&, int)> script);

  const std::string& provider_id() const override { return id_; }
  std::string complete(const std::string& prompt) override;
  int calls() const { return calls_; }

 private:
  std::string id_;
  std::function<std::string(const std::string&, int)> script_;
  int calls_ = 0;
};

// Live HTTPS client. The credential is read from the environment when the
// client is built; a missing credential raises AuthFailure.
std::unique_ptr<LlmClient> make_http_client(const ProviderConfig& config);

// Mock unless `live` is set.
std::unique_ptr<LlmClient> make_client(const ProviderConfig& config, bool live);

}  // namespace glucolens
