// Eigen (via llm.hpp) must come before httplib: <resolv.h> defines a `_res`
// macro that clashes with Eigen parameter names.
#include "glucolens/llm.hpp"

#include <cstdlib>

#include <fmt/format.h>
#include <json.hpp>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "glucolens/error.hpp"

namespace glucolens {

namespace {

class HttpLlmClient : public LlmClient {
 public:
  HttpLlmClient(ProviderConfig config, std::string key) : config_(std::move(config)), key_(std::move(key)) {
    const auto scheme = config_.endpoint.find("://");
    const auto path = config_.endpoint.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    if (scheme == std::string::npos || path == std::string::npos)
      fail(ErrorCode::InvalidConfig, fmt::format("provider {} has a malformed endpoint", config_.id));
    host_ = config_.endpoint.substr(0, path);
    path_ = config_.endpoint.substr(path);
  }

  const std::string& provider_id() const override { return config_.id; }

  std::string complete(const std::string& prompt) override {
    httplib::Client cli(host_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout).count();
    cli.set_connection_timeout(secs);
    cli.set_read_timeout(secs);
    cli.set_write_timeout(secs);

    const bool anthropic = config_.api_style == "anthropic";
    nlohmann::json body = {{"model", config_.model},
                           {"max_tokens", 64},
                           {"messages", {{{"role", "user"}, {"content", prompt}}}}};
    httplib::Headers headers;
    if (anthropic) {
      headers = {{"x-api-key", key_}, {"anthropic-version", "2023-06-01"}};
    } else {
      body["temperature"] = 0;
      headers = {{"Authorization", "Bearer " + key_}};
    }

    auto res = cli.Post(path_, headers, body.dump(), "application/json");
    if (!res) {
      const auto err = res.error();
      const auto code = err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout ? ErrorCode::Timeout
                                                                                                 : ErrorCode::TransientFailure;
      fail(code, fmt::format("request to {} failed: {}", config_.id, httplib::to_string(err)));
    }
    if (res->status == 401 || res->status == 403)
      fail(ErrorCode::AuthFailure, fmt::format("{} rejected the credential (HTTP {})", config_.id, res->status));
    if (res->status == 429 || res->status >= 500)
      fail(ErrorCode::TransientFailure, fmt::format("{} returned HTTP {}", config_.id, res->status));
    if (res->status != 200)
      fail(ErrorCode::InvalidConfig, fmt::format("{} returned HTTP {}: {}", config_.id, res->status,
                                                 res->body.substr(0, 200)));
    try {
      const auto j = nlohmann::json::parse(res->body);
      if (anthropic) return j.at("content").at(0).at("text").get<std::string>();
      return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::TransientFailure, fmt::format("{} sent an unreadable body: {}", config_.id, e.what()));
    }
  }

 private:
  ProviderConfig config_;
  std::string key_;
  std::string host_;
  std::string path_;
};

}  // namespace

std::unique_ptr<LlmClient> make_http_client(const ProviderConfig& config) {
  const auto var = credential_env_var(config.id);
  const char* key = std::getenv(var.c_str());
  if (!key || !*key) fail(ErrorCode::AuthFailure, fmt::format("set {} to use provider {}", var, config.id));
  return std::make_unique<HttpLlmClient>(config, key);
}

}  // namespace glucolens
