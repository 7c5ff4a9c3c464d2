#include "glucolens/llm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <regex>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "glucolens/error.hpp"
#include "glucolens/io.hpp"
#include "glucolens/random.hpp"

namespace glucolens {

namespace {

constexpr std::string_view kBuiltinTemplate =
    "You are an expert in human nutrition and glucose metabolism.\n"
    "\n"
    "Task: estimate the {{target_description}} of an adult office worker after a workday lunch.\n"
    "\n"
    "Each line of the input block has the form `name: value`. Glucose readings are in mg/dL. Times of day are "
    "minutes after midnight. Posture and activity durations come from a thigh-worn sensor and are in minutes. "
    "Meal composition is in grams, milligrams or kilocalories as is usual on food labels. The activity score "
    "combines the walking and standing shares of earlier workdays. Day of week counts from 0 for Monday.\n"
    "\n"
    "Input:\n"
    "{{input}}\n"
    "\n"
    "Respond with a single number: the predicted {{target_name}} in {{unit}}. Do not include any other text.\n";

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string_view::npos; pos = text.find(needle, pos + needle.size())) ++n;
  return n;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
}

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

PromptTemplate::PromptTemplate(std::string body) : body_(std::move(body)) {
  if (count_occurrences(body_, "{{input}}") != 1)
    fail(ErrorCode::InvalidConfig, "prompt template must contain exactly one {{input}} slot");
}

PromptTemplate PromptTemplate::builtin() { return PromptTemplate(std::string(kBuiltinTemplate)); }

PromptTemplate PromptTemplate::load(const std::filesystem::path& path) { return PromptTemplate(read_file(path)); }

std::string build_prompt(const PromptTemplate& tmpl, const FeatureVector& features, LlmTarget target) {
  std::string input;
  for (std::size_t i = 0; i < features.names.size(); ++i) {
    if (i) input += '\n';
    input += fmt::format("{}: {:.2f}", features.names[i], features.values[i]);
  }
  std::string out = tmpl.body();
  const bool auc = target == LlmTarget::Auc;
  replace_all(out, "{{target_description}}",
              auc ? "area under the glucose curve over the three hours" : "maximum glucose level in the three hours");
  replace_all(out, "{{target_name}}", auc ? "AUC" : "MaxBGL");
  replace_all(out, "{{unit}}", auc ? "mg/dL*min" : "mg/dL");
  const auto slot = out.find("{{input}}");
  out.replace(slot, 9, input);
  return out;
}

int count_identifier(std::string_view text, std::string_view name) {
  int n = 0;
  for (auto pos = text.find(name); pos != std::string_view::npos; pos = text.find(name, pos + 1)) {
    const bool left_ok = pos == 0 || !ident_char(text[pos - 1]);
    const auto end = pos + name.size();
    const bool right_ok = end == text.size() || !ident_char(text[end]);
    if (left_ok && right_ok) ++n;
  }
  return n;
}

double parse_prediction(std::string_view raw) {
  const std::string text(raw);
  const std::string low = lower(raw);
  std::size_t start = std::string::npos;
  for (std::string_view marker : {"prediction", "auc", "answer"}) {
    const auto pos = low.rfind(marker);
    if (pos != std::string::npos && (start == std::string::npos || pos + marker.size() > start))
      start = pos + marker.size();
  }
  static const std::regex number(R"((-?)(\d{1,3}(?:,\d{3})+(?:\.\d+)?|\d+(?:\.\d+)?|\.\d+))");
  std::smatch m;
  auto search_from = [&](std::size_t from) {
    return std::regex_search(text.cbegin() + static_cast<std::ptrdiff_t>(from), text.cend(), m, number);
  };
  if (!((start != std::string::npos && search_from(start)) || search_from(0)))
    fail(ErrorCode::NoNumberFound, "response contains no number");
  std::string digits = m[2].str();
  digits.erase(std::remove(digits.begin(), digits.end(), ','), digits.end());
  double v = std::stod(digits);
  if (m[1].length() > 0) v = -v;
  if (!(v >= 0.0 && v <= 200000.0))
    fail(ErrorCode::ImplausibleValue, fmt::format("predicted value {} is outside [0, 200000]", v));
  return v;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    fail(ErrorCode::IoError, "SHA-256 computation failed");
  std::string out;
  for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
  return out;
}

// ---- cache ----

LlmCache::LlmCache(std::filesystem::path path) : path_(std::move(path)) {
  if (!std::filesystem::exists(path_)) return;
  try {
    const auto j = nlohmann::json::parse(read_file(path_));
    for (const auto& [k, v] : j.at("entries").items())
      entries_[k] = {v.at("value").get<double>(), v.at("raw").get<std::string>()};
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidConfig, fmt::format("{}: malformed cache: {}", path_.string(), e.what()));
  }
}

std::string LlmCache::key(const std::string& provider, const std::string& prompt) {
  return provider + ":" + sha256_hex(prompt);
}

std::optional<LlmPrediction> LlmCache::lookup(const std::string& provider, const std::string& prompt) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(key(provider, prompt));
  if (it == entries_.end()) return std::nullopt;
  return LlmPrediction{provider, it->second.first, it->second.second, true};
}

void LlmCache::store(const LlmPrediction& prediction, const std::string& prompt) {
  std::lock_guard lock(mu_);
  entries_[key(prediction.provider_id, prompt)] = {prediction.value, prediction.raw_response};
}

void LlmCache::persist() const {
  if (path_.empty()) return;
  nlohmann::json entries = nlohmann::json::object();
  {
    std::lock_guard lock(mu_);
    for (const auto& [k, v] : entries_) entries[k] = {{"value", v.first}, {"raw", v.second}};
  }
  write_file_atomic(path_, nlohmann::json{{"format", "glucolens-llm-cache"}, {"entries", entries}}.dump(1) + "\n");
}

std::size_t LlmCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

// ---- query ----

namespace {

void default_sleep(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

}  // namespace

RateLimiter::RateLimiter(std::chrono::milliseconds min_interval, Sleeper sleeper)
    : interval_(min_interval), sleep_(sleeper ? std::move(sleeper) : Sleeper(default_sleep)) {}

void RateLimiter::acquire() {
  std::lock_guard lock(mu_);
  const auto now = std::chrono::steady_clock::now();
  if (last_) {
    const auto ready = *last_ + interval_;
    if (now < ready) {
      sleep_(std::chrono::duration_cast<std::chrono::milliseconds>(ready - now));
      last_ = ready;
      return;
    }
  }
  last_ = now;
}

LlmPrediction query(LlmClient& client, const std::string& prompt, LlmCache* cache, const QueryOptions& opts) {
  const std::string& id = client.provider_id();
  if (cache)
    if (auto hit = cache->lookup(id, prompt)) return *hit;

  const Sleeper sleep = opts.sleeper ? opts.sleeper : Sleeper(default_sleep);
  auto backoff = opts.backoff;
  std::string raw;
  for (int attempt = 0;; ++attempt) {
    try {
      if (opts.limiter) opts.limiter->acquire();
      raw = client.complete(prompt);
      break;
    } catch (const Error& e) {
      const bool retryable = e.code() == ErrorCode::TransientFailure || e.code() == ErrorCode::Timeout;
      if (!retryable) throw;
      if (attempt >= opts.max_retries)
        fail(ErrorCode::Timeout,
             fmt::format("{}: no response after {} attempts ({})", id, attempt + 1, e.detail()));
      sleep(backoff);
      backoff *= 2;
    }
  }

  double value = 0.0;
  try {
    value = parse_prediction(raw);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NoNumberFound)
      fail(ErrorCode::RefusedPrediction, fmt::format("{} declined to predict: {}", id, raw.substr(0, 120)));
    throw;
  }
  LlmPrediction out{id, value, raw, false};
  if (cache) cache->store(out, prompt);
  return out;
}

// ---- providers ----

const std::vector<std::string>& hybrid_providers() {
  static const std::vector<std::string> ids = {"gpt-3.5-turbo", "gpt-4",   "claude-opus-4",
                                               "deepseek-v3",   "gemini-flash-2.0", "grok-3"};
  return ids;
}

const std::string& best_provider() {
  static const std::string id = "claude-opus-4";
  return id;
}

const std::vector<ProviderConfig>& builtin_providers() {
  static const std::vector<ProviderConfig> providers = [] {
    auto openai = [](std::string id, std::string model, double noise, double bias) {
      ProviderConfig p;
      p.id = std::move(id);
      p.endpoint = "https://api.openai.com/v1/chat/completions";
      p.model = std::move(model);
      p.mock.noise = noise;
      p.mock.bias = bias;
      return p;
    };
    std::vector<ProviderConfig> out;
    out.push_back(openai("gpt-3.5-turbo", "gpt-3.5-turbo", 0.22, 0.08));
    out.push_back(openai("gpt-4", "gpt-4", 0.15, 0.05));
    ProviderConfig claude;
    claude.id = "claude-opus-4";
    claude.endpoint = "https://api.anthropic.com/v1/messages";
    claude.model = "claude-opus-4-0";
    claude.api_style = "anthropic";
    claude.mock.noise = 0.06;
    claude.mock.bias = 0.0;
    out.push_back(claude);
    auto deepseek = openai("deepseek-v3", "deepseek-chat", 0.14, -0.04);
    deepseek.endpoint = "https://api.deepseek.com/chat/completions";
    out.push_back(deepseek);
    auto gemini = openai("gemini-flash-2.0", "gemini-2.0-flash", 0.18, -0.06);
    gemini.endpoint = "https://generativelanguage.googleapis.com/v1beta/openai/chat/completions";
    out.push_back(gemini);
    auto grok = openai("grok-3", "grok-3", 0.16, 0.03);
    grok.endpoint = "https://api.x.ai/v1/chat/completions";
    out.push_back(grok);
    auto mistral = openai("mistral-large", "mistral-large-latest", 0.0, 0.0);
    mistral.endpoint = "https://api.mistral.ai/v1/chat/completions";
    mistral.mock.kind = MockSpec::Kind::Refuse;
    out.push_back(mistral);
    return out;
  }();
  return providers;
}

const ProviderConfig& find_provider(std::string_view id, const std::vector<ProviderConfig>& providers) {
  for (const auto& p : providers)
    if (p.id == id) return p;
  fail(ErrorCode::MissingProvider, fmt::format("provider '{}' is not configured", id));
}

std::string credential_env_var(std::string_view provider_id) {
  std::string id;
  for (char c : provider_id)
    id += std::isalnum(static_cast<unsigned char>(c)) ? static_cast<char>(std::toupper(static_cast<unsigned char>(c)))
                                                      : '_';
  return "GLUCOLENS_LLM_" + id + "_KEY";
}

namespace {

std::map<std::string, double> parse_input_block(const std::string& prompt) {
  std::map<std::string, double> out;
  const auto start = prompt.find("Input:\n");
  if (start == std::string::npos) return out;
  std::istringstream in(prompt.substr(start + 7));
  std::string line;
  while (std::getline(in, line) && !line.empty()) {
    const auto colon = line.find(": ");
    if (colon == std::string::npos) break;
    try {
      out[line.substr(0, colon)] = std::stod(line.substr(colon + 2));
    } catch (const std::exception&) {
      break;
    }
  }
  return out;
}

std::string group_thousands(double v) {
  auto s = fmt::format("{:.0f}", v);
  for (int i = static_cast<int>(s.size()) - 3; i > 0; i -= 3) s.insert(static_cast<std::size_t>(i), ",");
  return s;
}

// A rough clinical rule of thumb: peak rise tracks glycemic load, damped by
// stepping during the workday.
double heuristic_estimate(const std::map<std::string, double>& f, bool auc) {
  auto get = [&](const char* k, double fallback) {
    auto it = f.find(k);
    return it == f.end() ? fallback : it->second;
  };
  const double base = get("fasting_glucose", get("recent_cgm", 95.0));
  double load;
  if (f.count("glycemic_load")) {
    load = get("glycemic_load", 0.0);
  } else if (f.count("net_carbs")) {
    const double protein = get("protein", 0.0), fiber = get("fiber", 0.0);
    load = 19.27 + 0.39 * get("net_carbs", 0.0) - 0.21 * get("fat", 0.0) - 0.01 * protein * protein -
           0.01 * fiber * fiber;
  } else {
    load = 0.4 * get("total_carbs", 50.0);
  }
  const double steps = std::clamp(get("work_step", get("activity_score", 10.0)), 0.0, 120.0);
  const double rise = 1.6 * std::max(load, 0.0) * (1.0 - 0.003 * steps);
  return auc ? 180.0 * (base + 0.5 * rise) : base + rise;
}

}  // namespace

MockLlmClient::MockLlmClient(std::string provider_id, MockSpec spec) : id_(std::move(provider_id)), spec_(spec) {}

std::string MockLlmClient::complete(const std::string& prompt) {
  ++calls_;
  switch (spec_.kind) {
    case MockSpec::Kind::Fixed:
      return spec_.fixed_response;
    case MockSpec::Kind::Refuse:
      return "I'm sorry, but I can't provide medical predictions about an individual's glucose levels.";
    case MockSpec::Kind::Heuristic:
      break;
  }
  const bool auc = prompt.find("predicted AUC") != std::string::npos;
  const double estimate = heuristic_estimate(parse_input_block(prompt), auc);
  const auto h = sha256_hex(id_ + "\n" + prompt);
  Rng rng(std::stoull(h.substr(0, 16), nullptr, 16));
  const double value = std::max(0.0, estimate * (1.0 + spec_.bias + spec_.noise * standard_normal(rng)));
  const std::string unit = auc ? "mg/dL*min" : "mg/dL";
  switch (std::stoi(sha256_hex(id_).substr(0, 2), nullptr, 16) % 4) {
    case 0: return fmt::format("Prediction: {:.1f}", value);
    case 1: return fmt::format("Based on the inputs, the predicted {} is approximately {} {}.",
                               auc ? "AUC" : "MaxBGL", group_thousands(value), unit);
    case 2: return fmt::format("{:.2f}", value);
    default: return fmt::format("Answer: {:.0f}", value);
  }
}

ScriptedLlmClient::ScriptedLlmClient(std::string provider_id, std::function<std::string(const std::string&, int)> script)
    : id_(std::move(provider_id)), script_(std::move(script)) {}

std::string ScriptedLlmClient::complete(const std::string& prompt) { return script_(prompt, calls_++); }

std::unique_ptr<LlmClient> make_client(const ProviderConfig& config, bool live) {
  if (live) return make_http_client(config);
  return std::make_unique<MockLlmClient>(config.id, config.mock);
}

}  // namespace glucolens
