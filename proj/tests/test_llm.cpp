#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <thread>

#include <fmt/format.h>

#include "glucolens/io.hpp"
#include "glucolens/llm.hpp"
#include "glucolens/random.hpp"
#include "helpers.hpp"

using namespace glucolens;
using testing_helpers::error_of;

namespace {

FeatureVector sample_features(FeatureSetKind kind, std::uint64_t seed) {
  FeatureVector fv;
  fv.set_kind = kind;
  fv.names = feature_names(kind);
  Rng rng(seed);
  for (std::size_t i = 0; i < fv.names.size(); ++i) fv.values.push_back(std::round(1000.0 * uniform01(rng)) / 10.0);
  return fv;
}

std::string input_block(const std::string& prompt) {
  const auto a = prompt.find("Input:\n");
  const auto b = prompt.find("\n\n", a);
  return prompt.substr(a, b - a);
}

std::string outside_input(const std::string& prompt) {
  const auto a = prompt.find("Input:\n");
  const auto b = prompt.find("\n\n", a);
  return prompt.substr(0, a) + prompt.substr(b);
}

}  // namespace

TEST_CASE("prompt rendering is pure") {
  const auto fv = sample_features(FeatureSetKind::All, 1);
  const auto t = PromptTemplate::builtin();
  CHECK(build_prompt(t, fv, LlmTarget::Auc) == build_prompt(t, fv, LlmTarget::Auc));
  CHECK(build_prompt(t, fv, LlmTarget::Auc) != build_prompt(t, fv, LlmTarget::MaxBgl));
}

TEST_CASE("changing only glycemic load changes only the Input block") {
  auto a = sample_features(FeatureSetKind::SensorGL, 2);
  auto b = a;
  b.values[static_cast<std::size_t>(b.index_of("glycemic_load"))] += 7.25;
  const auto t = PromptTemplate::builtin();
  const auto pa = build_prompt(t, a, LlmTarget::Auc), pb = build_prompt(t, b, LlmTarget::Auc);
  CHECK(pa != pb);
  CHECK(outside_input(pa) == outside_input(pb));
  CHECK(input_block(pa) != input_block(pb));
}

TEST_CASE("Input block lines use two decimals in canonical order") {
  FeatureVector fv;
  fv.names = {"fasting_glucose", "glycemic_load"};
  fv.values = {96.0, 32.4249};
  const auto p = build_prompt(PromptTemplate::builtin(), fv, LlmTarget::Auc);
  CHECK(input_block(p) == "Input:\nfasting_glucose: 96.00\nglycemic_load: 32.42");
}

TEST_CASE("rendered prompts name every canonical feature exactly once") {
  for (auto kind : {FeatureSetKind::SensorGL, FeatureSetKind::SensorMacro, FeatureSetKind::SelfGL,
                    FeatureSetKind::SelfMacro, FeatureSetKind::All})
    for (auto target : {LlmTarget::Auc, LlmTarget::MaxBgl}) {
      const auto p = build_prompt(PromptTemplate::builtin(), sample_features(kind, 3), target);
      for (const auto& name : feature_names(kind)) {
        CAPTURE(name);
        CHECK(count_identifier(p, name) == 1);
      }
    }
}

TEST_CASE("the shipped template asset matches the built-in template") {
  const auto asset = std::filesystem::path(GLUCOLENS_SOURCE_DIR) / "assets" / "prompt_template.txt";
  CHECK(PromptTemplate::load(asset).body() == PromptTemplate::builtin().body());
  CHECK(error_of([] { PromptTemplate("no slot here"); }) == ErrorCode::InvalidConfig);
  CHECK(error_of([] { PromptTemplate("{{input}} {{input}}"); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("identifier counting respects word boundaries") {
  CHECK(count_identifier("fat: 1\nsaturated_fat: 2\ntrans_fat: 3", "fat") == 1);
  CHECK(count_identifier("fat fat,fat", "fat") == 3);
  CHECK(count_identifier("fatty", "fat") == 0);
}

TEST_CASE("parse_prediction examples") {
  CHECK(parse_prediction("Predicted AUC: 18,234.5 mg/dL·min") == 18234.5);
  CHECK(error_of([] { parse_prediction("I cannot provide medical predictions."); }) == ErrorCode::NoNumberFound);
  CHECK(error_of([] { parse_prediction("answer is -5"); }) == ErrorCode::ImplausibleValue);
  CHECK(error_of([] { parse_prediction("Prediction: 250000"); }) == ErrorCode::ImplausibleValue);
  CHECK(parse_prediction("18250.0") == 18250.0);
  CHECK(parse_prediction("Looking at 3 meals... my prediction is 17,900") == 17900.0);
  CHECK(parse_prediction("Step 1: 120 g. Answer: 21000. AUC estimate: 20500") == 20500.0);
  CHECK(parse_prediction("the answer follows below\n  .5") == 0.5);
  // Falls back to the first number when nothing follows the last marker.
  CHECK(parse_prediction("19000 is my estimate of the AUC") == 19000.0);
}

TEST_CASE("parse_prediction is idempotent on its own rendering") {
  Rng rng(4);
  for (int i = 0; i < 500; ++i) {
    const double v = std::round(200000.0 * uniform01(rng) * 1000.0) / 1000.0;
    for (const std::string raw : {fmt::format("Prediction: {}", v), fmt::format("{:.3f}", v)}) {
      const double once = parse_prediction(raw);
      CHECK(parse_prediction(fmt::format("{}", once)) == once);
    }
  }
}

TEST_CASE("mock answers are cached after the first query") {
  LlmCache cache;
  MockLlmClient client("gpt-4", {.kind = MockSpec::Kind::Fixed, .fixed_response = "18250.0"});
  auto first = query(client, "prompt", &cache);
  CHECK(first.value == 18250.0);
  CHECK_FALSE(first.cached);
  auto second = query(client, "prompt", &cache);
  CHECK(second.value == 18250.0);
  CHECK(second.cached);
  CHECK(second.raw_response == first.raw_response);
  CHECK(client.calls() == 1);
}

TEST_CASE("a refusing provider surfaces RefusedPrediction and is not cached") {
  LlmCache cache;
  const auto& cfg = find_provider("mistral-large", builtin_providers());
  auto client = make_client(cfg, false);
  CHECK(error_of([&] { query(*client, "prompt", &cache); }) == ErrorCode::RefusedPrediction);
  CHECK(cache.size() == 0);
}

TEST_CASE("transient failures are retried with exponential backoff") {
  std::vector<long> sleeps;
  QueryOptions opts{.max_retries = 3, .backoff = std::chrono::milliseconds(100),
                    .sleeper = [&](std::chrono::milliseconds d) { sleeps.push_back(d.count()); }};

  ScriptedLlmClient down("grok-3", [](const std::string&, int) -> std::string {
    fail(ErrorCode::TransientFailure, "connection refused");
  });
  CHECK(error_of([&] { query(down, "p", nullptr, opts); }) == ErrorCode::Timeout);
  CHECK(down.calls() == 4);
  CHECK(sleeps == std::vector<long>{100, 200, 400});

  sleeps.clear();
  ScriptedLlmClient flaky("grok-3", [](const std::string&, int call) -> std::string {
    if (call < 2) fail(ErrorCode::Timeout, "read timed out");
    return "Answer: 17000";
  });
  CHECK(query(flaky, "p", nullptr, opts).value == 17000.0);
  CHECK(flaky.calls() == 3);

  ScriptedLlmClient denied("grok-3", [](const std::string&, int) -> std::string {
    fail(ErrorCode::AuthFailure, "bad key");
  });
  CHECK(error_of([&] { query(denied, "p", nullptr, opts); }) == ErrorCode::AuthFailure);
  CHECK(denied.calls() == 1);
}

TEST_CASE("cache persists and reloads identical predictions") {
  const auto path = std::filesystem::temp_directory_path() / "glucolens_llm_cache.json";
  std::filesystem::remove(path);
  const auto prompt = build_prompt(PromptTemplate::builtin(), sample_features(FeatureSetKind::All, 5), LlmTarget::Auc);
  LlmPrediction first;
  {
    LlmCache cache(path);
    MockLlmClient client("claude-opus-4", find_provider("claude-opus-4", builtin_providers()).mock);
    first = query(client, prompt, &cache);
    cache.persist();
  }
  LlmCache reloaded(path);
  MockLlmClient never("claude-opus-4", {.kind = MockSpec::Kind::Fixed, .fixed_response = "1"});
  auto again = query(never, prompt, &reloaded);
  CHECK(never.calls() == 0);
  CHECK(again.value == first.value);
  CHECK(again.raw_response == first.raw_response);
  first.cached = true;
  CHECK(again == first);
  std::filesystem::remove(path);
}

TEST_CASE("heuristic mocks are deterministic, plausible and parseable in every style") {
  const auto t = PromptTemplate::builtin();
  for (const auto& cfg : builtin_providers()) {
    if (cfg.mock.kind != MockSpec::Kind::Heuristic) continue;
    CAPTURE(cfg.id);
    for (std::uint64_t s = 0; s < 20; ++s) {
      auto fv = sample_features(FeatureSetKind::All, 10 + s);
      fv.values[static_cast<std::size_t>(fv.index_of("fasting_glucose"))] = 95.0;
      for (auto target : {LlmTarget::Auc, LlmTarget::MaxBgl}) {
        const auto p = build_prompt(t, fv, target);
        MockLlmClient a(cfg.id, cfg.mock), b(cfg.id, cfg.mock);
        const double va = query(a, p, nullptr).value;
        CHECK(va == query(b, p, nullptr).value);
        if (target == LlmTarget::Auc) {
          CHECK(va > 5000.0);
          CHECK(va < 100000.0);
        } else {
          CHECK(va > 50.0);
          CHECK(va < 600.0);
        }
      }
    }
  }
}

TEST_CASE("provider configuration") {
  CHECK(hybrid_providers().size() == 6);
  CHECK(best_provider() == "claude-opus-4");
  for (const auto& id : hybrid_providers()) CHECK(find_provider(id, builtin_providers()).id == id);
  CHECK(error_of([] { find_provider("llama", builtin_providers()); }) == ErrorCode::MissingProvider);
  CHECK(credential_env_var("gpt-3.5-turbo") == "GLUCOLENS_LLM_GPT_3_5_TURBO_KEY");
  ::unsetenv("GLUCOLENS_LLM_GPT_4_KEY");
  CHECK(error_of([] { make_client(find_provider("gpt-4", builtin_providers()), true); }) == ErrorCode::AuthFailure);
}

TEST_CASE("sha256 and rate limiting") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  std::vector<long> sleeps;
  RateLimiter limiter(std::chrono::milliseconds(1000), [&](std::chrono::milliseconds d) { sleeps.push_back(d.count()); });
  limiter.acquire();
  limiter.acquire();
  REQUIRE(sleeps.size() == 1);
  CHECK(sleeps[0] > 900);
  CHECK(sleeps[0] <= 1000);
}

TEST_CASE("concurrent queries to distinct providers share one cache") {
  LlmCache cache;
  const auto t = PromptTemplate::builtin();
  std::vector<std::jthread> threads;
  for (const auto& id : hybrid_providers())
    threads.emplace_back([&, id] {
      MockLlmClient client(id, find_provider(id, builtin_providers()).mock);
      for (std::uint64_t s = 0; s < 25; ++s)
        query(client, build_prompt(t, sample_features(FeatureSetKind::All, s), LlmTarget::Auc), &cache);
    });
  threads.clear();
  CHECK(cache.size() == 6 * 25);
}
