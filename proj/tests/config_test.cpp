#include <doctest.h>

#include "cofine/config.hpp"
#include "cofine/errors.hpp"

using namespace cofine;
using namespace cofine::config;

TEST_CASE("key-value parsing: comments, whitespace, order") {
  const KeyValues kv = KeyValues::parse(
      "# an experiment\n"
      "horizon = 100\n"
      "  trials=3   # inline comment\n"
      "\n"
      "policies = cofine, naive\n");
  CHECK(kv.get("horizon") == "100");
  CHECK(kv.get("trials") == "3");
  CHECK(kv.get("policies") == "cofine, naive");
  CHECK(kv.items()[0].first == "horizon");
  CHECK(kv.items()[2].first == "policies");
}

TEST_CASE("key-value parsing: malformed lines and duplicates") {
  CHECK_THROWS_AS(KeyValues::parse("horizon 100\n"), ConfigError);
  CHECK_THROWS_AS(KeyValues::parse("= 3\n"), ConfigError);
  CHECK_THROWS_AS(KeyValues::parse("a = 1\na = 2\n"), ConfigError);
}

TEST_CASE("resolve: defaults materialize and round-trip") {
  const KeyValues kv = KeyValues::parse("horizon = 50\n");
  const harness::ExperimentConfig cfg = resolve_experiment(kv, ".");
  CHECK(cfg.horizon == 50);
  CHECK(cfg.trials == 20);
  CHECK(cfg.policies.size() == 2);  // cofine + naive by default

  // materialize -> resolve -> materialize is a fixpoint
  const KeyValues manifest = materialize(cfg);
  const harness::ExperimentConfig again = resolve_experiment(manifest, ".");
  CHECK(materialize(again).serialize() == manifest.serialize());
}

TEST_CASE("resolve: unknown keys abort, provenance keys accepted") {
  CHECK_THROWS_AS(
      resolve_experiment(KeyValues::parse("lamda = 1\n"), "."), ConfigError);
  CHECK_NOTHROW(
      resolve_experiment(KeyValues::parse("tool_version = 9.9.9\n"), "."));
}

TEST_CASE("resolve: policy list and the focus pin") {
  const KeyValues kv = KeyValues::parse(
      "policies = cofine,cofine_focus,subspace\n"
      "explore_scale = 0.7\n"
      "lambda = 2\n");
  const harness::ExperimentConfig cfg = resolve_experiment(kv, ".");
  REQUIRE(cfg.policies.size() == 3);
  CHECK(cfg.policies[0].config.explore_scale == doctest::Approx(0.7));
  CHECK(cfg.policies[1].config.explore_scale == doctest::Approx(0.25));
  for (const auto& spec : cfg.policies)
    CHECK(spec.config.lambda == doctest::Approx(2.0));

  CHECK_THROWS_AS(
      resolve_experiment(KeyValues::parse("policies = thompson\n"), "."),
      ConfigError);
  CHECK_THROWS_AS(resolve_experiment(KeyValues::parse("policies = \n"), "."),
                  ConfigError);
}

TEST_CASE("resolve: validation rejects out-of-range values") {
  const auto reject = [](const std::string& text) {
    CHECK_THROWS_AS(resolve_experiment(KeyValues::parse(text), "."),
                    ConfigError);
  };
  reject("horizon = 0\n");
  reject("trials = -1\n");
  reject("actions = 1\n");
  reject("delta = 1.5\n");
  reject("beta = 1.5\n");
  reject("beta_min = 0.5\nbeta_max = 0.2\n");
  reject("subspace_dim = 30\ndim = 25\n");
  reject("lambda = 0\n");
  reject("noise = cauchy\n");
  reject("sigma = -0.1\n");
  reject("explore_scale = 2\n");
  reject("protocol = sweep_beta\nsweep_betas = \n");
  reject("horizon = ten\n");
}

TEST_CASE("resolve: sweep lists parse") {
  const KeyValues kv = KeyValues::parse(
      "protocol = sweep_k\n"
      "sweep_ks = 2, 5, 10\n"
      "sweep_betas = 0,0.25,1\n");
  const harness::ExperimentConfig cfg = resolve_experiment(kv, ".");
  CHECK(cfg.sweep_ks == std::vector<int>{2, 5, 10});
  CHECK(cfg.sweep_betas == std::vector<double>{0.0, 0.25, 1.0});
}

TEST_CASE("resolve: relative profile paths anchor at the config directory") {
  const KeyValues kv = KeyValues::parse("profiles_csv = data/p.csv\n");
  const harness::ExperimentConfig cfg = resolve_experiment(kv, "/tmp/base");
  REQUIRE(cfg.profiles_csv.has_value());
  CHECK(cfg.profiles_csv->find("/tmp/base/data/p.csv") != std::string::npos);
}
