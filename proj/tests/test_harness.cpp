#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "qgibbs/harness.hpp"

using namespace qgibbs;
using nlohmann::json;

namespace {

const char* kSmall = R"({
  "seed": 3,
  "model": {"L": 3, "beta": 0.2},
  "experiments": [
    {"id": "g", "kind": "gibbs"},
    {"id": "k", "kind": "gap", "checks": ["kernel", "cmlsi"], "sizes": [2, 3]},
    {"id": "m", "kind": "mlsi", "checks": ["dephasing"], "samples": 32, "descents": 2, "steps": 4}
  ]
})";

}  // namespace

TEST(Config, ParsesDefaultsAndOverrides) {
  auto c = parse_config_text(kSmall);
  EXPECT_EQ(c.seed, 3u);
  EXPECT_EQ(c.model.L, 3);
  EXPECT_DOUBLE_EQ(c.model.beta, 0.2);
  EXPECT_DOUBLE_EQ(c.model.J, 1.0);
  EXPECT_EQ(c.dynamics.generator, "schmidt");
  ASSERT_EQ(c.experiments.size(), 3u);
  EXPECT_EQ(c.experiments[1].checks, (std::vector<std::string>{"kernel", "cmlsi"}));
  EXPECT_EQ(c.experiments[1].params.at("sizes"), json::array({2, 3}));
}

TEST(Config, RejectsUnknownKeysKindsAndChecks) {
  EXPECT_THROW(parse_config_text(R"({"sed": 1})"), SchemaError);
  EXPECT_THROW(parse_config_text(R"({"model": {"L": 3, "temp": 1}})"), SchemaError);
  EXPECT_THROW(parse_config_text(R"({"experiments": [{"kind": "nope"}]})"), SchemaError);
  EXPECT_THROW(parse_config_text(R"({"experiments": [{"kind": "gap", "instances": 3}]})"), SchemaError);
  EXPECT_THROW(parse_config_text(R"({"experiments": [{"kind": "gap", "checks": ["axioms"]}]})"), SchemaError);
  EXPECT_THROW(parse_config_text(R"({"experiments": [{"id": "a", "kind": "gap"}, {"id": "a", "kind": "gibbs"}]})"),
               SchemaError);
  EXPECT_THROW(parse_config_text(R"({"dynamics": {"generator": "heat"}})"), SchemaError);
  EXPECT_THROW(parse_config_text(R"({"model": {"beta": -1}})"), SchemaError);
  EXPECT_THROW(parse_config_text("{not json"), SchemaError);
  EXPECT_THROW(load_config("/nonexistent/config.json"), SchemaError);
}

TEST(Config, RoundTripsThroughJson) {
  auto c = parse_config_text(kSmall);
  auto again = parse_config(config_to_json(c));
  EXPECT_EQ(config_to_json(again), config_to_json(c));
}

TEST(Config, EveryKindHasItsDefaultsAmongItsChecks) {
  for (const auto& k : experiment_kinds()) {
    const auto& all = kind_checks(k);
    for (const auto& d : default_checks(k)) EXPECT_NE(std::find(all.begin(), all.end(), d), all.end()) << k << "/" << d;
  }
  EXPECT_THROW(kind_checks("nope"), SchemaError);
}

TEST(Run, EmptyExperimentListGivesNoRecords) {
  auto recs = run(parse_config_text("{}"));
  EXPECT_TRUE(recs.empty());
  EXPECT_EQ(emit_jsonl(recs), "");
  EXPECT_EQ(emit_csv(recs), "id,kind,criterion,type,name,value\n");
  EXPECT_EQ(exit_code(recs), 0);
}

TEST(Run, SmallConfigPassesAndCarriesProvenance) {
  auto c = parse_config_text(kSmall);
  auto recs = run(c);
  ASSERT_EQ(recs.size(), 3u);
  for (const auto& r : recs) {
    EXPECT_TRUE(r.passed()) << r.id;
    EXPECT_EQ(r.seed, 3u);
    EXPECT_EQ(r.build, build_id());
    EXPECT_TRUE(r.params.contains("model"));
  }
  EXPECT_EQ(recs[1].checks.size(), 2u);
  EXPECT_EQ(recs[1].metrics.at("kernel.mismatches"), 0.0);
  EXPECT_EQ(exit_code(recs), 0);
}

TEST(Run, RerunIsByteIdentical) {
  auto c = parse_config_text(kSmall);
  EXPECT_EQ(emit_jsonl(run(c)), emit_jsonl(run(c)));
  EXPECT_EQ(emit_csv(run(c)), emit_csv(run(c)));
}

TEST(Run, SeedChangesRandomizedMetrics) {
  auto c = parse_config_text(R"({"experiments": [{"id": "c", "kind": "ce-check", "checks": ["chain_rule"], "instances": 4}]})");
  auto a = run(c);
  c.seed = 99;
  auto b = run(c);
  EXPECT_EQ(a[0].seed, 1u);
  EXPECT_EQ(b[0].seed, 99u);
  EXPECT_NE(record_to_json(a[0]).dump(), record_to_json(b[0]).dump());
}

TEST(Run, PerExperimentModelOverridesTheGlobalOne) {
  auto c = parse_config_text(R"({"model": {"L": 2}, "experiments": [{"id": "g", "kind": "gibbs", "model": {"L": 4}}]})");
  auto r = run(c)[0];
  EXPECT_EQ(r.params.at("model").at("L"), 4);
}

TEST(Records, JsonRoundTripKeepsNonFiniteMetrics) {
  Record r;
  r.id = "x";
  r.kind = "gap";
  r.criterion = 7;
  r.params = {{"a", 1}};
  r.metrics = {{"m.inf", std::numeric_limits<double>::infinity()},
               {"m.ninf", -std::numeric_limits<double>::infinity()},
               {"m.v", 0.1}};
  r.checks = {{"c", true}};
  r.build = "b";
  r.seed = 4;
  Record back = record_from_json(json::parse(record_to_json(r).dump()));
  EXPECT_EQ(back, r);
  EXPECT_TRUE(std::isinf(back.metrics.at("m.inf")));
  EXPECT_LT(back.metrics.at("m.ninf"), 0);

  r.metrics["m.nan"] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_TRUE(std::isnan(record_from_json(record_to_json(r)).metrics.at("m.nan")));
}

TEST(Records, JsonlRoundTrip) {
  auto recs = run(parse_config_text(kSmall));
  auto back = parse_jsonl(emit_jsonl(recs));
  ASSERT_EQ(back.size(), recs.size());
  for (size_t i = 0; i < recs.size(); ++i) EXPECT_EQ(back[i], recs[i]);
  EXPECT_EQ(emit_jsonl(back), emit_jsonl(recs));
}

TEST(Records, CsvLayout) {
  Record r;
  r.id = "x";
  r.kind = "gap";
  r.criterion = 7;
  r.metrics = {{"b", 0.5}, {"a", 2}};
  r.checks = {{"ok", true}, {"bad", false}};
  EXPECT_EQ(emit_csv({r}),
            "id,kind,criterion,type,name,value\n"
            "x,gap,7,metric,a,2\n"
            "x,gap,7,metric,b,0.5\n"
            "x,gap,7,check,bad,0\n"
            "x,gap,7,check,ok,1\n");
}

TEST(Records, ExitCodeReflectsFailedChecks) {
  Record ok, bad;
  ok.checks = {{"a", true}};
  bad.checks = {{"a", true}, {"b", false}};
  EXPECT_TRUE(ok.passed());
  EXPECT_FALSE(bad.passed());
  EXPECT_EQ(exit_code({ok}), 0);
  EXPECT_EQ(exit_code({ok, bad}), 2);
}

TEST(Builders, GeneratorsMatchModel) {
  ModelConfig m;
  m.L = 2;
  EXPECT_EQ(build_region(m).size(), 2u);
  m.dim = 2;
  EXPECT_EQ(build_region(m).size(), 4u);
  m.dim = 1;
  DynamicsConfig d;
  for (const char* g : {"schmidt", "glauber", "dephasing", "depolarizing"}) {
    d.generator = g;
    d.rate = 2.0;
    Lindbladian l = build_generator(d, m);
    EXPECT_EQ(l.dim(), 4) << g;
  }
  d.generator = "heat";
  EXPECT_THROW(build_generator(d, m), SchemaError);
}

TEST(Records, DecayTableMatchesMetrics) {
  Record r;
  r.id = "cl";
  r.metrics = {{"decay.linf.d1", 0.25}, {"decay.linf.d2", 0.0625}, {"decay.linf.xi", 0.7}, {"x.dz", 1.0}};
  EXPECT_EQ(emit_decay_table({r}),
            "id,series,distance,value\n"
            "cl,decay.linf,1,0.25\n"
            "cl,decay.linf,2,0.0625\n");
}

TEST(Run, ClusteringDecayTableAgreesWithRecord) {
  auto c = parse_config_text(R"({"model": {"beta": 0.3},
    "experiments": [{"id": "cl", "kind": "clustering", "checks": ["decay"], "n": 5}]})");
  auto recs = run(c);
  ASSERT_EQ(recs.size(), 1u);
  std::istringstream in(emit_decay_table(recs));
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string id, series, dist, value;
    std::getline(ss, id, ',');
    std::getline(ss, series, ',');
    std::getline(ss, dist, ',');
    std::getline(ss, value, ',');
    EXPECT_EQ(std::stod(value), recs[0].metrics.at(series + ".d" + dist)) << line;
    ++rows;
  }
  // four profiles over distances 1..4 plus the L1 -> Linf spot checks
  EXPECT_GE(rows, 16);
}
