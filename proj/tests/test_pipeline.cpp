#include <doctest.h>

#include "laborscape/csv.hpp"
#include "laborscape/pipeline.hpp"
#include "support.hpp"

using namespace laborscape;

namespace {

std::filesystem::path toy_config() { return test_support::source_dir() / "data/toy/config.json"; }

nlohmann::json toy_json() { return nlohmann::json::parse(read_file(toy_config())); }

PipelineConfig toy_with(const std::function<void(nlohmann::json&)>& edit) {
  auto doc = toy_json();
  edit(doc);
  return PipelineConfig::from_json(doc, toy_config().parent_path());
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("toy configuration loads with defaults filled in") {
  auto cfg = PipelineConfig::load(toy_config());
  CHECK(cfg.crosswalk.has_value());
  CHECK(cfg.params.seed == 42);
  CHECK(cfg.regressions.size() == 5);
  CHECK_NOTHROW(cfg.check());
}

TEST_CASE("configuration errors") {
  CHECK_THROWS_AS(toy_with([](auto& j) { j["inputs"]["employmnet"] = "x.csv"; }), Error);
  CHECK_THROWS_AS(toy_with([](auto& j) { j["parameters"]["pca_scaling"] = "whitened"; }), Error);
  auto bad_path = toy_with([](auto& j) { j["inputs"]["employment"] = "missing.csv"; });
  try {
    Pipeline p(bad_path);
    FAIL("missing file accepted");
  } catch (const StageError& e) {
    CHECK(e.stage() == "config");
    CHECK(e.code() == ErrorCode::Config);
  }
  auto bad_range = toy_with([](auto& j) { j["parameters"]["significance"] = 1.5; });
  CHECK_THROWS_AS(Pipeline{bad_range}, StageError);
}

TEST_CASE("missing risk stops at validate_join") {
  auto cfg = toy_with([](auto& j) { j["inputs"].erase("crosswalk"); });
  Pipeline p(cfg);
  try {
    p.impact_table();
    FAIL("no error");
  } catch (const StageError& e) {
    CHECK(e.stage() == "validate_join");
    CHECK(e.code() == ErrorCode::MissingRisk);
    CHECK(is_input_error(e.code()));
  }
}

TEST_CASE("uncovered occupations need an explicit default") {
  auto dir = test_support::scratch_dir("partial_risk");
  write_file_atomic(dir / "risk.csv", "code,probability\nCN-101,0.1\nCN-102,0.2\n");
  auto strict = toy_with([&](auto& j) {
    j["inputs"].erase("crosswalk");
    j["inputs"]["risk"] = (dir / "risk.csv").string();
  });
  Pipeline p(strict);
  CHECK_THROWS_AS(p.risk(), StageError);

  auto lenient = toy_with([&](auto& j) {
    j["inputs"].erase("crosswalk");
    j["inputs"]["risk"] = (dir / "risk.csv").string();
    j["parameters"]["missing_risk_default"] = 0.5;
  });
  Pipeline q(lenient);
  CHECK(q.risk().at("CN-206") == 0.5);
  CHECK(q.risk().at("CN-101") == 0.1);
}

TEST_CASE("toy analysis is sorted and complete") {
  Pipeline p(PipelineConfig::load(toy_config()));
  const auto& emp = p.employment();
  CHECK(emp.num_cities() == 8);
  CHECK(emp.num_occupations() == 12);
  CHECK(std::is_sorted(emp.cities().begin(), emp.cities().end()));
  CHECK(emp.occupations()[0].label == "Software developers");

  // transferred risk: CN-105 averages two sources, CN-106 was adjudicated
  CHECK(p.risk().at("CN-105") == doctest::Approx((0.05 + 0.04) / 2.0));
  CHECK(p.risk().at("CN-106") == 0.16);
  CHECK(p.risk().at("CN-999") == 0.0);

  const auto& premium = p.grouping(structure::GroupingScheme::Premium);
  CHECK(premium.group_size("premium") == 3);
  CHECK(premium.label_of("Alderford") == "premium");
  CHECK(premium.label_of("Glenholt") == "non-premium");
  CHECK(p.grouping(structure::GroupingScheme::Elite).group_size("elite") == 3);

  REQUIRE(p.pca() != nullptr);
  CHECK(p.pca()->features.size() == 4);
  REQUIRE(p.elite_distances() != nullptr);
  CHECK(p.elite_distances()->at("Alderford") == 0.0);
  CHECK(p.frame().has("vocational_teachers"));
}

TEST_CASE("single tables match report files byte for byte") {
  auto dir = test_support::scratch_dir("report_match");
  Pipeline p(PipelineConfig::load(toy_config()));
  p.write_report(dir);

  Pipeline q(PipelineConfig::load(toy_config()));
  CHECK(q.impact_table().to_csv() == read_file(dir / "metrics/impact.csv"));
  CHECK(q.diversity_table().to_csv() == read_file(dir / "metrics/diversity.csv"));
  CHECK(q.rca_table().to_csv() == read_file(dir / "rca.csv"));
  CHECK(q.proximity_table().to_csv() == read_file(dir / "occspace/proximity.csv"));
  CHECK(q.distance_table().to_csv() == read_file(dir / "distance_to_elite.csv"));
  CHECK(q.grouping_table().to_csv() == read_file(dir / "groupings.csv"));
  const auto& rc = q.simpson_regression();
  auto simpson = q.simpson_table(rc, structure::GroupingScheme::Premium);
  CHECK(simpson.to_csv() == read_file(dir / "simpson/impact_vs_size__premium.csv"));
  CHECK(simpson.to_json_text() == read_file(dir / "simpson/impact_vs_size__premium.json"));
  CHECK(q.scaling_table("", structure::GroupingScheme::Elite).to_csv() == read_file(dir / "scaling/elite.csv"));

  auto one = q.scaling_table("CN-101", std::nullopt);
  CHECK(one.rows.size() == 1);
  CHECK_THROWS_AS(q.scaling_table("CN-000", std::nullopt), StageError);
}

TEST_CASE("reports are deterministic") {
  auto a = test_support::scratch_dir("det_a");
  auto b = test_support::scratch_dir("det_b");
  auto ma = Pipeline(PipelineConfig::load(toy_config())).write_report(a);
  auto mb = Pipeline(PipelineConfig::load(toy_config())).write_report(b);
  CHECK(ma == mb);
  auto manifest = nlohmann::json::parse(ma);
  CHECK(manifest["seed"] == 42);
  for (const auto& out : manifest["outputs"]) {
    auto content = read_file(a / out["path"].get<std::string>());
    CHECK(sha256_hex(content) == out["sha256"].get<std::string>());
  }
}

TEST_CASE("table rendering") {
  Table t{{"a", "b"}, {{std::string("x,y"), 0.5}, {std::int64_t{3}, Cell{}}}, {"note"}, {}};
  CHECK(t.to_csv() == "a,b\n\"x,y\",0.5\n3,\n# note\n");
  auto j = t.to_json();
  CHECK(j["rows"][1]["b"].is_null());
  CHECK(j["notes"][0] == "note");
}

}  // TEST_SUITE
