#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "laborscape/error.hpp"
#include "laborscape/metrics.hpp"
#include "support.hpp"

using namespace laborscape;
using namespace laborscape::metrics;
using test_support::make_emp;

TEST_SUITE("metrics") {

TEST_CASE("impact rate is the employment-weighted mean risk") {
  auto emp = make_emp({{50, 50}, {30, 70}});
  CHECK(impact_rate(emp, RiskTable({{"O1", 0.9}, {"O2", 0.1}}), "C1") == doctest::Approx(0.5));
  CHECK(impact_rate(emp, RiskTable({{"O1", 1.0}, {"O2", 0.0}}), "C2") == doctest::Approx(0.3));
  CHECK(impact_rate(emp, RiskTable({{"O1", 0.0}, {"O2", 0.0}}), "C2") == 0.0);
}

TEST_CASE("zero-count occupations need no risk value") {
  auto emp = make_emp({{10, 0}, {5, 5}});
  CHECK(impact_rate(emp, RiskTable({{"O1", 0.4}}), std::size_t{0}) == doctest::Approx(0.4));
  CHECK_THROWS_AS(impact_rate(emp, RiskTable({{"O1", 0.4}}), std::size_t{1}), Error);
}

TEST_CASE("impact rate properties") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::int64_t> count(0, 500);
  std::uniform_real_distribution<double> prob(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::int64_t> row(6);
    for (auto& c : row) c = count(rng);
    row[0] += 1;
    std::vector<std::int64_t> scaled(row);
    for (auto& c : scaled) c *= 7;
    auto emp = make_emp({row, scaled});
    std::map<std::string, double> r;
    double lo = 1.0;
    double hi = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      double p = prob(rng);
      r["O" + std::to_string(j + 1)] = p;
      if (row[j] > 0) {
        lo = std::min(lo, p);
        hi = std::max(hi, p);
      }
    }
    RiskTable risk(r);
    double e = impact_rate(emp, risk, std::size_t{0});
    CHECK(e >= lo - 1e-12);
    CHECK(e <= hi + 1e-12);
    CHECK(impact_rate(emp, risk, std::size_t{1}) == doctest::Approx(e).epsilon(1e-12));
  }
}

TEST_CASE("normalized entropy") {
  std::vector<std::int64_t> uniform4{10, 10, 10, 10};
  CHECK(normalized_entropy(uniform4) == doctest::Approx(1.0).epsilon(1e-12));
  std::vector<std::int64_t> three_one{3, 1};
  CHECK(normalized_entropy(three_one) == doctest::Approx(0.8112781244591328).epsilon(1e-12));
  std::vector<std::int64_t> single{100};
  CHECK(normalized_entropy(single) == 0.0);
  std::vector<std::int64_t> halves{2, 1, 1};
  CHECK(normalized_entropy(halves) == doctest::Approx(0.946394630357186).epsilon(1e-12));
  std::vector<std::int64_t> with_zero{0, 3, 0, 1};
  CHECK(normalized_entropy(with_zero) == normalized_entropy(three_one));
  std::vector<std::int64_t> uniform95(95, 4);
  CHECK(normalized_entropy(uniform95) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("diversity is invariant to label permutation and scaling") {
  auto emp = make_emp({{5, 9, 1, 30}, {9, 30, 5, 1}, {50, 90, 10, 300}});
  CHECK(job_diversity(emp, 0) == doctest::Approx(job_diversity(emp, 1)).epsilon(1e-14));
  CHECK(job_diversity(emp, 0) == doctest::Approx(job_diversity(emp, 2)).epsilon(1e-14));
}

TEST_CASE("RCA location quotients") {
  auto emp = make_emp({{10, 0}, {10, 20}});
  auto r = rca(emp);
  CHECK(r(0, 0) == doctest::Approx(2.0));
  CHECK(r(0, 1) == 0.0);
  CHECK(r(1, 0) == doctest::Approx((10.0 / 30.0) / 0.5));

  auto r2 = rca(make_emp({{1, 2, 3}, {2, 4, 6}}));
  for (std::size_t j = 0; j < 3; ++j) CHECK(r2(0, j) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("RCA weighted-mean identity on random tables") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::int64_t> count(0, 40);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t cities = 2 + rng() % 5;
    const std::size_t occs = 2 + rng() % 6;
    std::vector<std::vector<std::int64_t>> grid(cities, std::vector<std::int64_t>(occs));
    for (auto& row : grid) {
      for (auto& c : row) c = count(rng);
      row[rng() % occs] += 1;
    }
    auto emp = make_emp(grid);
    auto r = rca(emp);
    for (std::size_t j = 0; j < occs; ++j) {
      if (emp.column_total(j) == 0) continue;
      double sum = 0.0;
      for (std::size_t m = 0; m < cities; ++m) {
        sum += static_cast<double>(emp.row_total(m)) / static_cast<double>(emp.grand_total()) * r(m, j);
      }
      CHECK(std::abs(sum - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("city metric vectors mark missing industry data") {
  auto emp = make_emp({{1, 1}, {3, 1}});
  IndustryTable ind({"C1"}, {{"I1", "I1"}, {"I2", "I2"}}, {5, 5});
  auto v = city_metrics(emp, RiskTable({{"O1", 0.2}, {"O2", 0.6}}), &ind);
  REQUIRE(v.size() == 2);
  CHECK(v[0].impact_rate == doctest::Approx(0.4));
  CHECK(v[0].industry_diversity == doctest::Approx(1.0));
  CHECK(std::isnan(v[1].industry_diversity));
  CHECK(v[1].job_diversity == doctest::Approx(0.8112781244591328));
}

}  // TEST_SUITE
