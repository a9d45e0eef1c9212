#include <doctest.h>

#include <random>

#include "laborscape/crosswalk.hpp"
#include "laborscape/error.hpp"
#include "support.hpp"

using namespace laborscape;
using namespace laborscape::crosswalk;

namespace {

VoteMatrix one_row(std::vector<int> votes) {
  std::vector<std::string> sources;
  for (std::size_t k = 0; k < votes.size(); ++k) sources.push_back("k" + std::to_string(k + 1));
  return VoteMatrix({"t1"}, sources, votes);
}

std::vector<int> row_bits(const CrosswalkMatrix& cw, std::size_t row = 0) {
  std::vector<int> out;
  for (std::size_t k = 0; k < cw.sources().size(); ++k) out.push_back(cw.matched(row, k) ? 1 : 0);
  return out;
}

}  // namespace

TEST_SUITE("crosswalk") {

TEST_CASE("majority votes become consensus matches") {
  auto agg = aggregate_votes(one_row({3, 2, 1, 0}), 2);
  CHECK(row_bits(agg.matrix) == std::vector<int>{1, 1, 0, 0});
  CHECK(agg.matrix.tag(0) == RowTag::Consensus);
  CHECK(agg.adjudication_queue.empty());
}

TEST_CASE("rows without a majority are queued and left empty") {
  for (auto votes : {std::vector<int>{1, 1, 1, 0}, std::vector<int>{0, 0, 0, 0}}) {
    auto agg = aggregate_votes(one_row(votes), 2);
    CHECK(row_bits(agg.matrix) == std::vector<int>{0, 0, 0, 0});
    CHECK(agg.matrix.tag(0) == RowTag::Pending);
    CHECK(agg.adjudication_queue == std::vector<std::string>{"t1"});
  }
}

TEST_CASE("resolving pending rows") {
  auto pending = aggregate_votes(one_row({0, 0, 0, 0, 0, 0, 0}), 2).matrix;

  auto single = resolve(pending, "t1", {"k7"});
  CHECK(row_bits(single) == std::vector<int>{0, 0, 0, 0, 0, 0, 1});
  CHECK(single.tag(0) == RowTag::Adjudicated);

  auto pair = resolve(pending, "t1", {"k1", "k2"});
  CHECK(row_bits(pair) == std::vector<int>{1, 1, 0, 0, 0, 0, 0});
  CHECK(pair.tag(0) == RowTag::Adjudicated);
  CHECK(pair.pending().empty());

  auto consensus = aggregate_votes(one_row({3, 0}), 2).matrix;
  try {
    resolve(consensus, "t1", {"k2"});
    FAIL("consensus row resolved");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RowNotPending);
  }
  try {
    resolve(pending, "t1", {"nope"});
    FAIL("unknown source accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownSourceId);
  }
}

TEST_CASE("risk transfer averages matched sources") {
  VoteMatrix votes({"t1", "t2", "t3"}, {"s1", "s2", "s3"}, {3, 2, 0, 0, 0, 3, 0, 0, 0}, 3);
  auto cw = apply_overrides(aggregate_votes(votes, 2).matrix, {"t3"});
  RiskTable src({{"s1", 0.8}, {"s2", 0.4}, {"s3", 0.73}});
  auto risk = transfer_risk(cw, src, {"t3"});
  CHECK(risk.at("t1") == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(risk.at("t2") == 0.73);
  CHECK(risk.at("t3") == 0.0);
}

TEST_CASE("transfer refuses unresolved rows and missing source risk") {
  VoteMatrix votes({"t1", "t2"}, {"s1", "s2"}, {3, 0, 1, 1}, 3);
  auto cw = aggregate_votes(votes, 2).matrix;
  RiskTable src({{"s1", 0.5}, {"s2", 0.5}});
  try {
    transfer_risk(cw, src, {});
    FAIL("pending row transferred");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnresolvedRow);
  }
  auto resolved = resolve(cw, "t2", {"s2"});
  try {
    transfer_risk(resolved, RiskTable({{"s1", 0.5}}), {});
    FAIL("missing source risk ignored");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingSourceRisk);
  }
}

TEST_CASE("properties on random vote matrices") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> vote(0, 3);
  std::uniform_real_distribution<double> prob(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t nt = 4;
    const std::size_t ns = 5;
    std::vector<std::string> targets{"t1", "t2", "t3", "t4"};
    std::vector<std::string> sources{"s1", "s2", "s3", "s4", "s5"};
    std::vector<int> v(nt * ns);
    for (auto& x : v) x = vote(rng);
    auto base = aggregate_votes(VoteMatrix(targets, sources, v), 2).matrix;

    // Monotone: raising one vote never removes a match.
    auto raised = v;
    std::size_t cell = rng() % raised.size();
    raised[cell] = std::min(3, raised[cell] + 1);
    auto up = aggregate_votes(VoteMatrix(targets, sources, raised), 2).matrix;
    for (std::size_t t = 0; t < nt; ++t) {
      for (std::size_t s = 0; s < ns; ++s) {
        if (base.matched(t, s)) CHECK(up.matched(t, s));
      }
    }

    // Permuting source columns permutes the output columns.
    std::vector<std::size_t> perm{4, 2, 0, 3, 1};
    std::vector<std::string> psources;
    std::vector<int> pv(nt * ns);
    for (std::size_t s = 0; s < ns; ++s) psources.push_back(sources[perm[s]]);
    for (std::size_t t = 0; t < nt; ++t) {
      for (std::size_t s = 0; s < ns; ++s) pv[t * ns + s] = v[t * ns + perm[s]];
    }
    auto permuted = aggregate_votes(VoteMatrix(targets, psources, pv), 2).matrix;
    for (std::size_t t = 0; t < nt; ++t) {
      for (std::size_t s = 0; s < ns; ++s) CHECK(permuted.matched(t, s) == base.matched(t, perm[s]));
    }

    // Transferred risk stays inside [0,1].
    std::map<std::string, double> src;
    for (const auto& s : sources) src[s] = prob(rng);
    auto pending = base.pending();
    std::set<std::string> override_rows(pending.begin(), pending.end());
    auto cw = apply_overrides(base, override_rows);
    auto transferred = transfer_risk(cw, RiskTable(src), override_rows);
    for (const auto& [code, p] : transferred.values()) {
      CHECK(p >= 0.0);
      CHECK(p <= 1.0);
    }
  }
}

TEST_CASE("vote files and exports") {
  auto votes = parse_votes(
      "target_code,source_code,votes\n"
      "t1,s1,3\n"
      "t1,s2,1\n"
      "t2,s2,1\n"
      "t3,,0\n");
  CHECK(votes.targets() == std::vector<std::string>{"t1", "t2", "t3"});
  auto agg = aggregate_votes(votes, 2);
  CHECK(agg.adjudication_queue == std::vector<std::string>{"t2", "t3"});
  auto cw = resolve(agg.matrix, "t2", {"s2"});
  cw = apply_overrides(cw, {"t3"});
  CHECK(to_crosswalk_csv(cw) == "target_code,source_code\nt1,s1\nt2,s2\n");
  CHECK(to_provenance_csv(cw) == "target_code,tag\nt1,consensus\nt2,adjudicated\nt3,override\n");
  CHECK_THROWS_AS(parse_votes("target_code,source_code,votes\nt1,s1,4\n"), Error);
}

}  // TEST_SUITE
