// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.
//
//   laborscape_acceptance <path-to-laborscape-cli> <scratch-dir>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "laborscape/crosswalk.hpp"
#include "laborscape/csv.hpp"
#include "laborscape/dataset.hpp"
#include "laborscape/error.hpp"
#include "laborscape/metrics.hpp"
#include "laborscape/occspace.hpp"
#include "laborscape/regress.hpp"
#include "laborscape/structure.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace laborscape;

namespace {

/// Collects failed expectations for one criterion.
struct Check {
  std::vector<std::string> failures;
  std::vector<std::string> notes;  // measured values, printed under the verdict

  void note(const std::string& text) { notes.push_back(text); }

  void expect(bool ok, const std::string& what) {
    if (!ok && failures.size() < 5) failures.push_back(what);
  }
  void near(double got, double want, double tol, const std::string& what) {
    std::ostringstream os;
    os << what << ": got " << format_double(got) << ", want " << format_double(want) << " +- " << tol;
    expect(std::abs(got - want) <= tol, os.str());
  }
};

struct Criterion {
  int id;
  std::string title;
  double budget_seconds;  // 0 = no runtime bound
  std::function<void(Check&)> body;
};

EmploymentTable random_table(std::mt19937_64& rng, std::size_t cities, std::size_t occs) {
  std::uniform_int_distribution<std::int64_t> count(0, 60);
  std::vector<std::vector<std::int64_t>> grid(cities, std::vector<std::int64_t>(occs));
  for (auto& row : grid) {
    for (auto& c : row) c = count(rng) < 15 ? 0 : count(rng);
    row[rng() % occs] += 1;
  }
  return test_support::make_emp(grid);
}

void entropy_suite(Check& c) {
  for (std::size_t n = 2; n <= 100; ++n) {
    std::vector<std::int64_t> uniform(n, 17);
    c.near(metrics::normalized_entropy(uniform), 1.0, 1e-12, "uniform over " + std::to_string(n));
  }
  std::vector<std::int64_t> single{100};
  c.near(metrics::normalized_entropy(single), 0.0, 0.0, "single category");
  std::vector<std::int64_t> three_one{3, 1};
  c.near(metrics::normalized_entropy(three_one), 0.8113, 1e-4, "(3,1)");
}

void rca_identity(Check& c) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    auto emp = random_table(rng, 2 + rng() % 7, 2 + rng() % 7);
    auto r = metrics::rca(emp);
    for (std::size_t j = 0; j < emp.num_occupations(); ++j) {
      if (emp.column_total(j) == 0) continue;
      double sum = 0.0;
      for (std::size_t m = 0; m < emp.num_cities(); ++m) {
        sum += static_cast<double>(emp.row_total(m)) / static_cast<double>(emp.grand_total()) * r(m, j);
      }
      c.near(sum, 1.0, 1e-9, "trial " + std::to_string(trial) + " occupation " + std::to_string(j));
    }
  }
}

void proximity_mst(Check& c) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t occs = 2 + rng() % 6;  // 2..7
    const std::size_t cities = 3 + rng() % 8;
    const double density = 0.2 + 0.6 * unit(rng);
    std::vector<std::vector<bool>> adv(cities, std::vector<bool>(occs));
    std::vector<std::string> names;
    std::vector<OccupationId> ids;
    std::vector<double> values;
    for (std::size_t m = 0; m < cities; ++m) {
      names.push_back("m" + std::to_string(m));
      for (std::size_t j = 0; j < occs; ++j) {
        adv[m][j] = unit(rng) < density;
        values.push_back(adv[m][j] ? 1.0 + unit(rng) : unit(rng) * 0.999);
      }
    }
    for (std::size_t j = 0; j < occs; ++j) ids.push_back({"o" + std::to_string(j), ""});
    metrics::RcaMatrix rca(names, ids, values);

    auto prox = occspace::proximity(rca, 1.0);
    std::vector<oracle::WeightedEdge> edges;
    for (std::size_t i = 0; i < occs; ++i) {
      for (std::size_t j = i + 1; j < occs; ++j) {
        double want = oracle::phi(adv, i, j);
        c.near(prox(i, j), want, 1e-12, "phi trial " + std::to_string(trial));
        c.expect(prox(i, j) == prox(j, i), "phi symmetry");
        if (want > 0.0) edges.push_back({i, j, want});
      }
    }
    auto net = occspace::build_network(prox, 0.66);
    double mst = 0.0;
    for (const auto& e : net.edges()) {
      if (e.tag == occspace::EdgeTag::Mst) mst += e.weight;
    }
    c.near(mst, oracle::max_spanning_forest_weight(occs, edges), 1e-9, "MST weight trial " + std::to_string(trial));
  }
}

void ols_exactness(Check& c) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    double beta = u(rng);
    double alpha = u(rng);
    std::vector<double> xs;
    std::vector<double> ys;
    for (int i = 0; i < 10; ++i) {
      xs.push_back(u(rng) * 10.0);
      ys.push_back(alpha + beta * xs.back());
    }
    auto r = regress::ols(xs, ys);
    c.near(r.beta, beta, 1e-9, "planted slope");
    c.near(r.intercept, alpha, 1e-9, "planted intercept");
  }

  // Permutation oracle: share of shuffles whose |slope| reaches the observed one.
  std::vector<double> xs{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  std::vector<double> ys{3.1, 2.4, 3.8, 2.2, 3.5, 2.9, 2.6, 4.1, 3.0, 3.7, 2.8, 3.9};
  auto fit = regress::ols(xs, ys);
  const double mx = 6.5;
  double sxx = 0.0;
  for (double x : xs) sxx += (x - mx) * (x - mx);
  const double observed = std::abs(fit.beta);
  std::mt19937_64 prng(123456789);
  std::vector<double> perm(ys);
  const int draws = 1'000'000;
  int extreme = 0;
  for (int d = 0; d < draws; ++d) {
    std::shuffle(perm.begin(), perm.end(), prng);
    double sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) sxy += (xs[i] - mx) * perm[i];
    if (std::abs(sxy / sxx) >= observed - 1e-12) ++extreme;
  }
  double perm_p = static_cast<double>(extreme) / draws;
  c.note("t-test p = " + format_double(fit.p_value) + ", permutation p = " + format_double(perm_p) + " (" +
         std::to_string(draws) + " draws)");
  c.near(fit.p_value, perm_p, 0.01, "t-test p vs permutation p");
}

void scaling(Check& c) {
  std::vector<double> sizes{2.1e4, 8.0e4, 3.3e5, 9.9e5, 4.2e6, 1.9e7};
  for (double beta : {0.8, 1.0, 1.2}) {
    std::vector<double> counts;
    for (double s : sizes) counts.push_back(3.0 * std::pow(s, beta));
    c.near(regress::scaling_exponent(sizes, counts).beta, beta, 1e-9, "exponent " + format_double(beta));
  }
}

void simpson(Check& c) {
  // Two groups with planted slopes -0.05 and +0.05 on log10(size), offset so
  // the pooled slope is close to zero.
  std::mt19937_64 rng(31);
  std::normal_distribution<double> noise(0.0, 0.004);
  std::vector<std::string> cities;
  std::vector<std::string> labels;
  std::vector<std::optional<double>> size;
  std::vector<std::optional<double>> impact;
  for (int i = 0; i < 30; ++i) {
    for (bool premium : {true, false}) {
      double lx = 4.5 + 2.5 * i / 29.0;
      cities.push_back((premium ? "p" : "n") + std::to_string(100 + i));
      labels.push_back(premium ? "premium" : "non-premium");
      size.push_back(std::pow(10.0, lx));
      impact.push_back(0.78 + (premium ? -0.05 : 0.05) * (lx - 5.75) + noise(rng));
    }
  }
  structure::CityGrouping g;
  g.scheme = structure::GroupingScheme::Premium;
  std::vector<std::size_t> order(cities.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return cities[a] < cities[b]; });
  for (auto i : order) {
    g.cities.push_back(cities[i]);
    g.labels.push_back(labels[i]);
  }
  regress::MetricFrame frame(cities);
  frame.set("size", size);
  frame.set("impact_rate", impact);
  regress::RegressionSpec spec{"impact_rate", "size", true, false, g, std::nullopt};
  auto rep = regress::simpson_check(spec, frame, 0.05);
  c.note("pooled beta = " + format_double(rep.pooled.beta) + ", p = " + format_double(rep.pooled.p_value) +
         "; group betas " + format_double(rep.groups[0].beta) + " / " + format_double(rep.groups[1].beta) +
         ", p = " + format_double(rep.groups[0].p_value) + " / " + format_double(rep.groups[1].p_value));
  c.expect(rep.verdict == regress::Verdict::Paradox, "verdict is " + std::string(regress::to_string(rep.verdict)));
  c.expect(rep.pooled.p_value > 0.05, "pooled p " + format_double(rep.pooled.p_value));
  c.expect(rep.groups[0].p_value < 0.05 && rep.groups[1].p_value < 0.05, "group p-values");
  c.near(rep.groups[0].beta, -0.05, 0.01, "premium slope");
  c.near(rep.groups[1].beta, 0.05, 0.01, "non-premium slope");
}

void pca(Check& c) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> z;
  std::vector<std::vector<double>> data(20, std::vector<double>(5));
  for (auto& row : data) {
    for (auto& v : row) v = z(rng);
  }
  auto full = structure::pca_matrix(data, 5);
  double total = 0.0;
  for (double r : full.explained_ratio) total += r;
  c.near(total, 1.0, 1e-9, "explained ratios sum");

  std::vector<double> mean(5, 0.0);
  for (const auto& row : data) {
    for (std::size_t f = 0; f < 5; ++f) mean[f] += row[f] / 20.0;
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t f = 0; f < 5; ++f) {
      double rec = 0.0;
      for (std::size_t k = 0; k < 5; ++k) rec += full.scores[i][k] * full.components[k][f];
      worst = std::max(worst, std::abs(rec - (data[i][f] - mean[f])));
    }
  }
  c.expect(worst < 1e-9, "reconstruction error " + format_double(worst));

  auto rank1 = structure::pca_matrix({{1, 1}, {2, 2}, {4, 4}, {7, 7}}, 2);
  c.near(rank1.explained_ratio[0], 1.0, 1e-9, "rank-1 first ratio");
  c.near(rank1.explained_ratio[1], 0.0, 1e-9, "rank-1 second ratio");

  auto cross = structure::pca_matrix({{1, 0}, {-1, 0}, {0, 1}, {0, -1}}, 2);
  c.near(cross.explained_ratio[0], 0.5, 1e-9, "symmetric first ratio");
  c.near(cross.explained_ratio[1], 0.5, 1e-9, "symmetric second ratio");
}

void reference_data(Check& c) {
  auto attrs = load_city_attributes(test_support::source_dir() / "data/reference/cities.csv");
  auto s = summarize_attributes(attrs, "published_impact");
  if (s.mean) c.note("mean published impact = " + format_double(*s.mean) + ", elite = " + std::to_string(s.elite));
  c.expect(s.mean && *s.mean >= 0.75 && *s.mean <= 0.80,
           "mean published impact " + (s.mean ? format_double(*s.mean) : std::string("missing")));
  c.expect(s.elite == 19, "elite count " + std::to_string(s.elite));
  const auto* beijing = find_attributes(attrs, "Beijing");
  c.expect(beijing && beijing->extras.count("published_impact") && beijing->extras.at("published_impact") == 0.6383,
           "Beijing impact reads back as 63.83%");
}

void crosswalk_rules(Check& c) {
  using namespace crosswalk;
  auto agg = aggregate_votes(VoteMatrix({"t"}, {"a", "b", "c", "d"}, {3, 2, 1, 0}), 2);
  c.expect(agg.matrix.matches(0).size() == 2, "row (3,2,1,0) keeps 2 matches");
  c.expect(agg.matrix.tag(0) == RowTag::Consensus, "row (3,2,1,0) is consensus");

  auto low = aggregate_votes(VoteMatrix({"t", "u"}, {"a", "b", "c"}, {1, 1, 1, 0, 1, 0}), 2);
  c.expect(low.adjudication_queue == std::vector<std::string>{"t", "u"}, "rows with all votes <= 1 are queued");

  VoteMatrix votes({"t1", "t2"}, {"s1", "s2"}, {3, 2, 0, 0}, 3);
  auto cw = apply_overrides(aggregate_votes(votes, 2).matrix, {"t2"});
  auto risk = transfer_risk(cw, RiskTable({{"s1", 0.8}, {"s2", 0.4}}), {"t2"});
  c.near(risk.at("t1"), 0.6, 1e-12, "mean of {0.8, 0.4}");
  c.expect(risk.at("t2") == 0.0, "zero-override row yields 0.0");
}

void end_to_end(Check& c, const fs::path& cli, const fs::path& scratch) {
  const auto config = test_support::source_dir() / "data/toy/config.json";
  std::vector<std::string> manifests;
  for (const char* run : {"run_a", "run_b"}) {
    auto out = scratch / run;
    fs::remove_all(out);
    std::string cmd = "\"" + cli.string() + "\" --config \"" + config.string() + "\" --out \"" + out.string() +
                      "\" report > /dev/null";
    int rc = std::system(cmd.c_str());
    c.expect(rc == 0, std::string("report ") + run + " exit status " + std::to_string(rc));
    if (rc != 0) return;
    manifests.push_back(read_file(out / "manifest.json"));
  }
  c.expect(manifests[0] == manifests[1], "manifests differ between runs");
  c.expect(manifests[0].find("\"sha256\"") != std::string::npos, "manifest lists hashes");
}

void centrality_risk(Check& c) {
  // A five-occupation core clique; each core node carries a chain of two
  // periphery occupations. Periphery risk 0.9, core risk 0.2.
  const std::size_t core = 5;
  const std::size_t n = core * 3;
  std::vector<OccupationId> ids;
  for (std::size_t i = 0; i < n; ++i) {
    std::string code = (i < core ? "K" : "P") + std::to_string(i);
    ids.push_back({code, code});
  }
  std::vector<double> phi(n * n, 0.0);
  auto link = [&](std::size_t a, std::size_t b, double w) { phi[a * n + b] = phi[b * n + a] = w; };
  for (std::size_t i = 0; i < n; ++i) phi[i * n + i] = 1.0;
  for (std::size_t a = 0; a < core; ++a) {
    for (std::size_t b = a + 1; b < core; ++b) link(a, b, 0.8);
    link(a, core + a, 0.5);
    link(core + a, 2 * core + a, 0.4);
  }
  auto net = occspace::build_network(occspace::ProximityMatrix(ids, phi), 0.66);
  auto cl = occspace::closeness(net);
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < n; ++i) {
    xs.push_back(cl[i]);
    ys.push_back(net.nodes()[i].code[0] == 'K' ? 0.2 : 0.9);
  }
  auto r = regress::ols(xs, ys);
  c.note("risk ~ closeness: beta = " + format_double(r.beta) + ", p = " + format_double(r.p_value));
  c.expect(r.beta < 0.0, "slope " + format_double(r.beta) + " is not negative");
  c.expect(r.p_value < 0.05, "p-value " + format_double(r.p_value));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: laborscape_acceptance <laborscape-cli> <scratch-dir>\n";
    return 2;
  }
  const fs::path cli = argv[1];
  const fs::path scratch = argv[2];
  fs::create_directories(scratch);

  std::vector<Criterion> criteria{
      {1, "entropy suite", 1.0, entropy_suite},
      {2, "RCA weighted-mean identity", 1.0, rca_identity},
      {3, "proximity and spanning-tree oracle", 30.0, proximity_mst},
      {4, "OLS exactness and permutation p-value", 60.0, ols_exactness},
      {5, "scaling exponents", 0.0, scaling},
      {6, "Simpson paradox detection", 0.0, simpson},
      {7, "PCA spectrum and reconstruction", 0.0, pca},
      {8, "reference data summary", 0.0, reference_data},
      {9, "crosswalk aggregation and transfer", 0.0, crosswalk_rules},
      {10, "end-to-end determinism", 10.0, [&](Check& c) { end_to_end(c, cli, scratch); }},
      {11, "centrality vs risk direction", 0.0, centrality_risk},
  };

  int failed = 0;
  for (const auto& cr : criteria) {
    Check check;
    auto start = std::chrono::steady_clock::now();
    try {
      cr.body(check);
    } catch (const std::exception& e) {
      check.failures.push_back(std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (cr.budget_seconds > 0.0 && secs > cr.budget_seconds) {
      check.failures.push_back("runtime " + format_double(secs) + " s over budget " +
                               format_double(cr.budget_seconds) + " s");
    }
    bool ok = check.failures.empty();
    failed += ok ? 0 : 1;
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.3f s", secs);
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << cr.id << ": " << cr.title << " (" << timing << ")\n";
    for (const auto& n : check.notes) std::cout << "    " << n << '\n';
    for (const auto& f : check.failures) std::cout << "    " << f << '\n';
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
