#include "laborscape/metrics.hpp"

#include <cmath>
#include <limits>

#include "laborscape/error.hpp"

namespace laborscape::metrics {

RcaMatrix::RcaMatrix(std::vector<std::string> cities, std::vector<OccupationId> occupations,
                     std::vector<double> values)
    : cities_(std::move(cities)), occupations_(std::move(occupations)), values_(std::move(values)) {
  if (values_.size() != cities_.size() * occupations_.size()) {
    throw Error(ErrorCode::InvalidArgument, "RCA matrix shape does not match ids");
  }
}

std::size_t RcaMatrix::require_city(std::string_view city) const {
  for (std::size_t i = 0; i < cities_.size(); ++i) {
    if (cities_[i] == city) return i;
  }
  throw Error(ErrorCode::UnknownId, "unknown city '" + std::string(city) + "'");
}

double impact_rate(const EmploymentTable& emp, const RiskTable& risk, std::size_t city) {
  auto total = emp.row_total(city);
  if (total <= 0) {
    throw Error(ErrorCode::EmptyCity, "city '" + emp.cities()[city] + "' has no workers");
  }
  double weighted = 0.0;
  auto row = emp.row(city);
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (row[j] == 0) continue;
    weighted += risk.at(emp.occupations()[j].code) * static_cast<double>(row[j]);
  }
  return weighted / static_cast<double>(total);
}

double impact_rate(const EmploymentTable& emp, const RiskTable& risk, std::string_view city) {
  return impact_rate(emp, risk, emp.require_city(city));
}

double normalized_entropy(std::span<const std::int64_t> counts) {
  std::int64_t total = 0;
  std::size_t present = 0;
  for (auto c : counts) {
    if (c < 0) throw Error(ErrorCode::NegativeCount, "negative count in entropy input");
    if (c > 0) {
      total += c;
      ++present;
    }
  }
  if (total == 0) throw Error(ErrorCode::EmptyCity, "entropy of an all-zero row");
  if (present < 2) return 0.0;
  double h = 0.0;
  const double n = static_cast<double>(total);
  for (auto c : counts) {
    if (c == 0) continue;
    double p = static_cast<double>(c) / n;
    h -= p * std::log(p);
  }
  double value = h / std::log(static_cast<double>(present));
  // Rounding can push a uniform row a hair past 1.
  return std::min(1.0, std::max(0.0, value));
}

double job_diversity(const EmploymentTable& emp, std::size_t city) {
  return normalized_entropy(emp.row(city));
}

double industry_diversity(const IndustryTable& ind, std::size_t city) {
  return normalized_entropy(ind.row(city));
}

RcaMatrix rca(const EmploymentTable& emp) {
  if (emp.grand_total() <= 0) throw Error(ErrorCode::EmptyTable, "RCA of an empty table");
  const double grand = static_cast<double>(emp.grand_total());
  std::vector<double> values(emp.num_cities() * emp.num_occupations(), 0.0);
  for (std::size_t m = 0; m < emp.num_cities(); ++m) {
    const double city_total = static_cast<double>(emp.row_total(m));
    for (std::size_t j = 0; j < emp.num_occupations(); ++j) {
      auto national = emp.column_total(j);
      auto x = emp.count(m, j);
      if (national == 0 || x == 0) continue;
      double city_share = static_cast<double>(x) / city_total;
      double national_share = static_cast<double>(national) / grand;
      values[m * emp.num_occupations() + j] = city_share / national_share;
    }
  }
  return RcaMatrix(emp.cities(), emp.occupations(), std::move(values));
}

std::vector<CityMetricVector> city_metrics(const EmploymentTable& emp, const RiskTable& risk,
                                           const IndustryTable* ind) {
  std::vector<CityMetricVector> out;
  out.reserve(emp.num_cities());
  for (std::size_t m = 0; m < emp.num_cities(); ++m) {
    CityMetricVector v;
    v.city = emp.cities()[m];
    v.impact_rate = impact_rate(emp, risk, m);
    v.job_diversity = job_diversity(emp, m);
    v.industry_diversity = std::numeric_limits<double>::quiet_NaN();
    if (ind) {
      if (auto k = ind->city_index(v.city)) v.industry_diversity = industry_diversity(*ind, *k);
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace laborscape::metrics
