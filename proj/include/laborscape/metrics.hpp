#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "laborscape/dataset.hpp"

namespace laborscape::metrics {

struct CityMetricVector {
  std::string city;
  double impact_rate = 0.0;
  double job_diversity = 0.0;
  double industry_diversity = 0.0;
};

/// Location quotients, city x occupation, same ordering as the source table.
class RcaMatrix {
 public:
  RcaMatrix(std::vector<std::string> cities, std::vector<OccupationId> occupations,
            std::vector<double> values);

  const std::vector<std::string>& cities() const noexcept { return cities_; }
  const std::vector<OccupationId>& occupations() const noexcept { return occupations_; }
  std::size_t num_cities() const noexcept { return cities_.size(); }
  std::size_t num_occupations() const noexcept { return occupations_.size(); }

  double operator()(std::size_t city, std::size_t occupation) const {
    return values_[city * occupations_.size() + occupation];
  }
  std::span<const double> row(std::size_t city) const {
    return {values_.data() + city * occupations_.size(), occupations_.size()};
  }
  std::size_t require_city(std::string_view city) const;

 private:
  std::vector<std::string> cities_;
  std::vector<OccupationId> occupations_;
  std::vector<double> values_;
};

/// Employment-weighted mean computerization probability of one city's jobs.
/// Throws MissingRisk if an occupation with positive count has no risk value.
double impact_rate(const EmploymentTable& emp, const RiskTable& risk, std::size_t city);
double impact_rate(const EmploymentTable& emp, const RiskTable& risk, std::string_view city);

/// Shannon entropy (natural log) of the positive counts, divided by the log of
/// how many counts are positive. Zero-count categories are ignored; a single
/// positive category gives 0.
double normalized_entropy(std::span<const std::int64_t> counts);

double job_diversity(const EmploymentTable& emp, std::size_t city);
double industry_diversity(const IndustryTable& ind, std::size_t city);

/// Balassa form: (x_mj / x_m.) / (x_.j / x_..). Occupations with zero national
/// total get RCA 0 everywhere.
RcaMatrix rca(const EmploymentTable& emp);

/// One vector per employment city. Industry diversity is taken from `ind` when
/// the city is present there, otherwise it is NaN.
std::vector<CityMetricVector> city_metrics(const EmploymentTable& emp, const RiskTable& risk,
                                           const IndustryTable* ind);

}  // namespace laborscape::metrics
