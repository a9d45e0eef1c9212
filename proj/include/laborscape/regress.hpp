#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "laborscape/dataset.hpp"
#include "laborscape/error.hpp"
#include "laborscape/structure.hpp"

namespace laborscape::regress {

struct RegressionResult {
  std::string group = "pooled";
  double beta = 0.0;
  double intercept = 0.0;
  double p_value = 1.0;  // two-sided, slope = 0
  double r_squared = 0.0;
  double std_error = 0.0;  // of the slope
  std::size_t n = 0;
};

/// Two-sided tail probability of Student's t with `df` degrees of freedom,
/// computed as I_{df/(df+t^2)}(df/2, 1/2).
double t_two_sided_p(double t, double df);

/// Simple least squares y = intercept + beta * x.
/// Throws TooFewPoints (n < 3) or ZeroVariance (constant x).
RegressionResult ols(std::span<const double> xs, std::span<const double> ys);

/// Named per-city columns; a missing entry means the metric is unavailable for
/// that city.
class MetricFrame {
 public:
  explicit MetricFrame(std::vector<std::string> cities);

  const std::vector<std::string>& cities() const noexcept { return cities_; }
  void set(const std::string& name, std::vector<std::optional<double>> values);
  bool has(std::string_view name) const;
  /// Throws UnknownMetric listing the available names.
  const std::vector<std::optional<double>>& column(std::string_view name) const;
  std::vector<std::string> names() const;

 private:
  std::vector<std::string> cities_;
  std::map<std::string, std::vector<std::optional<double>>, std::less<>> columns_;
};

/// Restricts the sample to cities carrying `label` in `grouping`.
struct Subset {
  structure::CityGrouping grouping;
  std::string label;
};

struct RegressionSpec {
  std::string response;
  std::string predictor;
  bool log_x = false;  // base-10
  bool log_y = false;
  std::optional<structure::CityGrouping> grouping;
  std::optional<Subset> subset;

  std::string describe() const;
};

/// A fit that either produced a result or failed for this group only.
struct GroupFit {
  std::string group;
  std::optional<RegressionResult> result;
  std::optional<ErrorCode> error;
  std::string message;
};

/// Pooled fit first, then one fit per group (positive label, then negative).
/// Missing metrics and non-positive values under a log transform abort the
/// whole fit with the offending city named.
std::vector<GroupFit> fit(const RegressionSpec& spec, const MetricFrame& frame);

/// OLS of log10(count) on log10(size).
RegressionResult scaling_exponent(std::span<const double> city_sizes,
                                  std::span<const double> occupation_counts);

struct ScalingRow {
  std::string code;
  GroupFit fit;
};

/// Scaling exponent of every occupation over the cities where it is present;
/// pooled plus per-group rows when a grouping is given.
std::vector<ScalingRow> scaling_exponents(const EmploymentTable& emp, std::span<const double> sizes,
                                          const structure::CityGrouping* grouping);

enum class Verdict { Paradox, NoParadox };
std::string_view to_string(Verdict verdict) noexcept;

struct SimpsonReport {
  std::string spec;
  double significance = 0.05;
  RegressionResult pooled;
  std::vector<RegressionResult> groups;  // exactly two

  bool pooled_not_significant = false;
  bool pooled_sign_differs = false;
  bool groups_significant = false;
  bool opposite_slopes = false;
  Verdict verdict = Verdict::NoParadox;
  std::string explanation;

  static std::string criteria(double significance);
};

/// PARADOX when (pooled p > significance or the pooled slope's sign differs from
/// both group slopes) and both group slopes are significant with opposite signs.
SimpsonReport simpson_check(const RegressionSpec& spec, const MetricFrame& frame,
                            double significance = 0.05);

}  // namespace laborscape::regress
