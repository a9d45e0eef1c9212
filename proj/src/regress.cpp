#include "laborscape/regress.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include "laborscape/csv.hpp"

namespace laborscape::regress {

double t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw Error(ErrorCode::InvalidArgument, "degrees of freedom must be positive");
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return 0.0;
  const double x = df / (df + t * t);
  return boost::math::ibeta(df / 2.0, 0.5, x);
}

RegressionResult ols(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw Error(ErrorCode::InvalidArgument, "x and y lengths differ");
  }
  const std::size_t n = xs.size();
  if (n < 3) {
    throw Error(ErrorCode::TooFewPoints, "need at least 3 points, got " + std::to_string(n));
  }
  const double nd = static_cast<double>(n);
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= nd;
  my /= nd;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::ZeroVariance, "predictor has zero variance");

  RegressionResult r;
  r.n = n;
  r.beta = sxy / sxx;
  r.intercept = my - r.beta * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = ys[i] - (r.intercept + r.beta * xs[i]);
    sse += e * e;
  }
  r.r_squared = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 0.0;
  const double df = nd - 2.0;
  r.std_error = std::sqrt(sse / df / sxx);
  if (r.std_error > 0.0) {
    r.p_value = t_two_sided_p(r.beta / r.std_error, df);
  } else {
    r.p_value = r.beta == 0.0 ? 1.0 : 0.0;
  }
  return r;
}

MetricFrame::MetricFrame(std::vector<std::string> cities) : cities_(std::move(cities)) {}

void MetricFrame::set(const std::string& name, std::vector<std::optional<double>> values) {
  if (values.size() != cities_.size()) {
    throw Error(ErrorCode::InvalidArgument, "metric '" + name + "' has the wrong length");
  }
  columns_[name] = std::move(values);
}

bool MetricFrame::has(std::string_view name) const { return columns_.find(name) != columns_.end(); }

const std::vector<std::optional<double>>& MetricFrame::column(std::string_view name) const {
  auto it = columns_.find(name);
  if (it == columns_.end()) {
    std::string known;
    for (const auto& [k, _] : columns_) known += (known.empty() ? "" : ", ") + k;
    throw Error(ErrorCode::UnknownMetric,
                "unknown metric '" + std::string(name) + "'; available: " + known);
  }
  return it->second;
}

std::vector<std::string> MetricFrame::names() const {
  std::vector<std::string> out;
  for (const auto& [k, _] : columns_) out.push_back(k);
  return out;
}

std::string RegressionSpec::describe() const {
  auto wrap = [](const std::string& name, bool log) { return log ? "log10(" + name + ")" : name; };
  std::string s = wrap(response, log_y) + " ~ " + wrap(predictor, log_x);
  if (grouping) s += " by " + std::string(structure::to_string(grouping->scheme));
  if (subset) s += " where " + std::string(structure::to_string(subset->grouping.scheme)) + " = " + subset->label;
  return s;
}

namespace {

GroupFit try_ols(std::string group, const std::vector<double>& xs, const std::vector<double>& ys) {
  GroupFit g;
  g.group = std::move(group);
  try {
    auto r = ols(xs, ys);
    r.group = g.group;
    g.result = r;
  } catch (const Error& e) {
    g.error = e.code();
    g.message = e.what();
  }
  return g;
}

}  // namespace

std::vector<GroupFit> fit(const RegressionSpec& spec, const MetricFrame& frame) {
  if (spec.response == spec.predictor) {
    throw Error(ErrorCode::InvalidArgument, "response and predictor must differ");
  }
  const auto& ycol = frame.column(spec.response);
  const auto& xcol = frame.column(spec.predictor);

  struct Point {
    double x, y;
    std::string label;
  };
  std::vector<Point> points;
  for (std::size_t i = 0; i < frame.cities().size(); ++i) {
    const auto& city = frame.cities()[i];
    if (spec.subset && spec.subset->grouping.label_of(city) != spec.subset->label) continue;
    if (!xcol[i] || !ycol[i]) {
      throw Error(ErrorCode::MissingMetric,
                  "city '" + city + "' has no value for '" +
                      (!xcol[i] ? spec.predictor : spec.response) + "'");
    }
    double x = *xcol[i];
    double y = *ycol[i];
    if (spec.log_x) {
      if (!(x > 0.0)) {
        throw Error(ErrorCode::NonPositiveUnderLog, "city '" + city + "': " + spec.predictor +
                                                        " = " + format_double(x));
      }
      x = std::log10(x);
    }
    if (spec.log_y) {
      if (!(y > 0.0)) {
        throw Error(ErrorCode::NonPositiveUnderLog, "city '" + city + "': " + spec.response +
                                                        " = " + format_double(y));
      }
      y = std::log10(y);
    }
    Point p{x, y, {}};
    if (spec.grouping) p.label = spec.grouping->label_of(city);
    points.push_back(std::move(p));
  }

  auto collect = [&](const std::string* label) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& p : points) {
      if (label && p.label != *label) continue;
      xs.push_back(p.x);
      ys.push_back(p.y);
    }
    return std::pair{xs, ys};
  };

  std::vector<GroupFit> out;
  {
    auto [xs, ys] = collect(nullptr);
    out.push_back(try_ols("pooled", xs, ys));
  }
  if (spec.grouping) {
    for (const auto& label : {spec.grouping->positive_label(), spec.grouping->negative_label()}) {
      auto [xs, ys] = collect(&label);
      out.push_back(try_ols(label, xs, ys));
    }
  }
  return out;
}

RegressionResult scaling_exponent(std::span<const double> city_sizes,
                                  std::span<const double> occupation_counts) {
  if (city_sizes.size() != occupation_counts.size()) {
    throw Error(ErrorCode::InvalidArgument, "sizes and counts lengths differ");
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < city_sizes.size(); ++i) {
    if (!(city_sizes[i] > 0.0) || !(occupation_counts[i] > 0.0)) {
      throw Error(ErrorCode::NonPositiveUnderLog,
                  "scaling input " + std::to_string(i) + " is not strictly positive");
    }
    xs.push_back(std::log10(city_sizes[i]));
    ys.push_back(std::log10(occupation_counts[i]));
  }
  return ols(xs, ys);
}

std::vector<ScalingRow> scaling_exponents(const EmploymentTable& emp, std::span<const double> sizes,
                                          const structure::CityGrouping* grouping) {
  if (sizes.size() != emp.num_cities()) {
    throw Error(ErrorCode::InvalidArgument, "one size per city required");
  }
  std::vector<std::string> labels{"pooled"};
  if (grouping) {
    labels.push_back(grouping->positive_label());
    labels.push_back(grouping->negative_label());
  }
  std::vector<ScalingRow> out;
  for (std::size_t j = 0; j < emp.num_occupations(); ++j) {
    for (const auto& label : labels) {
      std::vector<double> s;
      std::vector<double> c;
      for (std::size_t m = 0; m < emp.num_cities(); ++m) {
        if (emp.count(m, j) == 0) continue;
        if (label != "pooled" && grouping->label_of(emp.cities()[m]) != label) continue;
        s.push_back(sizes[m]);
        c.push_back(static_cast<double>(emp.count(m, j)));
      }
      ScalingRow row{emp.occupations()[j].code, GroupFit{label, std::nullopt, std::nullopt, {}}};
      try {
        auto r = scaling_exponent(s, c);
        r.group = label;
        row.fit.result = r;
      } catch (const Error& e) {
        row.fit.error = e.code();
        row.fit.message = e.what();
      }
      out.push_back(std::move(row));
    }
  }
  return out;
}

std::string_view to_string(Verdict verdict) noexcept {
  return verdict == Verdict::Paradox ? "PARADOX" : "NO_PARADOX";
}

std::string SimpsonReport::criteria(double significance) {
  auto s = format_double(significance);
  return "PARADOX iff (pooled p > " + s +
         " or sign(pooled beta) differs from both group betas) and both group p < " + s +
         " and group betas have opposite signs";
}

namespace {

int sign(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

SimpsonReport simpson_check(const RegressionSpec& spec, const MetricFrame& frame,
                            double significance) {
  if (!spec.grouping) {
    throw Error(ErrorCode::InvalidArgument, "Simpson check needs a grouping");
  }
  if (!(significance > 0.0 && significance < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "significance must lie in (0,1)");
  }
  auto fits = fit(spec, frame);
  for (const auto& g : fits) {
    if (g.error) throw Error(*g.error, "group '" + g.group + "': " + g.message);
  }

  SimpsonReport report;
  report.spec = spec.describe();
  report.significance = significance;
  report.pooled = *fits[0].result;
  report.groups = {*fits[1].result, *fits[2].result};

  const auto& a = report.groups[0];
  const auto& b = report.groups[1];
  report.pooled_not_significant = report.pooled.p_value > significance;
  report.pooled_sign_differs =
      sign(report.pooled.beta) != sign(a.beta) && sign(report.pooled.beta) != sign(b.beta);
  report.groups_significant = a.p_value < significance && b.p_value < significance;
  report.opposite_slopes = sign(a.beta) * sign(b.beta) < 0;

  const bool pooled_ok = report.pooled_not_significant || report.pooled_sign_differs;
  if (pooled_ok && report.groups_significant && report.opposite_slopes) {
    report.verdict = Verdict::Paradox;
    report.explanation = "pooled association vanishes while both groups show significant opposite slopes";
  } else {
    report.verdict = Verdict::NoParadox;
    std::vector<std::string> failed;
    if (!pooled_ok) failed.push_back("pooled slope is significant and shares a group's sign");
    if (!report.groups_significant) failed.push_back("not every group slope is significant");
    if (!report.opposite_slopes) failed.push_back("group slopes agree in sign");
    for (std::size_t i = 0; i < failed.size(); ++i) {
      report.explanation += (i ? "; " : "") + failed[i];
    }
  }
  return report;
}

}  // namespace laborscape::regress
