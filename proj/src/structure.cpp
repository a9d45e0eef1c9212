#include "laborscape/structure.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <set>

#include <spdlog/spdlog.h>

#include "laborscape/csv.hpp"
#include "laborscape/error.hpp"

namespace laborscape::structure {

namespace {

std::size_t dominant_index(const Eigen::VectorXd& v) {
  std::size_t best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (std::abs(v(i)) > std::abs(v(static_cast<Eigen::Index>(best)))) best = static_cast<std::size_t>(i);
  }
  return best;
}

}  // namespace

PcaResult pca_matrix(const std::vector<std::vector<double>>& data, std::size_t n_components,
                     PcaScaling scaling) {
  const std::size_t n = data.size();
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "PCA needs at least 2 observations");
  const std::size_t p = data.front().size();
  if (p == 0) throw Error(ErrorCode::InvalidArgument, "PCA needs at least 1 feature");
  if (n_components == 0 || n_components > p) {
    throw Error(ErrorCode::InvalidArgument, "n_components must lie in [1, " + std::to_string(p) + "]");
  }

  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < n; ++i) {
    if (data[i].size() != p) throw Error(ErrorCode::InvalidArgument, "ragged PCA input");
    for (std::size_t j = 0; j < p; ++j) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = data[i][j];
    }
  }
  Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;

  Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);
  double max_var = cov.diagonal().maxCoeff();
  if (!(max_var > 1e-24)) {
    throw Error(ErrorCode::DegenerateData, "every feature has zero variance");
  }
  if (scaling == PcaScaling::Correlation) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      double sd = std::sqrt(cov(j, j));
      if (sd > 0.0) x.col(j) /= sd;
    }
    cov = (x.transpose() * x) / static_cast<double>(n - 1);
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::DegenerateData, "eigen-decomposition did not converge");
  }
  Eigen::VectorXd values = solver.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXd vectors = solver.eigenvectors();
  const double total = values.sum();

  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::size_t> dominant(p);
  for (std::size_t k = 0; k < p; ++k) {
    Eigen::VectorXd v = vectors.col(static_cast<Eigen::Index>(k));
    dominant[k] = dominant_index(v);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values(static_cast<Eigen::Index>(a)) > values(static_cast<Eigen::Index>(b));
  });
  // Runs of numerically equal eigenvalues are ordered by dominant feature.
  const double tie_tol = 1e-12 * std::max(total, 1e-300);
  for (std::size_t start = 0; start < p;) {
    std::size_t end = start + 1;
    while (end < p && values(static_cast<Eigen::Index>(order[end - 1])) -
                              values(static_cast<Eigen::Index>(order[end])) <=
                          tie_tol) {
      ++end;
    }
    std::sort(order.begin() + static_cast<std::ptrdiff_t>(start),
              order.begin() + static_cast<std::ptrdiff_t>(end),
              [&](std::size_t a, std::size_t b) { return dominant[a] < dominant[b]; });
    start = end;
  }

  PcaResult result;
  for (std::size_t j = 0; j < p; ++j) result.features.push_back("f" + std::to_string(j + 1));
  result.scores.assign(n, std::vector<double>(n_components, 0.0));
  for (std::size_t c = 0; c < n_components; ++c) {
    auto k = static_cast<Eigen::Index>(order[c]);
    Eigen::VectorXd v = vectors.col(k);
    v.normalize();
    if (v(static_cast<Eigen::Index>(dominant_index(v))) < 0.0) v = -v;
    result.components.emplace_back(v.data(), v.data() + v.size());
    result.explained_ratio.push_back(values(k) / total);
    Eigen::VectorXd s = x * v;
    for (std::size_t i = 0; i < n; ++i) result.scores[i][c] = s(static_cast<Eigen::Index>(i));
  }
  for (std::size_t i = 0; i < n; ++i) result.cities.push_back("row" + std::to_string(i + 1));
  return result;
}

PcaResult pca_industry(const IndustryTable& ind, std::size_t n_components, PcaScaling scaling) {
  if (ind.num_cities() < 2) throw Error(ErrorCode::InvalidArgument, "PCA needs at least 2 cities");
  std::vector<std::vector<double>> shares(ind.num_cities());
  for (std::size_t m = 0; m < ind.num_cities(); ++m) {
    const double total = static_cast<double>(ind.row_total(m));
    for (auto c : ind.row(m)) shares[m].push_back(static_cast<double>(c) / total);
  }
  auto result = pca_matrix(shares, n_components, scaling);
  result.cities = ind.cities();
  result.features.clear();
  for (const auto& k : ind.industries()) result.features.push_back(k.code);
  return result;
}

std::string_view to_string(GroupingScheme scheme) noexcept {
  return scheme == GroupingScheme::Premium ? "premium" : "elite";
}

GroupingScheme parse_scheme(std::string_view name) {
  if (name == "premium") return GroupingScheme::Premium;
  if (name == "elite") return GroupingScheme::Elite;
  throw Error(ErrorCode::InvalidArgument,
              "unknown grouping '" + std::string(name) + "' (premium, elite)");
}

std::string CityGrouping::positive_label() const {
  return scheme == GroupingScheme::Premium ? "premium" : "elite";
}

std::string CityGrouping::negative_label() const {
  return scheme == GroupingScheme::Premium ? "non-premium" : "non-elite";
}

const std::string& CityGrouping::label_of(std::string_view city) const {
  auto it = std::lower_bound(cities.begin(), cities.end(), city);
  if (it == cities.end() || *it != city) {
    throw Error(ErrorCode::UnknownId, "city '" + std::string(city) + "' is not in the " +
                                          std::string(to_string(scheme)) + " grouping");
  }
  return labels[static_cast<std::size_t>(it - cities.begin())];
}

std::size_t CityGrouping::group_size(std::string_view label) const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

namespace {

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

KMeansResult lloyd(const std::vector<std::vector<double>>& points, std::size_t k,
                   std::mt19937_64& rng) {
  const std::size_t n = points.size();
  const std::size_t dim = points.front().size();

  // k-means++ seeding
  std::vector<std::vector<double>> centroids;
  centroids.push_back(points[static_cast<std::size_t>(rng() % n)]);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  while (centroids.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(points[i], centroids.back()));
      total += nearest[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      double target = unit_uniform(rng) * total;
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += nearest[i];
        if (acc > target && nearest[i] > 0.0) {
          pick = i;
          break;
        }
      }
    }
    centroids.push_back(points[pick]);
  }

  std::vector<std::size_t> assignment(n, k);
  for (int iter = 0; iter < 300; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = squared_distance(points[i], centroids[0]);
      for (std::size_t c = 1; c < k; ++c) {
        double d = squared_distance(points[i], centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assignment[i] != best) {
        assignment[i] = best;
        changed = true;
      }
    }
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++sizes[assignment[i]];
      for (std::size_t d = 0; d < dim; ++d) sums[assignment[i]][d] += points[i][d];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] == 0) {
        // Re-seed an empty cluster with the point farthest from its centroid.
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          double d = squared_distance(points[i], centroids[assignment[i]]);
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        centroids[c] = points[far];
        assignment[far] = c;
        changed = true;
        continue;
      }
      for (std::size_t d = 0; d < dim; ++d) {
        centroids[c][d] = sums[c][d] / static_cast<double>(sizes[c]);
      }
    }
    if (!changed) break;
  }

  KMeansResult result{assignment, centroids, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    result.inertia += squared_distance(points[i], centroids[assignment[i]]);
  }
  return result;
}

}  // namespace

KMeansResult kmeans(const std::vector<std::vector<double>>& points, std::size_t k,
                    std::uint64_t seed, int restarts) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  if (restarts < 1) throw Error(ErrorCode::InvalidArgument, "restarts must be >= 1");
  if (points.size() < k) {
    throw Error(ErrorCode::DegenerateClustering, "fewer points than clusters");
  }
  std::set<std::vector<double>> distinct(points.begin(), points.end());
  if (distinct.size() < k) {
    throw Error(ErrorCode::DegenerateClustering, "only " + std::to_string(distinct.size()) +
                                                     " distinct point(s) for k = " + std::to_string(k));
  }
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xFFFFFFFFu),
                      static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(r)};
    std::mt19937_64 rng(seq);
    auto run = lloyd(points, k, rng);
    if (run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

CityGrouping kmeans_premium(std::span<const CityAttributes> attrs, std::uint64_t seed, int restarts) {
  std::vector<const CityAttributes*> sorted;
  for (const auto& a : attrs) sorted.push_back(&a);
  std::sort(sorted.begin(), sorted.end(),
            [](const auto* x, const auto* y) { return x->city < y->city; });
  if (sorted.size() < 2) {
    throw Error(ErrorCode::DegenerateClustering, "k-means needs at least 2 cities");
  }

  std::vector<std::vector<double>> points;
  for (const auto* a : sorted) {
    if (!a->universities || !a->bullet_trains) {
      throw Error(ErrorCode::MissingFeature,
                  "city '" + a->city + "' lacks universities or bullet_trains");
    }
    points.push_back({static_cast<double>(*a->universities), *a->bullet_trains});
  }
  const double n = static_cast<double>(points.size());
  for (std::size_t d = 0; d < 2; ++d) {
    double mean = 0.0;
    for (const auto& p : points) mean += p[d];
    mean /= n;
    double var = 0.0;
    for (const auto& p : points) var += (p[d] - mean) * (p[d] - mean);
    double sd = std::sqrt(var / n);
    for (auto& p : points) p[d] = sd > 0.0 ? (p[d] - mean) / sd : 0.0;
  }

  auto fit = kmeans(points, 2, seed, restarts);
  // The premium cluster is the one sitting higher on the standardized resource
  // axes; ties fall back to the centroid norm, then to cluster 0.
  auto score = [&](std::size_t c) { return fit.centroids[c][0] + fit.centroids[c][1]; };
  auto norm = [&](std::size_t c) { return std::hypot(fit.centroids[c][0], fit.centroids[c][1]); };
  std::size_t premium = 0;
  if (score(1) > score(0) || (score(1) == score(0) && norm(1) > norm(0))) premium = 1;

  CityGrouping g;
  g.scheme = GroupingScheme::Premium;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    g.cities.push_back(sorted[i]->city);
    g.labels.push_back(fit.assignment[i] == premium ? g.positive_label() : g.negative_label());
  }
  g.centroids = {fit.centroids[premium], fit.centroids[1 - premium]};
  return g;
}

CityGrouping group_by_admin(std::span<const CityAttributes> attrs) {
  CityGrouping g;
  g.scheme = GroupingScheme::Elite;
  std::vector<const CityAttributes*> sorted;
  for (const auto& a : attrs) {
    if (!a.elite) throw Error(ErrorCode::MissingFlag, "city '" + a.city + "' has no elite flag");
    sorted.push_back(&a);
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const auto* x, const auto* y) { return x->city < y->city; });
  for (const auto* a : sorted) {
    g.cities.push_back(a->city);
    g.labels.push_back(*a->elite ? g.positive_label() : g.negative_label());
  }
  auto elite = g.group_size(g.positive_label());
  if (elite == 0 || elite == g.cities.size()) {
    spdlog::warn("administrative grouping has an empty group ({} elite of {} cities)", elite,
                 g.cities.size());
  }
  return g;
}

std::vector<EliteLocation> load_elite_locations(const std::filesystem::path& path) {
  auto rows = read_csv_file(path);
  if (rows.empty() || rows[0].fields.size() != 3 || trim(rows[0].fields[0]) != "name" ||
      trim(rows[0].fields[1]) != "lat" || trim(rows[0].fields[2]) != "lon") {
    throw Error(ErrorCode::MalformedRow, path.string() + ": header must be 'name,lat,lon'");
  }
  std::vector<EliteLocation> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != 3) {
      throw Error(ErrorCode::MalformedRow,
                  path.string() + ": line " + std::to_string(row.line) + ": expected 3 fields");
    }
    EliteLocation e{trim(row.fields[0]), parse_double(row.fields[1], row.line, "lat"),
                    parse_double(row.fields[2], row.line, "lon")};
    if (std::abs(e.latitude) > 90.0 || std::abs(e.longitude) > 180.0) {
      throw Error(ErrorCode::OutOfRangeCoordinate,
                  path.string() + ": line " + std::to_string(row.line) + ": '" + e.name + "'");
    }
    out.push_back(std::move(e));
  }
  return out;
}

double haversine_km(double lat1, double lon1, double lat2, double lon2) {
  constexpr double rad = std::numbers::pi / 180.0;
  const double phi1 = lat1 * rad;
  const double phi2 = lat2 * rad;
  const double dphi = (lat2 - lat1) * rad;
  const double dlambda = (lon2 - lon1) * rad;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

std::map<std::string, double> distance_to_nearest_elite(std::span<const CityAttributes> attrs,
                                                        std::span<const EliteLocation> elite) {
  if (elite.empty()) throw Error(ErrorCode::InvalidArgument, "elite location list is empty");
  std::map<std::string, double> out;
  for (const auto& a : attrs) {
    if (!a.latitude || !a.longitude) {
      throw Error(ErrorCode::MissingCoordinates, "city '" + a.city + "' has no coordinates");
    }
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : elite) {
      best = std::min(best, haversine_km(*a.latitude, *a.longitude, e.latitude, e.longitude));
    }
    out[a.city] = best;
  }
  return out;
}

}  // namespace laborscape::structure
