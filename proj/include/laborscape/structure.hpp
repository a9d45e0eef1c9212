#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "laborscape/dataset.hpp"

namespace laborscape::structure {

enum class PcaScaling {
  Covariance,   // mean-centre only
  Correlation,  // mean-centre and divide by column standard deviation
};

struct PcaResult {
  std::vector<std::string> features;
  std::vector<std::string> cities;
  /// components[pc][feature], unit norm, largest-magnitude loading positive.
  std::vector<std::vector<double>> components;
  /// Share of total variance per component, non-increasing.
  std::vector<double> explained_ratio;
  /// scores[city][pc]
  std::vector<std::vector<double>> scores;
};

/// PCA over the rows of `data` (observations x features); eigen-decomposition
/// of the sample covariance (divisor n-1). Equal eigenvalues are ordered by the
/// feature index of their dominant loading.
PcaResult pca_matrix(const std::vector<std::vector<double>>& data, std::size_t n_components,
                     PcaScaling scaling = PcaScaling::Covariance);

/// Converts each city row to employment shares, then runs pca_matrix.
PcaResult pca_industry(const IndustryTable& ind, std::size_t n_components,
                       PcaScaling scaling = PcaScaling::Covariance);

enum class GroupingScheme { Premium, Elite };
std::string_view to_string(GroupingScheme scheme) noexcept;
GroupingScheme parse_scheme(std::string_view name);

/// Two-way city partition. For the premium scheme the labels are
/// "premium"/"non-premium"; for the elite scheme "elite"/"non-elite".
struct CityGrouping {
  GroupingScheme scheme = GroupingScheme::Premium;
  std::vector<std::string> cities;  // sorted by id
  std::vector<std::string> labels;  // aligned with cities
  /// k-means centroids in standardized feature space (premium scheme only),
  /// index 0 = premium.
  std::vector<std::vector<double>> centroids;

  std::string positive_label() const;
  std::string negative_label() const;
  /// Throws UnknownId.
  const std::string& label_of(std::string_view city) const;
  std::size_t group_size(std::string_view label) const;
};

struct KMeansResult {
  std::vector<std::size_t> assignment;
  std::vector<std::vector<double>> centroids;
  double inertia = 0.0;
};

/// Lloyd's algorithm with k-means++ seeding; `restarts` independent runs, the
/// lowest within-cluster sum of squares wins. Deterministic for a given seed.
KMeansResult kmeans(const std::vector<std::vector<double>>& points, std::size_t k,
                    std::uint64_t seed, int restarts = 10);

/// Clusters cities on z-scored (universities, bullet_trains). The cluster whose
/// centroid has the larger coordinate sum is "premium"; ties fall back to the
/// larger centroid norm, then to cluster 0.
CityGrouping kmeans_premium(std::span<const CityAttributes> attrs, std::uint64_t seed,
                            int restarts = 10);

CityGrouping group_by_admin(std::span<const CityAttributes> attrs);

struct EliteLocation {
  std::string name;
  double latitude = 0.0;
  double longitude = 0.0;
};

std::vector<EliteLocation> load_elite_locations(const std::filesystem::path& path);

inline constexpr double kEarthRadiusKm = 6371.0;

double haversine_km(double lat1, double lon1, double lat2, double lon2);

/// Great-circle distance from each city to the closest entry of `elite`.
std::map<std::string, double> distance_to_nearest_elite(std::span<const CityAttributes> attrs,
                                                        std::span<const EliteLocation> elite);

}  // namespace laborscape::structure
