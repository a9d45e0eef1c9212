#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "laborscape/dataset.hpp"
#include "laborscape/metrics.hpp"

namespace laborscape::occspace {

/// Symmetric occupation x occupation co-advantage proximity with zero diagonal.
class ProximityMatrix {
 public:
  ProximityMatrix(std::vector<OccupationId> occupations, std::vector<double> values);

  const std::vector<OccupationId>& occupations() const noexcept { return occupations_; }
  std::size_t size() const noexcept { return occupations_.size(); }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * size() + j]; }

 private:
  std::vector<OccupationId> occupations_;
  std::vector<double> values_;
};

/// phi(i,j) = min(P(i adv | j adv), P(j adv | i adv)) over cities, where a
/// city is advantaged in an occupation when its RCA >= cutoff.
ProximityMatrix proximity(const metrics::RcaMatrix& rca, double advantage_cutoff = 1.0);

enum class EdgeTag { Mst, Threshold };
std::string_view to_string(EdgeTag tag) noexcept;

struct Edge {
  std::size_t a = 0;  // a < b
  std::size_t b = 0;
  double weight = 0.0;
  EdgeTag tag = EdgeTag::Mst;

  friend bool operator==(const Edge&, const Edge&) = default;
};

class OccupationNetwork {
 public:
  OccupationNetwork(std::vector<OccupationId> nodes, std::vector<Edge> edges);

  const std::vector<OccupationId>& nodes() const noexcept { return nodes_; }
  /// Sorted by (a, b).
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<std::vector<std::size_t>>& adjacency() const noexcept { return adjacency_; }
  std::size_t node_index(std::string_view code) const;  // throws UnknownId
  std::size_t count(EdgeTag tag) const;

 private:
  std::vector<OccupationId> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

/// Maximum spanning forest of the phi > 0 graph (Kruskal; equal weights are
/// taken in lexicographic order of the code pair), plus every other pair with
/// phi > threshold tagged Threshold.
OccupationNetwork build_network(const ProximityMatrix& prox, double threshold = 0.66);

/// Wasserman-Faust closeness on the unweighted network, aligned with nodes():
/// ((r-1)/(n-1)) * ((r-1) / sum of distances to the r-1 reachable nodes).
std::vector<double> closeness(const OccupationNetwork& net);

struct CityOverlay {
  std::string city;
  std::vector<std::string> advantaged;  // occupation codes, network order
  double position = 0.0;                // mean closeness of the advantaged set
};

CityOverlay overlay(const OccupationNetwork& net, const metrics::RcaMatrix& rca,
                    std::span<const double> closeness, std::string_view city,
                    double advantage_cutoff = 1.0);

enum class ExportFormat { Edgelist, GraphXml, Json };
ExportFormat parse_export_format(std::string_view name);

std::string edgelist_text(const OccupationNetwork& net);
std::string nodes_csv(const OccupationNetwork& net, std::span<const double> closeness,
                      const RiskTable& risk);
std::string network_json(const OccupationNetwork& net, std::span<const double> closeness,
                         const RiskTable& risk);
std::string network_graphml(const OccupationNetwork& net, std::span<const double> closeness,
                            const RiskTable& risk);

/// Writes the network; edgelist also writes a `<stem>.nodes.csv` sidecar.
/// Returns the paths written.
std::vector<std::filesystem::path> export_network(const OccupationNetwork& net,
                                                  std::span<const double> closeness,
                                                  const RiskTable& risk,
                                                  const std::filesystem::path& path,
                                                  ExportFormat format);

}  // namespace laborscape::occspace
