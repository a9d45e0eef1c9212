#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "laborscape/crosswalk.hpp"
#include "laborscape/dataset.hpp"
#include "laborscape/error.hpp"
#include "laborscape/metrics.hpp"
#include "laborscape/occspace.hpp"
#include "laborscape/regress.hpp"
#include "laborscape/structure.hpp"
#include "laborscape/table.hpp"

namespace laborscape {

struct Parameters {
  double advantage_cutoff = 1.0;
  double proximity_threshold = 0.66;
  std::uint64_t seed = 42;
  int restarts = 10;
  double significance = 0.05;
  int crosswalk_threshold = 2;
  int annotators = 3;
  std::optional<double> missing_risk_default;
  std::optional<std::size_t> pca_components;  // all when unset
  structure::PcaScaling pca_scaling = structure::PcaScaling::Covariance;
};

/// One configured regression: response ~ predictor, fitted pooled and per
/// grouping scheme.
struct RegressionConfig {
  std::string name;
  std::string response;
  std::string predictor;
  bool log_x = false;
  bool log_y = false;
  std::vector<structure::GroupingScheme> groupings;
  /// Restrict the sample to one label of a scheme, e.g. {elite, "non-elite"}.
  std::optional<std::pair<structure::GroupingScheme, std::string>> subset;
  bool simpson = false;
};

struct CrosswalkConfig {
  std::filesystem::path votes;
  std::filesystem::path source_risk;
  std::optional<std::filesystem::path> adjudications;
  std::optional<std::filesystem::path> zero_override;
};

struct PipelineConfig {
  std::optional<std::filesystem::path> employment;
  TableSchema employment_schema = TableSchema::Wide;
  std::optional<std::filesystem::path> industry;
  TableSchema industry_schema = TableSchema::Wide;
  std::optional<std::filesystem::path> sector_map;
  std::optional<std::filesystem::path> risk;
  std::optional<std::filesystem::path> attributes;
  std::optional<std::filesystem::path> occupation_labels;
  std::optional<std::filesystem::path> elite_locations;
  std::optional<CrosswalkConfig> crosswalk;
  Parameters params;
  std::vector<RegressionConfig> regressions;
  std::filesystem::path output_dir = "report";

  /// Relative paths resolve against the config file's directory.
  static PipelineConfig load(const std::filesystem::path& path);
  static PipelineConfig from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);

  /// Throws Config when a referenced input path does not exist or a parameter
  /// is out of range.
  void check() const;

  nlohmann::ordered_json parameters_json() const;
};

/// Regressions used when the config does not list any.
std::vector<RegressionConfig> default_regressions(bool with_industry);

/// An Error tagged with the pipeline stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(Verbatim{}, cause.code(), "stage '" + stage + "': " + cause.what()), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Lazily evaluated analysis over one configuration. Every artifact is
/// computed once and shared by the report writer and the single-metric
/// commands.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config);

  const PipelineConfig& config() const noexcept { return config_; }

  // Inputs
  const EmploymentTable& employment();
  const IndustryTable* industry();  // nullptr when not configured
  const IndustryTable* sectors();   // industry aggregated through the sector map
  const std::vector<CityAttributes>& attributes();
  const RiskTable& risk();
  JoinReport join_report();
  /// Only meaningful when a crosswalk is configured.
  const crosswalk::CrosswalkMatrix& crosswalk_matrix();

  // Analyses
  const std::vector<double>& sizes();
  const std::vector<metrics::CityMetricVector>& city_metrics();
  const metrics::RcaMatrix& rca();
  const occspace::ProximityMatrix& proximity();
  const occspace::OccupationNetwork& network();
  const std::vector<double>& closeness();
  const std::vector<std::optional<occspace::CityOverlay>>& overlays();
  const structure::CityGrouping& grouping(structure::GroupingScheme scheme);
  const std::map<std::string, double>* elite_distances();
  const structure::PcaResult* pca();
  const regress::MetricFrame& frame();

  regress::RegressionSpec spec_for(const RegressionConfig& rc,
                                   std::optional<structure::GroupingScheme> scheme);
  const RegressionConfig& regression(std::string_view name) const;
  /// First configured regression flagged for the Simpson check.
  const RegressionConfig& simpson_regression() const;

  // Rendered tables
  Table join_table();
  Table impact_table();
  Table diversity_table();
  Table city_metrics_table();
  Table rca_table();
  Table proximity_table();
  Table distance_table();
  Table grouping_table();
  Table network_edges_table();
  Table positions_table();
  Table closeness_risk_table();
  Table pca_loadings_table();
  Table pca_scores_table();
  Table pca_explained_table();
  Table regression_table(const RegressionConfig& rc, std::optional<structure::GroupingScheme> scheme);
  Table all_regressions_table();
  Table simpson_table(const RegressionConfig& rc, structure::GroupingScheme scheme);
  /// All occupations when `occupation` is empty; pooled rows only without a scheme.
  Table scaling_table(std::string_view occupation, std::optional<structure::GroupingScheme> scheme);

  /// Writes every output plus manifest.json under `out_dir`; returns the
  /// manifest text.
  std::string write_report(const std::filesystem::path& out_dir);

  /// Writes the crosswalk exports (pairs, provenance, transferred risk).
  std::vector<std::filesystem::path> write_crosswalk(const std::filesystem::path& out_dir);

 private:
  template <typename F>
  decltype(auto) stage(const char* name, F&& body);

  PipelineConfig config_;
  std::optional<EmploymentTable> employment_;
  std::optional<std::optional<IndustryTable>> industry_;
  std::optional<std::optional<IndustryTable>> sectors_;
  std::optional<std::vector<CityAttributes>> attributes_;
  std::optional<RiskTable> risk_;
  std::optional<crosswalk::CrosswalkMatrix> crosswalk_;
  std::optional<std::vector<double>> sizes_;
  std::optional<std::vector<metrics::CityMetricVector>> metrics_;
  std::optional<metrics::RcaMatrix> rca_;
  std::optional<occspace::ProximityMatrix> proximity_;
  std::optional<occspace::OccupationNetwork> network_;
  std::optional<std::vector<double>> closeness_;
  std::optional<std::vector<std::optional<occspace::CityOverlay>>> overlays_;
  std::optional<structure::CityGrouping> premium_;
  std::optional<structure::CityGrouping> elite_;
  std::optional<std::optional<std::map<std::string, double>>> distances_;
  std::optional<std::optional<structure::PcaResult>> pca_;
  std::optional<regress::MetricFrame> frame_;
};

std::string_view to_string(TableSchema schema) noexcept;
TableSchema parse_schema(std::string_view name);

}  // namespace laborscape
