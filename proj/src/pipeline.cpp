#include "laborscape/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <spdlog/spdlog.h>

#include "laborscape/csv.hpp"

namespace laborscape {

namespace fs = std::filesystem;
using structure::GroupingScheme;

std::string_view to_string(TableSchema schema) noexcept {
  return schema == TableSchema::Wide ? "wide" : "long";
}

TableSchema parse_schema(std::string_view name) {
  if (name == "wide") return TableSchema::Wide;
  if (name == "long") return TableSchema::Long;
  throw Error(ErrorCode::Config, "unknown table schema '" + std::string(name) + "' (wide, long)");
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

void reject_unknown_keys(const nlohmann::json& obj, std::initializer_list<std::string_view> known,
                         std::string_view where) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw Error(ErrorCode::Config, "unknown key '" + key + "' in " + std::string(where));
    }
  }
}

std::optional<fs::path> optional_path(const nlohmann::json& obj, const char* key,
                                      const fs::path& base) {
  if (!obj.contains(key) || obj[key].is_null()) return std::nullopt;
  fs::path p = obj[key].get<std::string>();
  return p.is_absolute() ? p : base / p;
}

RegressionConfig parse_regression(const nlohmann::json& j) {
  reject_unknown_keys(j, {"name", "response", "predictor", "log_x", "log_y", "groupings", "subset", "simpson"},
                      "regression");
  RegressionConfig rc;
  rc.name = j.at("name").get<std::string>();
  rc.response = j.at("response").get<std::string>();
  rc.predictor = j.at("predictor").get<std::string>();
  rc.log_x = j.value("log_x", false);
  rc.log_y = j.value("log_y", false);
  if (j.contains("groupings")) {
    for (const auto& g : j["groupings"]) rc.groupings.push_back(structure::parse_scheme(g.get<std::string>()));
  }
  if (j.contains("subset")) {
    const auto& s = j["subset"];
    rc.subset = std::pair{structure::parse_scheme(s.at("scheme").get<std::string>()),
                          s.at("label").get<std::string>()};
  }
  rc.simpson = j.value("simpson", false);
  if (rc.name.empty() || rc.name.find_first_of("/\\ ") != std::string::npos) {
    throw Error(ErrorCode::Config, "regression name '" + rc.name + "' must be a plain identifier");
  }
  return rc;
}

nlohmann::ordered_json result_json(const regress::RegressionResult& r) {
  nlohmann::ordered_json j;
  j["group"] = r.group;
  j["beta"] = r.beta;
  j["intercept"] = r.intercept;
  j["p_value"] = r.p_value;
  j["r_squared"] = r.r_squared;
  j["n"] = r.n;
  return j;
}

std::vector<Cell> result_cells(const regress::GroupFit& g) {
  if (!g.result) return {g.group, {}, {}, {}, {}, {}};
  const auto& r = *g.result;
  return {r.group, r.beta, r.intercept, r.p_value, r.r_squared, static_cast<std::int64_t>(r.n)};
}

const std::vector<std::string> kResultColumns{"group", "beta", "intercept", "p_value", "r_squared", "n"};

}  // namespace

PipelineConfig PipelineConfig::from_json(const nlohmann::json& doc, const fs::path& base_dir) {
  PipelineConfig cfg;
  try {
    reject_unknown_keys(doc, {"inputs", "parameters", "regressions", "output"}, "config");
    if (doc.contains("inputs")) {
      const auto& in = doc["inputs"];
      reject_unknown_keys(in,
                          {"employment", "employment_schema", "industry", "industry_schema", "sector_map",
                           "risk", "attributes", "occupation_labels", "elite_locations", "crosswalk"},
                          "inputs");
      cfg.employment = optional_path(in, "employment", base_dir);
      cfg.employment_schema = parse_schema(in.value("employment_schema", "wide"));
      cfg.industry = optional_path(in, "industry", base_dir);
      cfg.industry_schema = parse_schema(in.value("industry_schema", "wide"));
      cfg.sector_map = optional_path(in, "sector_map", base_dir);
      cfg.risk = optional_path(in, "risk", base_dir);
      cfg.attributes = optional_path(in, "attributes", base_dir);
      cfg.occupation_labels = optional_path(in, "occupation_labels", base_dir);
      cfg.elite_locations = optional_path(in, "elite_locations", base_dir);
      if (in.contains("crosswalk") && !in["crosswalk"].is_null()) {
        const auto& cw = in["crosswalk"];
        reject_unknown_keys(cw, {"votes", "source_risk", "adjudications", "zero_override"}, "crosswalk");
        CrosswalkConfig c;
        c.votes = *optional_path(cw, "votes", base_dir);
        c.source_risk = *optional_path(cw, "source_risk", base_dir);
        c.adjudications = optional_path(cw, "adjudications", base_dir);
        c.zero_override = optional_path(cw, "zero_override", base_dir);
        cfg.crosswalk = c;
      }
    }
    if (doc.contains("parameters")) {
      const auto& p = doc["parameters"];
      reject_unknown_keys(p,
                          {"advantage_cutoff", "proximity_threshold", "seed", "restarts", "significance",
                           "crosswalk_threshold", "annotators", "missing_risk_default", "pca_components",
                           "pca_scaling"},
                          "parameters");
      auto& d = cfg.params;
      d.advantage_cutoff = p.value("advantage_cutoff", d.advantage_cutoff);
      d.proximity_threshold = p.value("proximity_threshold", d.proximity_threshold);
      d.seed = p.value("seed", d.seed);
      d.restarts = p.value("restarts", d.restarts);
      d.significance = p.value("significance", d.significance);
      d.crosswalk_threshold = p.value("crosswalk_threshold", d.crosswalk_threshold);
      d.annotators = p.value("annotators", d.annotators);
      if (p.contains("missing_risk_default") && !p["missing_risk_default"].is_null()) {
        d.missing_risk_default = p["missing_risk_default"].get<double>();
      }
      if (p.contains("pca_components") && !p["pca_components"].is_null()) {
        d.pca_components = p["pca_components"].get<std::size_t>();
      }
      auto scaling = p.value("pca_scaling", std::string("covariance"));
      if (scaling == "covariance") {
        d.pca_scaling = structure::PcaScaling::Covariance;
      } else if (scaling == "correlation") {
        d.pca_scaling = structure::PcaScaling::Correlation;
      } else {
        throw Error(ErrorCode::Config, "pca_scaling must be 'covariance' or 'correlation'");
      }
    }
    if (doc.contains("regressions")) {
      for (const auto& r : doc["regressions"]) cfg.regressions.push_back(parse_regression(r));
    } else {
      cfg.regressions = default_regressions(cfg.industry.has_value());
    }
    std::set<std::string> names;
    for (const auto& r : cfg.regressions) {
      if (!names.insert(r.name).second) {
        throw Error(ErrorCode::Config, "regression name '" + r.name + "' repeated");
      }
    }
    if (doc.contains("output")) {
      fs::path out = doc["output"].get<std::string>();
      cfg.output_dir = out.is_absolute() ? out : base_dir / out;
    } else {
      cfg.output_dir = base_dir / "report";
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, std::string("invalid config: ") + e.what());
  }
  return cfg;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, path.string() + ": " + e.what());
  }
  auto base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  return from_json(doc, base);
}

void PipelineConfig::check() const {
  auto need = [](const std::optional<fs::path>& p, const char* what) {
    if (p && !fs::exists(*p)) {
      throw Error(ErrorCode::Config, std::string(what) + " file '" + p->string() + "' does not exist");
    }
  };
  need(employment, "employment");
  need(industry, "industry");
  need(sector_map, "sector_map");
  need(risk, "risk");
  need(attributes, "attributes");
  need(occupation_labels, "occupation_labels");
  need(elite_locations, "elite_locations");
  if (crosswalk) {
    need(crosswalk->votes, "crosswalk votes");
    need(crosswalk->source_risk, "crosswalk source_risk");
    need(crosswalk->adjudications, "crosswalk adjudications");
    need(crosswalk->zero_override, "crosswalk zero_override");
  }
  const auto& p = params;
  auto range = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::Config, std::string("parameter out of range: ") + what);
  };
  range(p.advantage_cutoff > 0.0 && std::isfinite(p.advantage_cutoff), "advantage_cutoff > 0");
  range(p.proximity_threshold >= 0.0 && p.proximity_threshold <= 1.0, "proximity_threshold in [0,1]");
  range(p.restarts >= 1, "restarts >= 1");
  range(p.significance > 0.0 && p.significance < 1.0, "significance in (0,1)");
  range(p.annotators >= 1, "annotators >= 1");
  range(p.crosswalk_threshold >= 1 && p.crosswalk_threshold <= p.annotators,
        "crosswalk_threshold in [1, annotators]");
  range(!p.missing_risk_default || (*p.missing_risk_default >= 0.0 && *p.missing_risk_default <= 1.0),
        "missing_risk_default in [0,1]");
  range(!p.pca_components || *p.pca_components >= 1, "pca_components >= 1");
}

nlohmann::ordered_json PipelineConfig::parameters_json() const {
  nlohmann::ordered_json j;
  j["advantage_cutoff"] = params.advantage_cutoff;
  j["proximity_threshold"] = params.proximity_threshold;
  j["seed"] = params.seed;
  j["restarts"] = params.restarts;
  j["significance"] = params.significance;
  j["crosswalk_threshold"] = params.crosswalk_threshold;
  j["annotators"] = params.annotators;
  j["missing_risk_default"] =
      params.missing_risk_default ? nlohmann::ordered_json(*params.missing_risk_default) : nullptr;
  j["pca_components"] = params.pca_components ? nlohmann::ordered_json(*params.pca_components) : nullptr;
  j["pca_scaling"] = params.pca_scaling == structure::PcaScaling::Covariance ? "covariance" : "correlation";
  return j;
}

std::vector<RegressionConfig> default_regressions(bool with_industry) {
  using enum GroupingScheme;
  std::vector<RegressionConfig> out{
      {"impact_vs_size", "impact_rate", "size", true, false, {Premium, Elite}, std::nullopt, true},
      {"job_diversity_vs_size", "job_diversity", "size", true, false, {Premium, Elite}, std::nullopt, false},
      {"impact_vs_job_diversity", "impact_rate", "job_diversity", false, false, {Premium, Elite}, std::nullopt,
       false},
      {"position_vs_size", "position", "size", true, false, {Premium}, std::nullopt, false},
  };
  if (with_industry) {
    out.push_back({"job_vs_industry_diversity", "job_diversity", "industry_diversity", false, false,
                   {Premium, Elite}, std::nullopt, false});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pipeline

template <typename F>
decltype(auto) Pipeline::stage(const char* name, F&& body) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e);
  } catch (const fs::filesystem_error& e) {
    throw StageError(name, Error(ErrorCode::Io, e.what()));
  }
}

Pipeline::Pipeline(PipelineConfig config) : config_(std::move(config)) {
  stage("config", [&] { config_.check(); });
}

const EmploymentTable& Pipeline::employment() {
  if (!employment_) {
    stage("load", [&] {
      if (!config_.employment) throw Error(ErrorCode::Config, "no employment table configured");
      spdlog::info("loading employment table {}", config_.employment->string());
      auto table = load_employment(*config_.employment, config_.employment_schema);
      if (config_.occupation_labels) table.apply_labels(load_labels(*config_.occupation_labels));
      employment_ = EmploymentTable(sorted_by_id(table));
    });
  }
  return *employment_;
}

const IndustryTable* Pipeline::industry() {
  if (!industry_) {
    stage("load", [&] {
      if (config_.industry) {
        spdlog::info("loading industry table {}", config_.industry->string());
        industry_ = IndustryTable(sorted_by_id(load_industry(*config_.industry, config_.industry_schema)));
      } else {
        industry_.emplace(std::nullopt);
      }
    });
  }
  return industry_->has_value() ? &**industry_ : nullptr;
}

const IndustryTable* Pipeline::sectors() {
  if (!sectors_) {
    const auto* ind = industry();
    stage("load", [&] {
      if (ind && config_.sector_map) {
        sectors_ = aggregate_industries(*ind, load_sector_map(*config_.sector_map));
      } else if (ind) {
        sectors_ = *ind;
      } else {
        sectors_.emplace(std::nullopt);
      }
    });
  }
  return sectors_->has_value() ? &**sectors_ : nullptr;
}

const std::vector<CityAttributes>& Pipeline::attributes() {
  if (!attributes_) {
    stage("load", [&] {
      std::vector<CityAttributes> attrs;
      if (config_.attributes) attrs = load_city_attributes(*config_.attributes);
      std::sort(attrs.begin(), attrs.end(), [](const auto& a, const auto& b) { return a.city < b.city; });
      attributes_ = std::move(attrs);
    });
  }
  return *attributes_;
}

const crosswalk::CrosswalkMatrix& Pipeline::crosswalk_matrix() {
  if (!crosswalk_) {
    stage("crosswalk", [&] {
      if (!config_.crosswalk) throw Error(ErrorCode::Config, "no crosswalk configured");
      const auto& cw = *config_.crosswalk;
      auto votes = crosswalk::load_votes(cw.votes, config_.params.annotators);
      auto agg = crosswalk::aggregate_votes(votes, config_.params.crosswalk_threshold);
      auto matrix = std::move(agg.matrix);
      if (cw.adjudications) {
        for (const auto& [target, chosen] : crosswalk::load_adjudications(*cw.adjudications)) {
          matrix = crosswalk::resolve(matrix, target, chosen);
        }
      }
      if (cw.zero_override) matrix = crosswalk::apply_overrides(matrix, crosswalk::load_code_list(*cw.zero_override));
      for (const auto& code : matrix.pending()) spdlog::warn("crosswalk row '{}' is still pending", code);
      crosswalk_ = std::move(matrix);
    });
  }
  return *crosswalk_;
}

const RiskTable& Pipeline::risk() {
  if (!risk_) {
    std::optional<RiskTable> base;
    if (config_.crosswalk) {
      const auto& matrix = crosswalk_matrix();
      stage("crosswalk", [&] {
        std::set<std::string> overrides;
        if (config_.crosswalk->zero_override) overrides = crosswalk::load_code_list(*config_.crosswalk->zero_override);
        base = crosswalk::transfer_risk(matrix, load_risk(config_.crosswalk->source_risk), overrides);
      });
    } else if (config_.risk) {
      stage("load", [&] { base = load_risk(*config_.risk); });
    }
    const auto& emp = employment();
    stage("validate_join", [&] {
      if (!base) {
        throw Error(ErrorCode::MissingRisk, "no risk table configured (set inputs.risk or inputs.crosswalk)");
      }
      auto report = validate_join(emp, *base, attributes());
      if (!report.missing_risk.empty()) {
        if (!config_.params.missing_risk_default) {
          std::string codes;
          for (const auto& c : report.missing_risk) codes += (codes.empty() ? "" : ", ") + c;
          throw Error(ErrorCode::MissingRisk,
                      std::to_string(report.missing_risk.size()) + " occupation(s) lack a risk value: " + codes +
                          " (set parameters.missing_risk_default to fill them)");
        }
        spdlog::warn("filling {} missing risk value(s) with {}", report.missing_risk.size(),
                     *config_.params.missing_risk_default);
        base = with_default_risk(*base, emp, *config_.params.missing_risk_default);
      }
      for (const auto& city : report.cities_missing_attributes) {
        spdlog::info("city '{}' has no attribute row; size falls back to its employment total", city);
      }
      risk_ = std::move(*base);
    });
  }
  return *risk_;
}

JoinReport Pipeline::join_report() {
  const auto& emp = employment();
  const auto& attrs = attributes();
  return stage("validate_join", [&] {
    if (config_.crosswalk) {
      const auto& matrix = crosswalk_matrix();
      std::set<std::string> overrides;
      if (config_.crosswalk->zero_override) overrides = crosswalk::load_code_list(*config_.crosswalk->zero_override);
      return validate_join(emp, crosswalk::transfer_risk(matrix, load_risk(config_.crosswalk->source_risk), overrides),
                           attrs);
    }
    if (!config_.risk) {
      throw Error(ErrorCode::MissingRisk, "no risk table configured (set inputs.risk or inputs.crosswalk)");
    }
    return validate_join(emp, load_risk(*config_.risk), attrs);
  });
}

const std::vector<double>& Pipeline::sizes() {
  if (!sizes_) {
    const auto& emp = employment();
    const auto& attrs = attributes();
    sizes_ = city_sizes(emp, attrs);
  }
  return *sizes_;
}

const std::vector<metrics::CityMetricVector>& Pipeline::city_metrics() {
  if (!metrics_) {
    const auto& emp = employment();
    const auto& r = risk();
    const auto* ind = industry();
    stage("metrics", [&] { metrics_ = metrics::city_metrics(emp, r, ind); });
  }
  return *metrics_;
}

const metrics::RcaMatrix& Pipeline::rca() {
  if (!rca_) {
    const auto& emp = employment();
    stage("metrics", [&] { rca_ = metrics::rca(emp); });
  }
  return *rca_;
}

const occspace::ProximityMatrix& Pipeline::proximity() {
  if (!proximity_) {
    const auto& r = rca();
    stage("occspace", [&] { proximity_ = occspace::proximity(r, config_.params.advantage_cutoff); });
  }
  return *proximity_;
}

const occspace::OccupationNetwork& Pipeline::network() {
  if (!network_) {
    const auto& prox = proximity();
    stage("occspace", [&] { network_ = occspace::build_network(prox, config_.params.proximity_threshold); });
  }
  return *network_;
}

const std::vector<double>& Pipeline::closeness() {
  if (!closeness_) {
    const auto& net = network();
    closeness_ = occspace::closeness(net);
  }
  return *closeness_;
}

const std::vector<std::optional<occspace::CityOverlay>>& Pipeline::overlays() {
  if (!overlays_) {
    const auto& net = network();
    const auto& cl = closeness();
    const auto& r = rca();
    stage("occspace", [&] {
      std::vector<std::optional<occspace::CityOverlay>> out;
      for (const auto& city : r.cities()) {
        try {
          out.push_back(occspace::overlay(net, r, cl, city, config_.params.advantage_cutoff));
        } catch (const Error& e) {
          if (e.code() != ErrorCode::NoAdvantagedOccupations) throw;
          spdlog::warn("{}", e.what());
          out.push_back(std::nullopt);
        }
      }
      overlays_ = std::move(out);
    });
  }
  return *overlays_;
}

const structure::CityGrouping& Pipeline::grouping(GroupingScheme scheme) {
  auto& slot = scheme == GroupingScheme::Premium ? premium_ : elite_;
  if (!slot) {
    const auto& emp = employment();
    const auto& attrs = attributes();
    stage("structure", [&] {
      std::vector<CityAttributes> used;
      for (const auto& city : emp.cities()) {
        const auto* a = find_attributes(attrs, city);
        if (!a) {
          throw Error(scheme == GroupingScheme::Premium ? ErrorCode::MissingFeature : ErrorCode::MissingFlag,
                      "city '" + city + "' has no attribute row");
        }
        used.push_back(*a);
      }
      if (scheme == GroupingScheme::Premium) {
        slot = structure::kmeans_premium(used, config_.params.seed, config_.params.restarts);
      } else {
        slot = structure::group_by_admin(used);
      }
    });
  }
  return *slot;
}

const std::map<std::string, double>* Pipeline::elite_distances() {
  if (!distances_) {
    const auto& emp = employment();
    const auto& attrs = attributes();
    stage("structure", [&] {
      if (!config_.elite_locations) {
        distances_.emplace(std::nullopt);
        return;
      }
      auto locations = structure::load_elite_locations(*config_.elite_locations);
      std::vector<CityAttributes> used;
      for (const auto& city : emp.cities()) {
        const auto* a = find_attributes(attrs, city);
        if (!a) throw Error(ErrorCode::MissingCoordinates, "city '" + city + "' has no attribute row");
        used.push_back(*a);
      }
      distances_ = structure::distance_to_nearest_elite(used, locations);
    });
  }
  return distances_->has_value() ? &**distances_ : nullptr;
}

const structure::PcaResult* Pipeline::pca() {
  if (!pca_) {
    const auto* sec = sectors();
    stage("structure", [&] {
      if (!sec) {
        pca_.emplace(std::nullopt);
        return;
      }
      auto n = config_.params.pca_components.value_or(sec->num_industries());
      pca_ = structure::pca_industry(*sec, n, config_.params.pca_scaling);
    });
  }
  return pca_->has_value() ? &**pca_ : nullptr;
}

const regress::MetricFrame& Pipeline::frame() {
  if (!frame_) {
    const auto& emp = employment();
    const auto& attrs = attributes();
    const auto& sz = sizes();
    const auto& cm = city_metrics();
    const auto& ov = overlays();
    const auto* dist = elite_distances();
    const std::size_t n = emp.num_cities();

    regress::MetricFrame f(emp.cities());
    std::vector<std::optional<double>> col(n);
    auto put = [&](const std::string& name, auto getter) {
      for (std::size_t i = 0; i < n; ++i) col[i] = getter(i);
      f.set(name, col);
    };
    put("size", [&](std::size_t i) -> std::optional<double> { return sz[i]; });
    put("impact_rate", [&](std::size_t i) -> std::optional<double> { return cm[i].impact_rate; });
    put("job_diversity", [&](std::size_t i) -> std::optional<double> { return cm[i].job_diversity; });
    put("industry_diversity", [&](std::size_t i) -> std::optional<double> {
      if (std::isnan(cm[i].industry_diversity)) return std::nullopt;
      return cm[i].industry_diversity;
    });
    put("position", [&](std::size_t i) -> std::optional<double> {
      if (!ov[i]) return std::nullopt;
      return ov[i]->position;
    });
    if (dist) {
      put("distance_to_elite", [&](std::size_t i) -> std::optional<double> { return dist->at(emp.cities()[i]); });
    }
    auto attr = [&](std::size_t i) { return find_attributes(attrs, emp.cities()[i]); };
    put("universities", [&](std::size_t i) -> std::optional<double> {
      const auto* a = attr(i);
      if (!a || !a->universities) return std::nullopt;
      return static_cast<double>(*a->universities);
    });
    put("bullet_trains", [&](std::size_t i) -> std::optional<double> {
      const auto* a = attr(i);
      if (!a) return std::nullopt;
      return a->bullet_trains;
    });
    std::set<std::string> extras;
    for (const auto& a : attrs) {
      for (const auto& [k, _] : a.extras) extras.insert(k);
    }
    for (const auto& name : extras) {
      if (f.has(name)) continue;
      put(name, [&](std::size_t i) -> std::optional<double> {
        const auto* a = attr(i);
        if (!a) return std::nullopt;
        auto it = a->extras.find(name);
        if (it == a->extras.end()) return std::nullopt;
        return it->second;
      });
    }
    frame_ = std::move(f);
  }
  return *frame_;
}

regress::RegressionSpec Pipeline::spec_for(const RegressionConfig& rc, std::optional<GroupingScheme> scheme) {
  regress::RegressionSpec spec;
  spec.response = rc.response;
  spec.predictor = rc.predictor;
  spec.log_x = rc.log_x;
  spec.log_y = rc.log_y;
  if (scheme) spec.grouping = grouping(*scheme);
  if (rc.subset) spec.subset = regress::Subset{grouping(rc.subset->first), rc.subset->second};
  return spec;
}

const RegressionConfig& Pipeline::regression(std::string_view name) const {
  for (const auto& rc : config_.regressions) {
    if (rc.name == name) return rc;
  }
  std::string known;
  for (const auto& rc : config_.regressions) known += (known.empty() ? "" : ", ") + rc.name;
  throw Error(ErrorCode::UnknownMetric, "no regression named '" + std::string(name) + "'; configured: " + known);
}

const RegressionConfig& Pipeline::simpson_regression() const {
  for (const auto& rc : config_.regressions) {
    if (rc.simpson) return rc;
  }
  throw Error(ErrorCode::Config, "no regression is flagged for the Simpson check");
}

// ---------------------------------------------------------------------------
// Tables

Table Pipeline::join_table() {
  auto report = join_report();
  Table t{{"kind", "id"}, {}, {}, {}};
  auto add = [&](const char* kind, const std::vector<std::string>& ids) {
    for (const auto& id : ids) t.rows.push_back({std::string(kind), id});
  };
  add("missing_risk", report.missing_risk);
  add("unused_risk", report.unused_risk);
  add("city_missing_attributes", report.cities_missing_attributes);
  add("unused_attributes", report.unused_attributes);
  return t;
}

Table Pipeline::impact_table() {
  const auto& cm = city_metrics();
  Table t{{"city", "impact_rate"}, {}, {}, {}};
  for (const auto& v : cm) t.rows.push_back({v.city, v.impact_rate});
  return t;
}

Table Pipeline::diversity_table() {
  const auto& cm = city_metrics();
  Table t{{"city", "job_diversity", "industry_diversity"}, {}, {}, {}};
  for (const auto& v : cm) t.rows.push_back({v.city, v.job_diversity, v.industry_diversity});
  return t;
}

Table Pipeline::city_metrics_table() {
  const auto& cm = city_metrics();
  Table t{{"city", "impact_rate", "job_diversity", "industry_diversity"}, {}, {}, {}};
  for (const auto& v : cm) t.rows.push_back({v.city, v.impact_rate, v.job_diversity, v.industry_diversity});
  return t;
}

Table Pipeline::rca_table() {
  const auto& r = rca();
  Table t{{"city", "code", "rca"}, {}, {}, {}};
  for (std::size_t m = 0; m < r.num_cities(); ++m) {
    for (std::size_t j = 0; j < r.num_occupations(); ++j) {
      t.rows.push_back({r.cities()[m], r.occupations()[j].code, r(m, j)});
    }
  }
  return t;
}

Table Pipeline::proximity_table() {
  const auto& p = proximity();
  Table t{{"code_a", "code_b", "phi"}, {}, {}, {}};
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = i + 1; j < p.size(); ++j) {
      t.rows.push_back({p.occupations()[i].code, p.occupations()[j].code, p(i, j)});
    }
  }
  return t;
}

Table Pipeline::distance_table() {
  const auto* d = elite_distances();
  if (!d) {
    stage("structure", [] {
      throw Error(ErrorCode::Config, "distance needs inputs.elite_locations");
    });
  }
  Table t{{"city", "km"}, {}, {}, {}};
  for (const auto& [city, km] : *d) t.rows.push_back({city, km});
  return t;
}

Table Pipeline::grouping_table() {
  Table t{{"city", "scheme", "label"}, {}, {}, {}};
  for (auto scheme : {GroupingScheme::Premium, GroupingScheme::Elite}) {
    const auto& g = grouping(scheme);
    for (std::size_t i = 0; i < g.cities.size(); ++i) {
      t.rows.push_back({g.cities[i], std::string(structure::to_string(scheme)), g.labels[i]});
    }
  }
  return t;
}

Table Pipeline::network_edges_table() {
  const auto& net = network();
  Table t{{"src", "dst", "weight", "tag"}, {}, {}, {}};
  for (const auto& e : net.edges()) {
    t.rows.push_back({net.nodes()[e.a].code, net.nodes()[e.b].code, e.weight, std::string(occspace::to_string(e.tag))});
  }
  return t;
}

Table Pipeline::positions_table() {
  const auto& ov = overlays();
  const auto& r = rca();
  Table t{{"city", "advantaged", "position"}, {}, {}, {}};
  for (std::size_t i = 0; i < ov.size(); ++i) {
    if (ov[i]) {
      t.rows.push_back({ov[i]->city, static_cast<std::int64_t>(ov[i]->advantaged.size()), ov[i]->position});
    } else {
      t.rows.push_back({r.cities()[i], std::int64_t{0}, Cell{}});
    }
  }
  t.notes.push_back("position = mean closeness of occupations with RCA >= " +
                    format_double(config_.params.advantage_cutoff));
  return t;
}

Table Pipeline::closeness_risk_table() {
  const auto& net = network();
  const auto& cl = closeness();
  const auto& r = risk();
  return stage("regress", [&] {
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t i = 0; i < net.nodes().size(); ++i) {
      if (auto p = r.find(net.nodes()[i].code)) {
        xs.push_back(cl[i]);
        ys.push_back(*p);
      }
    }
    Table t{kResultColumns, {}, {"risk ~ closeness over occupations"}, {}};
    regress::GroupFit g{"pooled", std::nullopt, std::nullopt, {}};
    try {
      g.result = regress::ols(xs, ys);
    } catch (const Error& e) {
      g.error = e.code();
      g.message = e.what();
      t.notes.push_back("pooled: " + g.message);
    }
    t.rows.push_back(result_cells(g));
    return t;
  });
}

Table Pipeline::pca_loadings_table() {
  const auto* p = pca();
  if (!p) stage("structure", [] { throw Error(ErrorCode::Config, "PCA needs inputs.industry"); });
  Table t;
  t.columns.push_back("sector");
  for (std::size_t c = 0; c < p->components.size(); ++c) t.columns.push_back("pc" + std::to_string(c + 1));
  for (std::size_t f = 0; f < p->features.size(); ++f) {
    std::vector<Cell> row{p->features[f]};
    for (const auto& comp : p->components) row.push_back(comp[f]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table Pipeline::pca_scores_table() {
  const auto* p = pca();
  if (!p) stage("structure", [] { throw Error(ErrorCode::Config, "PCA needs inputs.industry"); });
  Table t;
  t.columns.push_back("city");
  for (std::size_t c = 0; c < p->components.size(); ++c) t.columns.push_back("pc" + std::to_string(c + 1));
  for (std::size_t i = 0; i < p->cities.size(); ++i) {
    std::vector<Cell> row{p->cities[i]};
    for (double s : p->scores[i]) row.push_back(s);
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table Pipeline::pca_explained_table() {
  const auto* p = pca();
  if (!p) stage("structure", [] { throw Error(ErrorCode::Config, "PCA needs inputs.industry"); });
  Table t{{"pc", "ratio"}, {}, {}, {}};
  for (std::size_t c = 0; c < p->explained_ratio.size(); ++c) {
    t.rows.push_back({"pc" + std::to_string(c + 1), p->explained_ratio[c]});
  }
  return t;
}

Table Pipeline::regression_table(const RegressionConfig& rc, std::optional<GroupingScheme> scheme) {
  const auto& f = frame();
  auto spec = spec_for(rc, scheme);
  return stage("regress", [&] {
    Table t{kResultColumns, {}, {spec.describe()}, {}};
    for (const auto& g : regress::fit(spec, f)) {
      t.rows.push_back(result_cells(g));
      if (g.error) t.notes.push_back(g.group + ": " + g.message);
    }
    return t;
  });
}

Table Pipeline::all_regressions_table() {
  Table t{{"analysis", "scheme", "group", "beta", "intercept", "p_value", "r_squared", "n"}, {}, {}, {}};
  for (const auto& rc : config_.regressions) {
    std::vector<std::optional<GroupingScheme>> schemes;
    if (rc.groupings.empty()) schemes.push_back(std::nullopt);
    for (auto s : rc.groupings) schemes.push_back(s);
    for (auto s : schemes) {
      auto sub = regression_table(rc, s);
      for (auto& row : sub.rows) {
        std::vector<Cell> full{rc.name, s ? std::string(structure::to_string(*s)) : std::string("none")};
        full.insert(full.end(), row.begin(), row.end());
        t.rows.push_back(std::move(full));
      }
    }
  }
  return t;
}

Table Pipeline::simpson_table(const RegressionConfig& rc, GroupingScheme scheme) {
  const auto& f = frame();
  auto spec = spec_for(rc, scheme);
  return stage("regress", [&] {
    auto report = regress::simpson_check(spec, f, config_.params.significance);
    Table t{kResultColumns, {}, {}, {}};
    regress::GroupFit pooled{"pooled", report.pooled, std::nullopt, {}};
    t.rows.push_back(result_cells(pooled));
    for (const auto& g : report.groups) t.rows.push_back(result_cells({g.group, g, std::nullopt, {}}));
    t.notes.push_back("spec: " + report.spec);
    t.notes.push_back("verdict: " + std::string(regress::to_string(report.verdict)));
    t.notes.push_back("criteria: " + regress::SimpsonReport::criteria(report.significance));
    t.notes.push_back("explanation: " + report.explanation);

    nlohmann::ordered_json doc;
    doc["analysis"] = rc.name;
    doc["scheme"] = std::string(structure::to_string(scheme));
    doc["spec"] = report.spec;
    doc["significance"] = report.significance;
    doc["criteria"] = regress::SimpsonReport::criteria(report.significance);
    doc["pooled"] = result_json(report.pooled);
    doc["groups"] = nlohmann::ordered_json::array();
    for (const auto& g : report.groups) doc["groups"].push_back(result_json(g));
    doc["conditions"] = {{"pooled_not_significant", report.pooled_not_significant},
                         {"pooled_sign_differs", report.pooled_sign_differs},
                         {"groups_significant", report.groups_significant},
                         {"opposite_slopes", report.opposite_slopes}};
    doc["verdict"] = std::string(regress::to_string(report.verdict));
    doc["explanation"] = report.explanation;
    t.document = std::move(doc);
    return t;
  });
}

Table Pipeline::scaling_table(std::string_view occupation, std::optional<GroupingScheme> scheme) {
  const auto& emp = employment();
  const auto& sz = sizes();
  const structure::CityGrouping* g = scheme ? &grouping(*scheme) : nullptr;
  return stage("regress", [&] {
    if (!occupation.empty() && !emp.occupation_index(occupation)) {
      throw Error(ErrorCode::UnknownId, "unknown occupation '" + std::string(occupation) + "'");
    }
    std::vector<std::string> columns{"code"};
    columns.insert(columns.end(), kResultColumns.begin(), kResultColumns.end());
    Table t{columns, {}, {}, {}};
    for (const auto& row : regress::scaling_exponents(emp, sz, g)) {
      if (!occupation.empty() && row.code != occupation) continue;
      std::vector<Cell> cells{row.code};
      auto rest = result_cells(row.fit);
      cells.insert(cells.end(), rest.begin(), rest.end());
      t.rows.push_back(std::move(cells));
    }
    return t;
  });
}

// ---------------------------------------------------------------------------
// Reports

std::vector<fs::path> Pipeline::write_crosswalk(const fs::path& out_dir) {
  const auto& matrix = crosswalk_matrix();
  const auto& r = risk();
  return stage("report", [&] {
    std::vector<fs::path> written{out_dir / "pairs.csv", out_dir / "provenance.csv", out_dir / "risk.csv"};
    write_file_atomic(written[0], crosswalk::to_crosswalk_csv(matrix));
    write_file_atomic(written[1], crosswalk::to_provenance_csv(matrix));
    write_file_atomic(written[2], to_risk_csv(r));
    return written;
  });
}

std::string Pipeline::write_report(const fs::path& out_dir) {
  std::map<std::string, std::string> files;

  if (config_.crosswalk) {
    const auto& matrix = crosswalk_matrix();
    files["crosswalk/pairs.csv"] = crosswalk::to_crosswalk_csv(matrix);
    files["crosswalk/provenance.csv"] = crosswalk::to_provenance_csv(matrix);
  }
  files["risk.csv"] = to_risk_csv(risk());
  files["join_report.csv"] = join_table().to_csv();
  files["city_metrics.csv"] = city_metrics_table().to_csv();
  files["metrics/impact.csv"] = impact_table().to_csv();
  files["metrics/diversity.csv"] = diversity_table().to_csv();
  files["rca.csv"] = rca_table().to_csv();

  files["occspace/proximity.csv"] = proximity_table().to_csv();
  {
    const auto& net = network();
    const auto& cl = closeness();
    const auto& r = risk();
    files["occspace/network.edges"] = occspace::edgelist_text(net);
    files["occspace/network.nodes.csv"] = occspace::nodes_csv(net, cl, r);
    files["occspace/network.json"] = occspace::network_json(net, cl, r);
    files["occspace/network.graphml"] = occspace::network_graphml(net, cl, r);
  }
  files["occspace/positions.csv"] = positions_table().to_csv();
  files["occspace/closeness_risk.csv"] = closeness_risk_table().to_csv();

  files["groupings.csv"] = grouping_table().to_csv();
  if (elite_distances()) files["distance_to_elite.csv"] = distance_table().to_csv();
  if (pca()) {
    files["pca/loadings.csv"] = pca_loadings_table().to_csv();
    files["pca/scores.csv"] = pca_scores_table().to_csv();
    files["pca/explained.csv"] = pca_explained_table().to_csv();
  }

  for (const auto& rc : config_.regressions) {
    if (rc.groupings.empty()) {
      files["regress/" + rc.name + ".csv"] = regression_table(rc, std::nullopt).to_csv();
    }
    for (auto scheme : rc.groupings) {
      std::string stem = rc.name + "__" + std::string(structure::to_string(scheme));
      files["regress/" + stem + ".csv"] = regression_table(rc, scheme).to_csv();
      if (rc.simpson) {
        auto t = simpson_table(rc, scheme);
        files["simpson/" + stem + ".csv"] = t.to_csv();
        files["simpson/" + stem + ".json"] = t.to_json_text();
      }
    }
  }
  for (auto scheme : {GroupingScheme::Premium, GroupingScheme::Elite}) {
    files["scaling/" + std::string(structure::to_string(scheme)) + ".csv"] = scaling_table("", scheme).to_csv();
  }

  return stage("report", [&] {
    nlohmann::ordered_json manifest;
    manifest["tool"] = "laborscape";
    manifest["seed"] = config_.params.seed;
    manifest["parameters"] = config_.parameters_json();
    auto regs = nlohmann::ordered_json::array();
    for (const auto& rc : config_.regressions) {
      regs.push_back({{"name", rc.name}, {"spec", spec_for(rc, std::nullopt).describe()}});
    }
    manifest["regressions"] = regs;
    manifest["outputs"] = nlohmann::ordered_json::array();
    for (const auto& [rel, content] : files) {
      write_file_atomic(out_dir / rel, content);
      manifest["outputs"].push_back(
          {{"path", rel}, {"bytes", content.size()}, {"sha256", sha256_hex(content)}});
    }
    std::string text = manifest.dump(2) + "\n";
    write_file_atomic(out_dir / "manifest.json", text);
    spdlog::info("wrote {} report files to {}", files.size() + 1, out_dir.string());
    return text;
  });
}

}  // namespace laborscape
