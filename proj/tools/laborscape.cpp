// laborscape command-line frontend.
//
//   laborscape --config cfg.json report
//   laborscape --config cfg.json metric simpson --group premium
//   LABORSCAPE_LOG=debug laborscape --config cfg.json occspace export --format json --out net.json
//
// Exit codes: 0 success, 1 computation error, 2 input or configuration error.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "laborscape/csv.hpp"
#include "laborscape/pipeline.hpp"

namespace ls = laborscape;
namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  bool json = false;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> threshold;
  std::optional<double> cutoff;

  std::string metric;
  std::string occupation;
  std::string group;
  std::string analysis;
  std::string format = "edgelist";
};

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("laborscape");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("LABORSCAPE_LOG")) {
    std::string level = env;
    if (level == "error" || level == "warn" || level == "info" || level == "debug") {
      spdlog::set_level(spdlog::level::from_str(level));
    } else {
      spdlog::warn("ignoring LABORSCAPE_LOG='{}' (error, warn, info, debug)", level);
    }
  }
}

ls::PipelineConfig load_config(const Options& opt) {
  if (opt.config.empty()) throw ls::StageError("config", ls::Error(ls::ErrorCode::Config, "--config is required"));
  ls::PipelineConfig cfg;
  try {
    cfg = ls::PipelineConfig::load(opt.config);
  } catch (const ls::Error& e) {
    throw ls::StageError("config", e);
  }
  if (opt.seed) cfg.params.seed = *opt.seed;
  if (opt.threshold) cfg.params.proximity_threshold = *opt.threshold;
  if (opt.cutoff) cfg.params.advantage_cutoff = *opt.cutoff;
  return cfg;
}

void emit(const ls::Table& table, bool json) {
  std::cout << (json ? table.to_json_text() : table.to_csv());
}

std::optional<ls::structure::GroupingScheme> scheme_of(const std::string& group) {
  if (group.empty() || group == "none") return std::nullopt;
  try {
    return ls::structure::parse_scheme(group);
  } catch (const ls::Error& e) {
    throw ls::StageError("config", e);
  }
}

ls::Table single_metric(ls::Pipeline& p, const Options& opt) {
  const auto& m = opt.metric;
  if (m == "impact") return p.impact_table();
  if (m == "diversity") return p.diversity_table();
  if (m == "rca") return p.rca_table();
  if (m == "proximity") return p.proximity_table();
  if (m == "distance") return p.distance_table();
  if (m == "scaling") return p.scaling_table(opt.occupation, scheme_of(opt.group));
  if (m == "simpson") {
    const auto& rc = opt.analysis.empty() ? p.simpson_regression() : p.regression(opt.analysis);
    auto scheme = scheme_of(opt.group.empty() ? "premium" : opt.group);
    if (!scheme) {
      throw ls::StageError("regress", ls::Error(ls::ErrorCode::InvalidArgument, "simpson needs --group"));
    }
    return p.simpson_table(rc, *scheme);
  }
  throw ls::StageError("config", ls::Error(ls::ErrorCode::UnknownMetric,
                                           "unknown metric '" + m +
                                               "'; valid: impact, diversity, rca, proximity, scaling, "
                                               "simpson, distance"));
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  Options opt;
  CLI::App app{"Automation impact analysis for regional job markets"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.add_option("--config", opt.config, "Pipeline configuration (JSON)");
  app.add_flag("--json", opt.json, "Machine-readable output");
  app.add_option("--out", opt.out, "Output directory or file");
  app.add_option("--seed", opt.seed, "k-means seed");
  app.add_option("--threshold", opt.threshold, "Proximity threshold for extra network edges");
  app.add_option("--cutoff", opt.cutoff, "RCA advantage cutoff");

  auto* validate = app.add_subcommand("validate", "Check inputs and print the join report");
  auto* crosswalk = app.add_subcommand("crosswalk", "Aggregate votes and write the crosswalk and transferred risk");
  auto* report = app.add_subcommand("report", "Run the full pipeline and write every output");
  auto* metric = app.add_subcommand("metric", "Print one metric table");
  metric->add_option("name", opt.metric, "impact | diversity | rca | proximity | scaling | simpson | distance")
      ->required();
  metric->add_option("--occupation", opt.occupation, "Occupation code (scaling)");
  metric->add_option("--group", opt.group, "Grouping scheme: premium | elite");
  metric->add_option("--analysis", opt.analysis, "Configured regression name (simpson)");
  auto* occspace = app.add_subcommand("occspace", "Occupation space network");
  occspace->require_subcommand(1);
  auto* occ_build = occspace->add_subcommand("build", "Print the network edge table");
  auto* occ_export = occspace->add_subcommand("export", "Write the network to --out");
  occ_export->add_option("--format", opt.format, "edgelist | graph-xml | json");
  auto* cluster = app.add_subcommand("cluster", "Print premium and elite city groupings");
  auto* regress = app.add_subcommand("regress", "Print configured regressions");
  regress->add_option("--analysis", opt.analysis, "Only this configured regression");
  regress->add_option("--group", opt.group, "Only this grouping scheme");

  for (auto* sub : {validate, crosswalk, report, metric, occspace, occ_build, occ_export, cluster, regress}) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    ls::Pipeline p(load_config(opt));
    if (*validate) {
      p.risk();
      emit(p.join_table(), opt.json);
    } else if (*crosswalk) {
      fs::path out = opt.out.empty() ? p.config().output_dir / "crosswalk" : fs::path(opt.out);
      for (const auto& path : p.write_crosswalk(out)) std::cout << path.string() << '\n';
    } else if (*report) {
      fs::path out = opt.out.empty() ? p.config().output_dir : fs::path(opt.out);
      auto manifest = p.write_report(out);
      if (opt.json) {
        std::cout << manifest;
      } else {
        std::cout << (out / "manifest.json").string() << '\n';
      }
    } else if (*metric) {
      emit(single_metric(p, opt), opt.json);
    } else if (*occ_build) {
      emit(p.network_edges_table(), opt.json);
    } else if (*occ_export) {
      if (opt.out.empty()) {
        throw ls::StageError("config", ls::Error(ls::ErrorCode::Config, "occspace export needs --out"));
      }
      ls::occspace::ExportFormat format;
      try {
        format = ls::occspace::parse_export_format(opt.format);
      } catch (const ls::Error& e) {
        throw ls::StageError("config", e);
      }
      const auto& net = p.network();
      const auto& cl = p.closeness();
      const auto& risk = p.risk();
      try {
        for (const auto& path : ls::occspace::export_network(net, cl, risk, opt.out, format)) {
          std::cout << path.string() << '\n';
        }
      } catch (const ls::Error& e) {
        throw ls::StageError("report", e);
      }
    } else if (*cluster) {
      emit(p.grouping_table(), opt.json);
    } else if (*regress) {
      if (opt.analysis.empty()) {
        emit(p.all_regressions_table(), opt.json);
      } else {
        const auto& rc = p.regression(opt.analysis);
        emit(p.regression_table(rc, scheme_of(opt.group)), opt.json);
      }
    }
  } catch (const ls::StageError& e) {
    std::cerr << "laborscape: " << e.what() << '\n';
    return ls::is_input_error(e.code()) ? 2 : 1;
  } catch (const ls::Error& e) {
    std::cerr << "laborscape: " << e.what() << '\n';
    return ls::is_input_error(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "laborscape: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
