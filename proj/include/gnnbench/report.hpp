#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gnnbench/config.hpp"
#include "gnnbench/csv.hpp"
#include "gnnbench/metrics.hpp"
#include "gnnbench/rng.hpp"
#include "gnnbench/svg.hpp"

namespace gnnbench {

/// Three-decimal formatting with half-away-from-zero rounding on the
/// decimal expansion, so 0.8075 renders as "0.808" even though the nearest
/// double sits a hair below the midpoint. Matches the published tables.
inline std::string fmt3(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", v);
  std::string s(buf);
  const bool neg = !s.empty() && s[0] == '-';
  if (neg) s.erase(0, 1);
  const std::size_t dot = s.find('.');
  std::string digits = s.substr(0, dot) + s.substr(dot + 1, 3);
  if (s[dot + 4] >= '5') {
    int i = static_cast<int>(digits.size()) - 1;
    for (; i >= 0; --i) {
      if (digits[static_cast<std::size_t>(i)] == '9') {
        digits[static_cast<std::size_t>(i)] = '0';
      } else {
        ++digits[static_cast<std::size_t>(i)];
        break;
      }
    }
    if (i < 0) digits.insert(digits.begin(), '1');
  }
  std::string out = digits.substr(0, digits.size() - 3) + "." + digits.substr(digits.size() - 3);
  if (neg && out.find_first_not_of("0.") != std::string::npos) out.insert(out.begin(), '-');
  return out;
}

/// "epoch, mean ± std" as printed in the benchmark figures; the std part is
/// omitted for single-replicate aggregates.
inline std::string best_cell(const ModelAggregate& agg) {
  std::string out = std::to_string(agg.best_epoch) + ", " + fmt3(agg.best_bacc.mean);
  if (agg.best_bacc.std_dev) out += " \xC2\xB1 " + fmt3(*agg.best_bacc.std_dev);
  return out;
}

/// Run CSVs for one experiment directory, loaded in config order so output
/// never depends on directory iteration order. Missing files are counted,
/// not fatal; stale files (wrong epoch count) are.
struct LoadedRuns {
  ExperimentConfig cfg;
  std::vector<std::pair<std::string, std::vector<RunSeries>>> by_model;
  int missing = 0;
};

inline std::string run_csv_path(const std::string& out_dir, const std::string& model,
                                std::uint64_t seed) {
  return out_dir + "/runs/" + model + "_" + std::to_string(seed) + ".csv";
}

inline LoadedRuns load_runs(const std::string& out_dir) {
  LoadedRuns loaded;
  loaded.cfg = parse_config(out_dir + "/config.resolved.json");
  for (const std::string& model : loaded.cfg.models) {
    std::vector<RunSeries> series;
    for (int rep = 0; rep < loaded.cfg.replicates; ++rep) {
      const std::uint64_t seed = derive_run_seed(loaded.cfg.base_seed, model, rep);
      const std::string path = run_csv_path(out_dir, model, seed);
      if (!std::filesystem::exists(path)) {
        ++loaded.missing;
        continue;
      }
      RunSeries s = load_run_series(path);
      if (s.model != model || s.seed != seed)
        throw std::runtime_error("load_runs: " + path + ": file content does not match its name");
      if (static_cast<int>(s.epochs.size()) != loaded.cfg.epochs)
        throw std::runtime_error("load_runs: " + path + ": epoch count " +
                                 std::to_string(s.epochs.size()) + " does not match config " +
                                 std::to_string(loaded.cfg.epochs));
      series.push_back(std::move(s));
    }
    loaded.by_model.emplace_back(model, std::move(series));
  }
  return loaded;
}

/// report.csv + report.txt + curves/aggregate.csv + curves/<metric>.svg,
/// all derived from the run CSVs on disk. Returns the number of models that
/// had at least one completed run.
inline int write_reports(const std::string& out_dir, const LoadedRuns& loaded, std::ostream& log) {
  std::vector<ModelAggregate> aggs;
  for (const auto& [model, series] : loaded.by_model) {
    if (series.empty()) {
      log << "report: no completed runs for model '" << model << "', skipping\n";
      continue;
    }
    aggs.push_back(aggregate_model(series));
  }
  if (aggs.empty()) throw std::runtime_error("write_reports: no completed runs in " + out_dir);

  double top = aggs[0].best_bacc.mean;
  for (const ModelAggregate& a : aggs) top = std::max(top, a.best_bacc.mean);

  // report.csv
  std::string csv_out = "model,best_epoch,mean_bacc,std_bacc,flag\n";
  for (const ModelAggregate& a : aggs) {
    csv_out += a.model + ',' + std::to_string(a.best_epoch) + ',' + fmt3(a.best_bacc.mean) + ',';
    if (a.best_bacc.std_dev) csv_out += fmt3(*a.best_bacc.std_dev);
    csv_out += ',';
    if (a.best_bacc.mean == top) csv_out += "best";
    csv_out.push_back('\n');
  }
  csv::write_file_atomic(out_dir + "/report.csv", csv_out);

  // report.txt: aligned table whose best cell reads "epoch, mean ± std"
  std::size_t width = 5;  // "model"
  for (const ModelAggregate& a : aggs) width = std::max(width, a.model.size());
  std::string txt = "model";
  txt.append(width - 5 + 2, ' ');
  txt += "best (epoch, mean \xC2\xB1 std)\n";
  for (const ModelAggregate& a : aggs) {
    txt += a.model;
    txt.append(width - a.model.size() + 2, ' ');
    txt += best_cell(a);
    if (a.best_bacc.mean == top) txt += "  *";
    txt.push_back('\n');
  }
  csv::write_file_atomic(out_dir + "/report.txt", txt);

  // curves/aggregate.csv: models x epochs x metrics rows
  std::string agg_csv = "model,epoch,metric,mean,std,stderr\n";
  for (const ModelAggregate& a : aggs)
    for (std::size_t e = 0; e < a.per_epoch.size(); ++e)
      for (std::size_t m = 0; m < curve_metric_names().size(); ++m) {
        const AggregateCell& cell = a.per_epoch[e][m];
        agg_csv += a.model + ',' + std::to_string(e + 1) + ',' + curve_metric_names()[m] + ',';
        agg_csv += csv::fmt_metric(cell.mean);
        agg_csv += ',';
        if (cell.std_dev) agg_csv += csv::fmt_g12(*cell.std_dev);
        agg_csv += ',';
        if (cell.std_err) agg_csv += csv::fmt_g12(*cell.std_err);
        agg_csv.push_back('\n');
      }
  csv::write_file_atomic(out_dir + "/curves/aggregate.csv", agg_csv);

  // one SVG per metric
  for (std::size_t m = 0; m < curve_metric_names().size(); ++m) {
    std::vector<CurveSeries> curves;
    for (std::size_t k = 0; k < aggs.size(); ++k) {
      CurveSeries c;
      c.label = aggs[k].model;
      c.color = curve_color(k);
      for (const auto& row : aggs[k].per_epoch) {
        c.mean.push_back(row[m].mean);
        c.half.push_back(row[m].std_err.value_or(0.0));
      }
      curves.push_back(std::move(c));
    }
    csv::write_file_atomic(out_dir + "/curves/" + curve_metric_names()[m] + ".svg",
                           render_curve_svg(curve_metric_names()[m], curves));
  }
  return static_cast<int>(aggs.size());
}

}  // namespace gnnbench
