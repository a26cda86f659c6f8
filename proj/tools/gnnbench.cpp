#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gnnbench/checks.hpp"
#include "gnnbench/config.hpp"
#include "gnnbench/feature_prep.hpp"
#include "gnnbench/graph.hpp"
#include "gnnbench/report.hpp"
#include "gnnbench/runner.hpp"
#include "gnnbench/version.hpp"

namespace {

int cmd_run(const std::string& config_path, int threads, bool fill_missing) {
  const gnnbench::ExperimentConfig cfg = gnnbench::parse_config(config_path);
  const gnnbench::RunnerResult result =
      gnnbench::run_experiment(cfg, threads, std::cout, fill_missing);
  std::cout << "runs: " << result.completed << " completed, " << result.skipped << " skipped, "
            << result.failed << " failed\n";
  return result.ok() ? 0 : 1;
}

int cmd_report(const std::string& out_dir) {
  gnnbench::write_reports(out_dir, gnnbench::load_runs(out_dir), std::cout);
  std::cout << "report written to " << out_dir << "\n";
  return 0;
}

int cmd_stats(const std::string& edges, const std::string& nodes, bool fill_missing) {
  const gnnbench::Graph graph = gnnbench::load_edge_csv(edges);
  const gnnbench::NodeTable table = gnnbench::load_node_csv(nodes, graph, fill_missing);
  const gnnbench::GraphStats s = gnnbench::graph_stats(graph, table);
  std::cout << "n_nodes,n_edges,density,avg_degree,pos_nodes,neg_nodes,pos_neg_ratio\n"
            << s.n_nodes << ',' << s.n_edges << ',' << gnnbench::csv::fmt_g12(s.density) << ','
            << gnnbench::csv::fmt_g12(s.avg_degree) << ',' << s.pos_nodes << ',' << s.neg_nodes
            << ',' << gnnbench::csv::fmt_g12(s.pos_neg_ratio) << "\n";
  return 0;
}

int cmd_prep(const std::string& pvalues, const std::string& panel, const std::string& edges,
             const std::string& out, const std::string& transform) {
  const gnnbench::Graph graph = gnnbench::load_edge_csv(edges);
  const auto regions = gnnbench::load_pvalues_csv(pvalues);
  const gnnbench::GenePanel gene_panel = gnnbench::load_panel(panel);
  const gnnbench::NodeTable table = gnnbench::build_node_table(
      regions, gene_panel, graph, gnnbench::transform_from_name(transform));
  gnnbench::export_node_csv(table, graph, out);
  std::cout << "wrote " << out << ": " << table.num_nodes() << " nodes, " << table.positives()
            << " positives, " << table.negatives() << " negatives\n";
  return 0;
}

int cmd_gradcheck(const std::string& model) {
  std::vector<std::string> models;
  if (!model.empty()) models.push_back(model);
  constexpr double kTol = 1e-4;
  bool all_ok = true;
  for (const auto& outcome : gnnbench::run_gradcheck_suite(models)) {
    const auto& r = outcome.report;
    const bool ok = r.max_rel_err < kTol;
    all_ok = all_ok && ok;
    std::printf("%-8s max rel err %.3e over %d entries (worst %s[%d,%d])  %s\n",
                outcome.model.c_str(), r.max_rel_err, r.entries_checked, r.worst_param.c_str(),
                r.worst_row, r.worst_col, ok ? "ok" : "FAIL");
  }
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GNN benchmarking suite: training, metrics, reports"};
  app.set_version_flag("--version", gnnbench::kVersion);
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Train all configured models and write reports");
  std::string run_config;
  int threads = 1;
  bool run_fill = false;
  run_cmd->add_option("config", run_config, "experiment config (JSON)")->required();
  run_cmd->add_option("--threads", threads, "worker pool size (default 1)");
  run_cmd->add_flag("--fill-missing", run_fill,
                    "zero-fill graph nodes absent from the node CSV");

  auto* report_cmd = app.add_subcommand("report", "Rebuild reports from completed run CSVs");
  std::string report_dir;
  report_cmd->add_option("output_dir", report_dir, "experiment output directory")->required();

  auto* stats_cmd = app.add_subcommand("stats", "Print dataset statistics as one CSV row");
  std::string stats_edges, stats_nodes;
  bool stats_fill = false;
  stats_cmd->add_option("--edges", stats_edges, "edge CSV")->required();
  stats_cmd->add_option("--nodes", stats_nodes, "node CSV")->required();
  stats_cmd->add_flag("--fill-missing", stats_fill,
                      "zero-fill graph nodes absent from the node CSV");

  auto* prep_cmd = app.add_subcommand("prep", "Build a node CSV from p-values and a gene panel");
  std::string prep_pvalues, prep_panel, prep_edges, prep_out, prep_transform = "neglog10";
  prep_cmd->add_option("--pvalues", prep_pvalues, "region p-value CSV")->required();
  prep_cmd->add_option("--panel", prep_panel, "driver gene panel, one per line")->required();
  prep_cmd->add_option("--edges", prep_edges, "edge CSV")->required();
  prep_cmd->add_option("--out", prep_out, "node CSV to write")->required();
  prep_cmd->add_option("--transform", prep_transform, "feature transform: raw|neglog10");

  auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference check of model gradients");
  std::string grad_model;
  grad_cmd->add_option("--model", grad_model, "check a single architecture");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*run_cmd) return cmd_run(run_config, threads, run_fill);
    if (*report_cmd) return cmd_report(report_dir);
    if (*stats_cmd) return cmd_stats(stats_edges, stats_nodes, stats_fill);
    if (*prep_cmd) return cmd_prep(prep_pvalues, prep_panel, prep_edges, prep_out, prep_transform);
    if (*grad_cmd) return cmd_gradcheck(grad_model);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
