#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "gnnbench/config.hpp"
#include "gnnbench/graph.hpp"
#include "gnnbench/models.hpp"
#include "gnnbench/report.hpp"
#include "gnnbench/train.hpp"

namespace gnnbench {

struct RunnerResult {
  int completed = 0;
  int skipped = 0;
  int failed = 0;
  std::vector<std::string> failures;

  bool ok() const { return failed == 0; }
};

/// Loads and prepares one experiment's dataset: edge list, node table,
/// largest connected component, graph context.
struct PreparedData {
  Graph graph;
  NodeTable table;
  GraphContext ctx;
};

inline PreparedData prepare_data(const ExperimentConfig& cfg, bool fill_missing,
                                 std::ostream& log) {
  PreparedData data;
  LoadWarnings edge_warn, node_warn;
  Graph raw = load_edge_csv(cfg.edge_csv, &edge_warn);
  NodeTable raw_table = load_node_csv(cfg.node_csv, raw, fill_missing, &node_warn);
  if (edge_warn.self_loops_dropped)
    log << "load: dropped " << edge_warn.self_loops_dropped << " self-loop rows\n";
  if (edge_warn.duplicates_collapsed)
    log << "load: collapsed " << edge_warn.duplicates_collapsed << " duplicate edges\n";
  if (node_warn.file_nodes_skipped)
    log << "load: skipped " << node_warn.file_nodes_skipped << " node rows absent from graph\n";
  if (node_warn.missing_filled)
    log << "load: filled " << node_warn.missing_filled << " graph nodes with zero features\n";
  auto [graph, table] = largest_connected_component(raw, raw_table);
  if (graph.num_nodes() != raw.num_nodes())
    log << "load: largest component keeps " << graph.num_nodes() << " of " << raw.num_nodes()
        << " nodes\n";
  data.graph = std::move(graph);
  data.table = std::move(table);
  data.ctx = build_graph_context(data.graph);
  return data;
}

/// Executes models x replicates seeded runs over a worker pool, persisting
/// each finished run atomically, then rebuilds the reports from disk.
/// Existing complete run CSVs are skipped (resume); output bytes do not
/// depend on the pool size.
inline RunnerResult run_experiment(const ExperimentConfig& cfg, int threads, std::ostream& log,
                                   bool fill_missing = false) {
  cfg.validate();
  const PreparedData data = prepare_data(cfg, fill_missing, log);
  if (data.table.positives() < 2 || data.table.negatives() < 2)
    throw std::runtime_error("run_experiment: need at least 2 nodes of each class after "
                             "component filtering");

  std::filesystem::create_directories(cfg.output_dir + "/runs");
  std::filesystem::create_directories(cfg.output_dir + "/curves");
  csv::write_file_atomic(cfg.output_dir + "/config.resolved.json", resolved_config_json(cfg));

  struct Task {
    std::string model;
    int replicate;
    std::uint64_t seed;
    std::string path;
  };
  std::vector<Task> todo;
  RunnerResult result;
  for (const std::string& model : cfg.models)
    for (int rep = 0; rep < cfg.replicates; ++rep) {
      Task t{model, rep, derive_run_seed(cfg.base_seed, model, rep), ""};
      t.path = run_csv_path(cfg.output_dir, t.model, t.seed);
      bool have = false;
      if (std::filesystem::exists(t.path)) {
        // complete file: header plus one row per epoch (writes are atomic,
        // so anything else is stale, e.g. from an edited config)
        const auto lines = csv::read_lines(t.path);
        have = static_cast<int>(lines.size()) == cfg.epochs + 1;
      }
      if (have) {
        ++result.skipped;
        log << "skip " << t.model << " seed " << t.seed << " (already complete)\n";
      } else {
        todo.push_back(std::move(t));
      }
    }

  std::mutex mu;
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= todo.size()) return;
      const Task& t = todo[i];
      const auto started = std::chrono::steady_clock::now();
      try {
        RunSeries series = train_one(cfg, t.model, data.ctx, data.table, t.seed);
        csv::write_file_atomic(t.path, run_series_to_csv(series));
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        std::lock_guard<std::mutex> lock(mu);
        ++result.completed;
        log << "done " << t.model << " seed " << t.seed << " (" << static_cast<int>(secs + 0.5)
            << "s)\n";
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(mu);
        ++result.failed;
        result.failures.push_back(t.model + " seed " + std::to_string(t.seed) + ": " + e.what());
        log << "FAILED " << t.model << " seed " << t.seed << ": " << e.what() << "\n";
      }
    }
  };

  const int pool = std::max(1, std::min<int>(threads, static_cast<int>(todo.size())));
  if (pool <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool_threads;
    pool_threads.reserve(static_cast<std::size_t>(pool));
    for (int i = 0; i < pool; ++i) pool_threads.emplace_back(worker);
    for (std::thread& th : pool_threads) th.join();
  }

  if (result.completed + result.skipped > 0) {
    write_reports(cfg.output_dir, load_runs(cfg.output_dir), log);
  } else {
    log << "report: nothing completed, skipping report generation\n";
  }
  return result;
}

}  // namespace gnnbench
