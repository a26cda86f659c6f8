#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "gnnbench/csv.hpp"
#include "gnnbench/graph.hpp"
#include "gnnbench/rng.hpp"

namespace gnnbench {

/// Planted two-community benchmark graph: the first half of the nodes is
/// the positive community, edges appear with p_intra inside a community and
/// p_inter across, and the single node feature is the fraction of positive
/// neighbors, centered at zero, plus Gaussian noise. Centering matters: the
/// models are bias-free, so their decision boundary passes through the
/// origin, and an all-positive feature would leave it unreachable. Isolated
/// nodes get the neutral value 0.
struct PlantedCommunityConfig {
  int n = 400;
  double p_intra = 0.05;
  double p_inter = 0.005;
  double noise_sigma = 0.55;
  std::uint64_t seed = 1;
};

struct PlantedCommunity {
  Graph graph;
  NodeTable table;
};

inline PlantedCommunity make_planted_community(const PlantedCommunityConfig& cfg) {
  if (cfg.n < 4 || cfg.n % 2 != 0)
    throw std::invalid_argument("make_planted_community: n must be even and >= 4");
  PlantedCommunity out;
  const int half = cfg.n / 2;
  out.graph.node_ids.reserve(static_cast<std::size_t>(cfg.n));
  for (int i = 0; i < cfg.n; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "g%04d", i);
    out.graph.node_ids.emplace_back(buf);
  }
  RngStream edge_rng = RngStream::derive(cfg.seed, "planted-edges");
  for (int i = 0; i < cfg.n; ++i)
    for (int j = i + 1; j < cfg.n; ++j) {
      const bool same = (i < half) == (j < half);
      if (edge_rng.next_bernoulli(same ? cfg.p_intra : cfg.p_inter))
        out.graph.edges.push_back({i, j, 1.0});
    }

  out.table.features = Matrix(cfg.n, 1);
  out.table.labels.assign(static_cast<std::size_t>(cfg.n), 0);
  for (int i = 0; i < half; ++i) out.table.labels[static_cast<std::size_t>(i)] = 1;
  const auto nbr = out.graph.neighbor_lists();
  RngStream noise_rng = RngStream::derive(cfg.seed, "planted-noise");
  for (int i = 0; i < cfg.n; ++i) {
    double frac = 0.5;
    if (!nbr[static_cast<std::size_t>(i)].empty()) {
      int pos = 0;
      for (int j : nbr[static_cast<std::size_t>(i)]) pos += out.table.labels[static_cast<std::size_t>(j)];
      frac = static_cast<double>(pos) / static_cast<double>(nbr[static_cast<std::size_t>(i)].size());
    }
    out.table.features(i, 0) = (frac - 0.5) + cfg.noise_sigma * noise_rng.next_normal();
  }
  return out;
}

inline void write_edge_csv(const Graph& graph, const std::string& path) {
  std::string out = "source,target\n";
  for (const Edge& e : graph.edges)
    out += graph.node_ids[static_cast<std::size_t>(e.u)] + ',' +
           graph.node_ids[static_cast<std::size_t>(e.v)] + '\n';
  csv::write_file_atomic(path, out);
}

inline void write_node_csv(const Graph& graph, const NodeTable& table, const std::string& path) {
  if (graph.num_nodes() != table.num_nodes())
    throw std::invalid_argument("write_node_csv: graph/table size mismatch");
  std::string out = "id";
  for (int j = 0; j < table.num_features(); ++j) out += ",feat_" + std::to_string(j + 1);
  out += ",label\n";
  for (int i = 0; i < table.num_nodes(); ++i) {
    out += graph.node_ids[static_cast<std::size_t>(i)];
    for (int j = 0; j < table.num_features(); ++j) out += ',' + csv::fmt_g12(table.features(i, j));
    out += table.labels[static_cast<std::size_t>(i)] ? ",1\n" : ",0\n";
  }
  csv::write_file_atomic(path, out);
}

}  // namespace gnnbench
