#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gnnbench/csv.hpp"
#include "gnnbench/matrix.hpp"
#include "gnnbench/rng.hpp"
#include "gnnbench/sparse.hpp"

namespace gnnbench {

/// Undirected weighted edge between node indices; stored with u < v.
struct Edge {
  int u = 0;
  int v = 0;
  double w = 1.0;
};

/// Undirected sparse graph. Node identities live in `node_ids`; edges hold
/// indices into it. No duplicate undirected edges, no stored self-loops
/// (self-loops appear only inside normalized_adjacency), all weights > 0.
struct Graph {
  std::vector<std::string> node_ids;
  std::vector<Edge> edges;

  int num_nodes() const { return static_cast<int>(node_ids.size()); }
  std::size_t num_edges() const { return edges.size(); }

  void validate() const {
    const int n = num_nodes();
    std::vector<std::pair<int, int>> seen;
    seen.reserve(edges.size());
    for (const Edge& e : edges) {
      if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n)
        throw std::invalid_argument("Graph: edge endpoint out of range");
      if (e.u == e.v) throw std::invalid_argument("Graph: stored self-loop");
      if (!(e.w > 0.0)) throw std::invalid_argument("Graph: non-positive edge weight");
      seen.emplace_back(std::min(e.u, e.v), std::max(e.u, e.v));
    }
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
      throw std::invalid_argument("Graph: duplicate undirected edge");
  }

  /// Neighbor lists (sorted by index), excluding self.
  std::vector<std::vector<int>> neighbor_lists() const {
    std::vector<std::vector<int>> nbr(num_nodes());
    for (const Edge& e : edges) {
      nbr[e.u].push_back(e.v);
      nbr[e.v].push_back(e.u);
    }
    for (auto& v : nbr) std::sort(v.begin(), v.end());
    return nbr;
  }
};

/// Per-node feature matrix and binary labels, row i <-> Graph::node_ids[i].
struct NodeTable {
  Matrix features;              // N x F
  std::vector<std::uint8_t> labels;  // values in {0,1}

  int num_nodes() const { return features.rows(); }
  int num_features() const { return features.cols(); }

  int positives() const {
    int p = 0;
    for (auto y : labels) p += y;
    return p;
  }
  int negatives() const { return static_cast<int>(labels.size()) - positives(); }
};

/// D^-1/2 (A + I) D^-1/2 in compressed-row form, plus the raw neighbor
/// lists and augmented degrees it was built from.
struct NormalizedAdjacency {
  SparseMatrix matrix;
  std::vector<std::vector<int>> neighbors;  // sorted, no self
  std::vector<double> degrees;              // d_i = 1 + sum of incident weights
};

struct SplitMask {
  std::vector<std::uint8_t> train;
  std::vector<std::uint8_t> test;
  std::uint64_t seed = 0;

  int train_count() const {
    int c = 0;
    for (auto b : train) c += b;
    return c;
  }
  int test_count() const {
    int c = 0;
    for (auto b : test) c += b;
    return c;
  }
};

struct GraphStats {
  int n_nodes = 0;
  std::size_t n_edges = 0;
  double density = 0.0;
  double avg_degree = 0.0;
  int pos_nodes = 0;
  int neg_nodes = 0;
  double pos_neg_ratio = 0.0;
};

/// Counters for non-fatal conditions hit while loading.
struct LoadWarnings {
  std::size_t self_loops_dropped = 0;
  std::size_t duplicates_collapsed = 0;
  std::size_t file_nodes_skipped = 0;  // node csv rows absent from the graph
  std::size_t missing_filled = 0;      // graph nodes filled with zeros
};

// ---------------------------------------------------------------------------
// Loading

/// Reads an edge list CSV with header `source,target[,weight]`. Nodes are
/// numbered in first-appearance order (source before target, row by row).
/// Duplicate undirected edges collapse to the maximum weight; self-loop rows
/// are dropped and counted.
inline Graph load_edge_csv(const std::string& path, LoadWarnings* warn = nullptr) {
  const auto lines = csv::read_lines(path);
  if (lines.empty()) throw std::runtime_error("load_edge_csv: " + path + ": empty file");
  const auto header = csv::split(lines[0]);
  const bool has_weight = header.size() == 3;
  if (!(header.size() == 2 || has_weight) || csv::trim(header[0]) != "source" ||
      csv::trim(header[1]) != "target" || (has_weight && csv::trim(header[2]) != "weight"))
    throw std::runtime_error("load_edge_csv: " + path +
                             ": expected header 'source,target[,weight]', got '" + lines[0] + "'");

  Graph g;
  std::map<std::string, int> index_of;
  auto intern = [&](const std::string& id) {
    auto it = index_of.find(id);
    if (it != index_of.end()) return it->second;
    const int idx = g.num_nodes();
    index_of.emplace(id, idx);
    g.node_ids.push_back(id);
    return idx;
  };

  std::map<std::pair<int, int>, std::size_t> edge_slot;
  LoadWarnings local;
  for (std::size_t row = 1; row < lines.size(); ++row) {
    if (lines[row].empty()) continue;
    const auto f = csv::split(lines[row]);
    const std::string ctx = "load_edge_csv: " + path + ": row " + std::to_string(row + 1);
    if (f.size() != header.size())
      throw std::runtime_error(ctx + ": expected " + std::to_string(header.size()) +
                               " columns, got " + std::to_string(f.size()));
    const std::string src = csv::trim(f[0]), dst = csv::trim(f[1]);
    if (src.empty() || dst.empty()) throw std::runtime_error(ctx + ": empty node identifier");
    double w = 1.0;
    if (has_weight) {
      w = csv::parse_double(f[2], ctx);
      if (!(w > 0.0)) throw std::runtime_error(ctx + ": non-positive weight");
    }
    const int a = intern(src), b = intern(dst);
    if (a == b) {
      ++local.self_loops_dropped;
      continue;
    }
    const std::pair<int, int> key{std::min(a, b), std::max(a, b)};
    auto it = edge_slot.find(key);
    if (it == edge_slot.end()) {
      edge_slot.emplace(key, g.edges.size());
      g.edges.push_back({key.first, key.second, w});
    } else {
      g.edges[it->second].w = std::max(g.edges[it->second].w, w);
      ++local.duplicates_collapsed;
    }
  }
  if (warn) *warn = local;
  g.validate();
  return g;
}

/// Reads the node CSV `id,feat_1,...,feat_F,label` and reorders rows to the
/// graph's node order. Graph nodes missing from the file are an error unless
/// `fill_missing` substitutes zero features and label 0; file rows absent
/// from the graph are skipped with a warning count.
inline NodeTable load_node_csv(const std::string& path, const Graph& graph,
                               bool fill_missing = false, LoadWarnings* warn = nullptr) {
  const auto lines = csv::read_lines(path);
  if (lines.empty()) throw std::runtime_error("load_node_csv: " + path + ": empty file");
  const auto header = csv::split(lines[0]);
  if (header.size() < 3 || csv::trim(header.front()) != "id" ||
      csv::trim(header.back()) != "label")
    throw std::runtime_error("load_node_csv: " + path +
                             ": expected header 'id,feat_1,...,feat_F,label'");
  const int num_feat = static_cast<int>(header.size()) - 2;
  for (int j = 0; j < num_feat; ++j) {
    const std::string want = "feat_" + std::to_string(j + 1);
    if (csv::trim(header[j + 1]) != want)
      throw std::runtime_error("load_node_csv: " + path + ": expected column '" + want +
                               "', got '" + header[j + 1] + "'");
  }

  std::map<std::string, std::size_t> row_of;
  for (std::size_t row = 1; row < lines.size(); ++row) {
    if (lines[row].empty()) continue;
    const auto f = csv::split(lines[row]);
    if (f.size() != header.size())
      throw std::runtime_error("load_node_csv: " + path + ": row " + std::to_string(row + 1) +
                               ": expected " + std::to_string(header.size()) + " columns, got " +
                               std::to_string(f.size()));
    row_of[csv::trim(f[0])] = row;
  }

  NodeTable table;
  table.features = Matrix(graph.num_nodes(), num_feat);
  table.labels.assign(graph.num_nodes(), 0);
  LoadWarnings local;
  std::size_t used = 0;
  for (int i = 0; i < graph.num_nodes(); ++i) {
    auto it = row_of.find(graph.node_ids[i]);
    if (it == row_of.end()) {
      if (!fill_missing)
        throw std::runtime_error("load_node_csv: " + path + ": node '" + graph.node_ids[i] +
                                 "' missing from file (pass fill-missing to substitute zeros)");
      ++local.missing_filled;
      continue;
    }
    ++used;
    const auto f = csv::split(lines[it->second]);
    const std::string ctx = "load_node_csv: " + path + ": row " + std::to_string(it->second + 1);
    for (int j = 0; j < num_feat; ++j) {
      const double v = csv::parse_double(f[j + 1], ctx);
      if (!std::isfinite(v)) throw std::runtime_error(ctx + ": non-finite feature");
      table.features(i, j) = v;
    }
    const std::string lab = csv::trim(f.back());
    if (lab != "0" && lab != "1")
      throw std::runtime_error(ctx + ": label must be 0 or 1, got '" + lab + "'");
    table.labels[i] = static_cast<std::uint8_t>(lab == "1");
  }
  local.file_nodes_skipped = row_of.size() - used;
  if (warn) *warn = local;
  return table;
}

// ---------------------------------------------------------------------------
// Structure

/// Induced subgraph of the largest connected component, with table rows
/// filtered to match. Ties go to the component containing the smallest
/// node index. Node indices are recompacted preserving relative order.
inline std::pair<Graph, NodeTable> largest_connected_component(const Graph& graph,
                                                               const NodeTable& table) {
  const int n = graph.num_nodes();
  if (n == 0) throw std::invalid_argument("largest_connected_component: empty graph");
  if (table.num_nodes() != n)
    throw std::invalid_argument("largest_connected_component: table size mismatch");

  const auto nbr = graph.neighbor_lists();
  std::vector<int> comp(n, -1);
  int best_comp = -1, best_size = 0, num_comps = 0;
  for (int start = 0; start < n; ++start) {
    if (comp[start] != -1) continue;
    const int c = num_comps++;
    int size = 0;
    std::queue<int> q;
    q.push(start);
    comp[start] = c;
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      ++size;
      for (int v : nbr[u])
        if (comp[v] == -1) {
          comp[v] = c;
          q.push(v);
        }
    }
    // strict > keeps the earliest component on ties, i.e. the one whose
    // minimum node index is smallest
    if (size > best_size) {
      best_size = size;
      best_comp = c;
    }
  }

  std::vector<int> new_index(n, -1);
  Graph out;
  NodeTable out_table;
  out_table.features = Matrix(best_size, table.num_features());
  for (int i = 0; i < n; ++i) {
    if (comp[i] != best_comp) continue;
    const int ni = out.num_nodes();
    new_index[i] = ni;
    out.node_ids.push_back(graph.node_ids[i]);
    for (int j = 0; j < table.num_features(); ++j) out_table.features(ni, j) = table.features(i, j);
    out_table.labels.push_back(table.labels[i]);
  }
  for (const Edge& e : graph.edges)
    if (new_index[e.u] != -1 && new_index[e.v] != -1) {
      int a = new_index[e.u], b = new_index[e.v];
      out.edges.push_back({std::min(a, b), std::max(a, b), e.w});
    }
  return {std::move(out), std::move(out_table)};
}

/// Symmetric normalization D^-1/2 (A + I) D^-1/2 with d_i = 1 + sum of
/// incident edge weights; entry (i,j) = e_{j,i} / sqrt(d_j d_i) and the
/// inserted self-loops make every diagonal entry strictly positive.
inline NormalizedAdjacency normalized_adjacency(const Graph& graph) {
  const int n = graph.num_nodes();
  NormalizedAdjacency na;
  na.neighbors.assign(n, {});
  na.degrees.assign(n, 1.0);  // self-loop weight 1

  std::vector<std::vector<std::pair<int, double>>> weight_rows(n);
  for (const Edge& e : graph.edges) {
    na.degrees[e.u] += e.w;
    na.degrees[e.v] += e.w;
    weight_rows[e.u].emplace_back(e.v, e.w);
    weight_rows[e.v].emplace_back(e.u, e.w);
  }
  std::vector<std::vector<std::pair<int, double>>> rows(n);
  for (int i = 0; i < n; ++i) {
    auto& wr = weight_rows[i];
    wr.emplace_back(i, 1.0);
    std::sort(wr.begin(), wr.end());
    na.neighbors[i].reserve(wr.size() - 1);
    rows[i].reserve(wr.size());
    for (const auto& [j, w] : wr) {
      if (j != i) na.neighbors[i].push_back(j);
      rows[i].emplace_back(j, w / std::sqrt(na.degrees[j] * na.degrees[i]));
    }
  }
  na.matrix = SparseMatrix::from_rows(n, rows, /*symmetric=*/true);
  return na;
}

/// Unweighted A + I; the aggregation matrix of sum-style message passing.
inline SparseMatrix adjacency_plus_identity(const Graph& graph) {
  const int n = graph.num_nodes();
  std::vector<std::vector<std::pair<int, double>>> rows(n);
  for (const Edge& e : graph.edges) {
    rows[e.u].emplace_back(e.v, 1.0);
    rows[e.v].emplace_back(e.u, 1.0);
  }
  for (int i = 0; i < n; ++i) {
    rows[i].emplace_back(i, 1.0);
    std::sort(rows[i].begin(), rows[i].end());
  }
  return SparseMatrix::from_rows(n, rows, /*symmetric=*/true);
}

// ---------------------------------------------------------------------------
// Statistics and splitting

inline GraphStats graph_stats(const Graph& graph, const NodeTable& table) {
  const int n = graph.num_nodes();
  if (n < 2) throw std::invalid_argument("graph_stats: density undefined for fewer than 2 nodes");
  if (table.num_nodes() != n) throw std::invalid_argument("graph_stats: table size mismatch");
  GraphStats s;
  s.n_nodes = n;
  s.n_edges = graph.num_edges();
  const double e2 = 2.0 * static_cast<double>(s.n_edges);
  s.density = e2 / (static_cast<double>(n) * (n - 1));
  s.avg_degree = e2 / n;
  s.pos_nodes = table.positives();
  s.neg_nodes = table.negatives();
  s.pos_neg_ratio = static_cast<double>(s.pos_nodes) / static_cast<double>(s.neg_nodes);
  return s;
}

/// Seeded stratified split: within each label class, a seeded shuffle
/// assigns round(fraction * class_size) nodes to train, clamped so that
/// both partitions keep at least one member of each class.
inline SplitMask stratified_split(const NodeTable& table, double train_fraction,
                                  std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("stratified_split: train_fraction must be in (0,1)");
  const int n = table.num_nodes();
  SplitMask mask;
  mask.seed = seed;
  mask.train.assign(n, 0);
  mask.test.assign(n, 0);

  RngStream rng = RngStream::derive(seed, "split");
  for (int cls = 0; cls <= 1; ++cls) {
    std::vector<int> members;
    for (int i = 0; i < n; ++i)
      if (table.labels[i] == cls) members.push_back(i);
    const auto c = static_cast<long long>(members.size());
    if (c < 2)
      throw std::invalid_argument("stratified_split: class " + std::to_string(cls) + " has " +
                                  std::to_string(c) + " members, cannot stratify");
    for (long long i = c - 1; i > 0; --i) {
      const auto j = static_cast<long long>(rng.next_below(static_cast<std::uint64_t>(i) + 1));
      std::swap(members[i], members[j]);
    }
    long long take = std::llround(train_fraction * static_cast<double>(c));
    take = std::max(1ll, std::min(take, c - 1));  // both sides keep the class
    for (long long i = 0; i < c; ++i) {
      if (i < take)
        mask.train[members[i]] = 1;
      else
        mask.test[members[i]] = 1;
    }
  }
  return mask;
}

}  // namespace gnnbench
