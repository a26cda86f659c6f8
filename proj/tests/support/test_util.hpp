#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gnnbench/csv.hpp"
#include "gnnbench/graph.hpp"
#include "gnnbench/matrix.hpp"
#include "gnnbench/rng.hpp"
#include "gnnbench/sparse.hpp"

namespace testutil {

/// Fresh scratch directory under the system temp root; wiped on entry so
/// reruns never see stale files.
inline std::string tmp_dir(const std::string& name) {
  namespace fs = std::filesystem;
  const fs::path p = fs::temp_directory_path() / "gnnbench_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

inline void write_text(const std::string& path, const std::string& text) {
  gnnbench::csv::write_file_atomic(path, text);
}

inline std::string read_text(const std::string& path) { return gnnbench::csv::read_text(path); }

inline gnnbench::Matrix dense_of(const gnnbench::SparseMatrix& s) { return s.to_dense(); }

/// Reference AUC via the explicit ROC curve: sort by score descending,
/// advance through tie groups, integrate with the trapezoid rule.
inline double trapezoid_auc(const std::vector<double>& scores,
                            const std::vector<std::uint8_t>& labels) {
  long pos = 0, neg = 0;
  std::vector<std::pair<double, std::uint8_t>> pts;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    pts.emplace_back(scores[i], labels[i]);
    if (labels[i]) ++pos;
    else ++neg;
  }
  if (pos == 0 || neg == 0) throw std::invalid_argument("trapezoid_auc: single class");
  std::sort(pts.begin(), pts.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  double area = 0.0;
  double tp = 0.0, fp = 0.0, prev_tp = 0.0, prev_fp = 0.0;
  std::size_t i = 0;
  while (i < pts.size()) {
    std::size_t j = i;
    while (j < pts.size() && pts[j].first == pts[i].first) {
      if (pts[j].second) tp += 1.0;
      else fp += 1.0;
      ++j;
    }
    area += (fp - prev_fp) * (tp + prev_tp) / 2.0;
    prev_tp = tp;
    prev_fp = fp;
    i = j;
  }
  return area / (static_cast<double>(pos) * static_cast<double>(neg));
}

/// Relabels node i of `g` to position perm[i], remapping edges to match.
inline gnnbench::Graph permute_graph(const gnnbench::Graph& g, const std::vector<int>& perm) {
  gnnbench::Graph out;
  out.node_ids.resize(g.node_ids.size());
  for (std::size_t i = 0; i < g.node_ids.size(); ++i)
    out.node_ids[static_cast<std::size_t>(perm[i])] = g.node_ids[i];
  for (const gnnbench::Edge& e : g.edges)
    out.edges.push_back({perm[static_cast<std::size_t>(e.u)],
                         perm[static_cast<std::size_t>(e.v)], e.w});
  return out;
}

inline gnnbench::Matrix permute_rows(const gnnbench::Matrix& m, const std::vector<int>& perm) {
  gnnbench::Matrix out(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) out(perm[static_cast<std::size_t>(i)], j) = m(i, j);
  return out;
}

inline std::vector<int> random_perm(int n, gnnbench::RngStream& rng) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(i) + 1));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  return perm;
}

}  // namespace testutil
