#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "gnnbench/csv.hpp"
#include "gnnbench/fisher.hpp"
#include "gnnbench/graph.hpp"

namespace gnnbench {

inline const std::array<const char*, 5>& region_names() {
  static const std::array<const char*, 5> names = {"cds", "utr3", "utr5", "promoter", "enhancer"};
  return names;
}

/// Per-gene region-level p-values; missing regions stay unset and reduce
/// the degrees of freedom of the combination.
struct RegionPValues {
  std::string gene;
  std::array<std::optional<double>, 5> p;  // indexed as region_names()

  std::vector<double> present() const {
    std::vector<double> out;
    for (const auto& v : p)
      if (v) out.push_back(*v);
    return out;
  }
};

struct GenePanel {
  std::set<std::string> genes;
  std::string source;
};

enum class FeatureTransform { raw, neglog10 };

inline FeatureTransform transform_from_name(const std::string& name) {
  if (name == "raw") return FeatureTransform::raw;
  if (name == "neglog10") return FeatureTransform::neglog10;
  throw std::invalid_argument("transform must be 'raw' or 'neglog10', got '" + name + "'");
}

/// Reads `gene,cds,utr3,utr5,promoter,enhancer`; empty cells mean missing.
inline std::vector<RegionPValues> load_pvalues_csv(const std::string& path) {
  const auto lines = csv::read_lines(path);
  if (lines.empty()) throw std::runtime_error("load_pvalues_csv: " + path + ": empty file");
  const auto header = csv::split(lines[0]);
  if (header.size() != 6 || csv::trim(header[0]) != "gene")
    throw std::runtime_error("load_pvalues_csv: " + path +
                             ": expected header 'gene,cds,utr3,utr5,promoter,enhancer'");
  for (std::size_t r = 0; r < region_names().size(); ++r)
    if (csv::trim(header[r + 1]) != region_names()[r])
      throw std::runtime_error("load_pvalues_csv: " + path + ": expected column '" +
                               region_names()[r] + "', got '" + header[r + 1] + "'");
  std::vector<RegionPValues> out;
  std::set<std::string> seen;
  for (std::size_t row = 1; row < lines.size(); ++row) {
    if (lines[row].empty()) continue;
    const auto f = csv::split(lines[row]);
    const std::string ctx = "load_pvalues_csv: " + path + ": row " + std::to_string(row + 1);
    if (f.size() != 6) throw std::runtime_error(ctx + ": expected 6 columns");
    RegionPValues rec;
    rec.gene = csv::trim(f[0]);
    if (rec.gene.empty()) throw std::runtime_error(ctx + ": empty gene identifier");
    if (!seen.insert(rec.gene).second)
      throw std::runtime_error(ctx + ": duplicate gene '" + rec.gene + "'");
    bool any = false;
    for (std::size_t r = 0; r < rec.p.size(); ++r) {
      const std::string cell = csv::trim(f[r + 1]);
      if (cell.empty()) continue;
      const double p = csv::parse_double(cell, ctx);
      if (!(p > 0.0 && p <= 1.0))
        throw std::runtime_error(ctx + ": p-value " + cell + " outside (0,1]");
      rec.p[r] = p;
      any = true;
    }
    if (!any) throw std::runtime_error(ctx + ": gene '" + rec.gene + "' has no region p-values");
    out.push_back(std::move(rec));
  }
  return out;
}

/// One gene identifier per line; blank lines skipped.
inline GenePanel load_panel(const std::string& path, const std::string& source = "") {
  GenePanel panel;
  panel.source = source;
  for (const std::string& line : csv::read_lines(path)) {
    const std::string gene = csv::trim(line);
    if (!gene.empty()) panel.genes.insert(gene);
  }
  if (panel.genes.empty()) throw std::runtime_error("load_panel: " + path + ": empty panel");
  return panel;
}

/// Per-node single feature: Fisher-combined p over the gene's observed
/// regions (genes without any p-values get combined p = 1), optionally
/// transformed to -log10(p) clipped to [0, 300]. Label 1 iff in the panel.
inline NodeTable build_node_table(const std::vector<RegionPValues>& regions,
                                  const GenePanel& panel, const Graph& graph,
                                  FeatureTransform transform) {
  if (panel.genes.empty()) throw std::invalid_argument("build_node_table: empty panel");
  std::map<std::string, const RegionPValues*> by_gene;
  for (const RegionPValues& r : regions) by_gene.emplace(r.gene, &r);

  NodeTable table;
  table.features = Matrix(graph.num_nodes(), 1);
  table.labels.assign(static_cast<std::size_t>(graph.num_nodes()), 0);
  int positives = 0;
  for (int i = 0; i < graph.num_nodes(); ++i) {
    const std::string& gene = graph.node_ids[static_cast<std::size_t>(i)];
    double combined = 1.0;
    auto it = by_gene.find(gene);
    if (it != by_gene.end()) combined = fisher_combine(it->second->present());
    if (transform == FeatureTransform::neglog10)
      table.features(i, 0) = std::clamp(-std::log10(std::max(combined, 1e-300)), 0.0, 300.0);
    else
      table.features(i, 0) = combined;
    if (panel.genes.count(gene)) {
      table.labels[static_cast<std::size_t>(i)] = 1;
      ++positives;
    }
  }
  if (positives == 0)
    throw std::runtime_error("build_node_table: no panel gene appears in the graph");
  return table;
}

/// Writes the node CSV consumed by load_node_csv; 12-significant-digit
/// formatting keeps the bytes stable across runs.
inline void export_node_csv(const NodeTable& table, const Graph& graph, const std::string& path) {
  if (table.num_nodes() != graph.num_nodes())
    throw std::invalid_argument("export_node_csv: table/graph size mismatch");
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
