#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gnnbench/gradcheck.hpp"
#include "gnnbench/graph.hpp"
#include "gnnbench/models.hpp"
#include "gnnbench/rng.hpp"
#include "gnnbench/tape.hpp"

namespace gnnbench {

/// Seeded random instance for the finite-difference suite: a G(n, p) graph
/// with standard-normal features and labels forced to contain both classes.
struct CheckInstance {
  Graph graph;
  NodeTable table;
  GraphContext ctx;
};

inline CheckInstance make_check_instance(int n, int features, double edge_prob,
                                         std::uint64_t seed) {
  CheckInstance inst;
  for (int i = 0; i < n; ++i) inst.graph.node_ids.push_back("n" + std::to_string(i));
  RngStream rng = RngStream::derive(seed, "check-instance");
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.next_bernoulli(edge_prob)) inst.graph.edges.push_back({i, j, 1.0});
  inst.table.features = Matrix(n, features);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < features; ++j) inst.table.features(i, j) = rng.next_normal();
  inst.table.labels.assign(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) inst.table.labels[static_cast<std::size_t>(i)] = rng.next_bernoulli(0.35);
  inst.table.labels[0] = 1;  // both classes present regardless of the draws
  inst.table.labels[static_cast<std::size_t>(n - 1)] = 0;
  inst.ctx = build_graph_context(inst.graph);
  return inst;
}

struct GradcheckOutcome {
  std::string model;
  GradcheckReport report;
};

/// Finite-difference check of one architecture on the standard 12-node,
/// 4-feature instance: weighted BCE loss over all nodes, dropout disabled.
inline GradcheckOutcome gradcheck_model(const std::string& model_name, const CheckInstance& inst,
                                        std::uint64_t seed = 7) {
  const auto arch = arch_from_name(model_name);
  if (!arch) throw std::invalid_argument("gradcheck_model: unknown model '" + model_name + "'");
  ModelSpec spec = make_model_spec(*arch, inst.table.num_features());
  spec.hidden_dim = 5;  // small widths keep the entry count tractable
  spec.dropout = 0.0;

  Tape tape;
  tape.training = false;
  const Tensor x = tape.constant(inst.table.features);
  ModelParams params = init_params(tape, spec, seed);
  std::vector<std::uint8_t> mask(inst.table.labels.size(), 1);
  RngStream drop_rng = RngStream::derive(seed, "dropout");

  GradcheckOutcome out;
  out.model = model_name;
  out.report = gradient_check(tape, params.items, [&]() {
    Tensor logits = forward_model(spec, params, inst.ctx, x, drop_rng);
    return weighted_bce_with_logits(logits, inst.table.labels, mask, 1.7);
  });
  return out;
}

/// Runs the suite over the given models (all ten when empty).
inline std::vector<GradcheckOutcome> run_gradcheck_suite(std::vector<std::string> models = {}) {
  if (models.empty()) models = all_arch_names();
  const CheckInstance inst = make_check_instance(12, 4, 0.3, 2024);
  std::vector<GradcheckOutcome> out;
  out.reserve(models.size());
  for (const std::string& m : models) out.push_back(gradcheck_model(m, inst));
  return out;
}

}  // namespace gnnbench
