#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gnnbench/graph.hpp"
#include "gnnbench/rng.hpp"
#include "gnnbench/tape.hpp"

namespace gnnbench {

enum class Arch { gcn, hgcn, phgcn, gat, gat_3h, gin, gtn, gcn2, sage, lr };

inline const std::vector<std::pair<Arch, std::string>>& arch_registry() {
  static const std::vector<std::pair<Arch, std::string>> reg = {
      {Arch::gcn, "gcn"},     {Arch::hgcn, "hgcn"}, {Arch::phgcn, "phgcn"},
      {Arch::gat, "gat"},     {Arch::gat_3h, "gat_3h"}, {Arch::gin, "gin"},
      {Arch::gtn, "gtn"},     {Arch::gcn2, "gcn2"}, {Arch::sage, "sage"},
      {Arch::lr, "lr"}};
  return reg;
}

inline std::string arch_name(Arch a) {
  for (const auto& [arch, name] : arch_registry())
    if (arch == a) return name;
  throw std::invalid_argument("arch_name: unknown architecture");
}

inline std::optional<Arch> arch_from_name(const std::string& name) {
  for (const auto& [arch, reg_name] : arch_registry())
    if (reg_name == name) return arch;
  return std::nullopt;
}

inline std::vector<std::string> all_arch_names() {
  std::vector<std::string> out;
  for (const auto& [arch, name] : arch_registry()) out.push_back(name);
  return out;
}

struct ModelSpec {
  Arch arch = Arch::gcn;
  int in_dim = 1;
  int hidden_dim = 16;
  int out_dim = 1;
  double dropout = 0.2;
  int heads = 1;  // 3 for gat_3h, set by make_model_spec
  double alpha = 0.1;      // gcn2 initial-residual strength
  double beta = 1.0;       // gcn2 identity-mapping strength
  double leaky_slope = 0.2;

  void validate() const {
    if (in_dim < 1 || hidden_dim < 1 || out_dim < 1)
      throw std::invalid_argument("ModelSpec: dimensions must be >= 1");
    if (!(dropout >= 0.0 && dropout < 1.0))
      throw std::invalid_argument("ModelSpec: dropout must be in [0,1)");
    if (heads < 1) throw std::invalid_argument("ModelSpec: heads must be >= 1");
  }
};

inline ModelSpec make_model_spec(Arch arch, int in_dim) {
  ModelSpec spec;
  spec.arch = arch;
  spec.in_dim = in_dim;
  spec.heads = arch == Arch::gat_3h ? 3 : 1;
  return spec;
}

/// Named parameter tensors in a fixed per-architecture order; the order is
/// the initialization draw order, so it is part of run reproducibility.
struct ModelParams {
  std::vector<std::pair<std::string, Tensor>> items;

  Tensor at(const std::string& name) const {
    for (const auto& [key, tensor] : items)
      if (key == name) return tensor;
    throw std::invalid_argument("ModelParams: no parameter named '" + name + "'");
  }
  std::vector<Tensor> tensors() const {
    std::vector<Tensor> out;
    out.reserve(items.size());
    for (const auto& [key, tensor] : items) out.push_back(tensor);
    return out;
  }
};

/// (name, rows, cols) for every learnable tensor, in draw order.
inline std::vector<std::tuple<std::string, int, int>> param_shapes(const ModelSpec& spec) {
  spec.validate();
  const int f = spec.in_dim, h = spec.hidden_dim, o = spec.out_dim;
  std::vector<std::tuple<std::string, int, int>> s;
  switch (spec.arch) {
    case Arch::gcn:
      s = {{"w1", f, h}, {"w2", h, o}};
      break;
    case Arch::hgcn:
      s = {{"w1", f, h}, {"w2", h, h}, {"w_final", 2 * h, o}};
      break;
    case Arch::phgcn:
      s = {{"w1", f, h}, {"w2", f, h}, {"w_final", 2 * h, o}};
      break;
    case Arch::gat:
    case Arch::gat_3h: {
      const int k = spec.heads;
      for (int head = 0; head < k; ++head) {
        const std::string tag = "_h" + std::to_string(head);
        s.emplace_back("w1" + tag, f, h);
        s.emplace_back("a1" + tag, 2 * h, 1);
      }
      for (int head = 0; head < k; ++head) {
        const std::string tag = "_h" + std::to_string(head);
        s.emplace_back("w2" + tag, k * h, o);
        s.emplace_back("a2" + tag, 2 * o, 1);
      }
      break;
    }
    case Arch::gin:
      s = {{"w1_1", f, h}, {"w1_2", h, h}, {"w2_1", h, h}, {"w2_2", h, h}, {"w_out", h, o}};
      break;
    case Arch::gtn:
      s = {{"l1_w1", f, h}, {"l1_w2", f, h}, {"l1_w3", f, h}, {"l1_w4", f, h},
           {"l2_w1", h, o}, {"l2_w2", h, o}, {"l2_w3", h, o}, {"l2_w4", h, o}};
      break;
    case Arch::gcn2:
      s = {{"w_in", f, h}, {"w1", h, h}, {"w2", h, h}, {"w_out", h, o}};
      break;
    case Arch::sage:
      s = {{"w1_self", f, h}, {"w1_neigh", f, h}, {"w2_self", h, o}, {"w2_neigh", h, o}};
      break;
    case Arch::lr:
      s = {{"w", f, o}, {"b", 1, o}};
      break;
  }
  return s;
}

/// Glorot-uniform draws in one deterministic stream: U(-a, a) with
/// a = sqrt(6/(fan_in+fan_out)), fan taken from the matrix shape.
inline ModelParams init_params(Tape& tape, const ModelSpec& spec, std::uint64_t seed) {
  RngStream rng = RngStream::derive(seed, "init");
  ModelParams params;
  for (const auto& [name, rows, cols] : param_shapes(spec)) {
    const double limit = std::sqrt(6.0 / (rows + cols));
    Matrix w(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) w(i, j) = rng.next_uniform(-limit, limit);
    params.items.emplace_back(name, tape.leaf(std::move(w), /*requires_grad=*/true));
  }
  return params;
}

// ---------------------------------------------------------------------------
// Graph-derived model inputs

/// Edge incidence grouped by destination: entries k in
/// [seg_ptr[i], seg_ptr[i+1]) have dst[k] == i, src sorted within a segment.
struct Incidence {
  std::vector<int> src;
  std::vector<int> dst;
  std::vector<int> seg_ptr;  // length N+1
};

/// Everything a forward pass needs from one graph, built once and shared by
/// all runs. Must outlive any tape records referencing it.
struct GraphContext {
  int n = 0;
  NormalizedAdjacency norm;  // D^-1/2 (A+I) D^-1/2, weighted
  SparseMatrix adj_plus_i;   // unweighted A+I (GIN sum aggregation)
  Incidence with_self;       // neighborhoods including the node (GAT)
  Incidence without_self;    // plain neighborhoods (GTN, GraphSAGE)
};

inline GraphContext build_graph_context(const Graph& graph) {
  GraphContext ctx;
  ctx.n = graph.num_nodes();
  ctx.norm = normalized_adjacency(graph);
  ctx.adj_plus_i = adjacency_plus_identity(graph);
  ctx.with_self.seg_ptr.push_back(0);
  ctx.without_self.seg_ptr.push_back(0);
  for (int i = 0; i < ctx.n; ++i) {
    bool self_inserted = false;
    for (int j : ctx.norm.neighbors[i]) {
      if (!self_inserted && j > i) {
        ctx.with_self.src.push_back(i);
        ctx.with_self.dst.push_back(i);
        self_inserted = true;
      }
      ctx.with_self.src.push_back(j);
      ctx.with_self.dst.push_back(i);
      ctx.without_self.src.push_back(j);
      ctx.without_self.dst.push_back(i);
    }
    if (!self_inserted) {
      ctx.with_self.src.push_back(i);
      ctx.with_self.dst.push_back(i);
    }
    ctx.with_self.seg_ptr.push_back(static_cast<int>(ctx.with_self.src.size()));
    ctx.without_self.seg_ptr.push_back(static_cast<int>(ctx.without_self.src.size()));
  }
  return ctx;
}

// ---------------------------------------------------------------------------
// Layers

inline Tensor gcn_layer(const NormalizedAdjacency& adj, const Tensor& h, const Tensor& w,
                        bool activate) {
  Tensor z = spmm(adj.matrix, matmul(h, w));
  return activate ? relu(z) : z;
}

/// One attention head: alpha over N(i) u {i} via segment softmax of
/// leaky_relu(a^T [Wh_dst || Wh_src]), output sum_j alpha_ij W h_j.
/// Returns the pre-activation aggregate.
inline Tensor gat_head(const Incidence& inc, const Tensor& h, const Tensor& w, const Tensor& a,
                       double leaky_slope) {
  Tensor wh = matmul(h, w);
  Tensor gathered_dst = row_gather(wh, inc.dst);
  Tensor gathered_src = row_gather(wh, inc.src);
  Tensor score = leaky_relu(matmul(concat_cols(gathered_dst, gathered_src), a), leaky_slope);
  Tensor alpha = segment_softmax(score, inc.seg_ptr);
  return segment_reduce(row_scale(gathered_src, alpha), inc.seg_ptr, Reduce::sum);
}

/// One transformer layer (Eq. 12/13 shape): W1 h_i plus attention-weighted
/// sum of W2 h_j over plain neighborhoods; scores are scaled dot products
/// of W3/W4 projections. Pre-activation.
inline Tensor gtn_layer(const Incidence& inc, const Tensor& h, const Tensor& w1, const Tensor& w2,
                        const Tensor& w3, const Tensor& w4) {
  const int width = w3.cols();
  Tensor q = row_gather(matmul(h, w3), inc.dst);
  Tensor k = row_gather(matmul(h, w4), inc.src);
  Tensor score = scale(rowwise_dot(q, k), 1.0 / std::sqrt(static_cast<double>(width)));
  Tensor alpha = segment_softmax(score, inc.seg_ptr);
  Tensor msg = segment_reduce(row_scale(row_gather(matmul(h, w2), inc.src), alpha), inc.seg_ptr,
                              Reduce::sum);
  return add(matmul(h, w1), msg);
}

/// GraphSAGE layer: W_self h_i + W_neigh mean_{j in N(i)} h_j; nodes
/// without neighbors contribute a zero mean.
inline Tensor sage_layer(const Incidence& inc, const Tensor& h, const Tensor& w_self,
                         const Tensor& w_neigh) {
  Tensor mean_nbr = segment_reduce(row_gather(h, inc.src), inc.seg_ptr, Reduce::mean);
  return add(matmul(h, w_self), matmul(mean_nbr, w_neigh));
}

// ---------------------------------------------------------------------------
// Forward programs (logits Nx1; dropout active only while tape.training)

inline Tensor forward_gcn(const ModelSpec& spec, const ModelParams& p, const GraphContext& ctx,
                          const Tensor& x, RngStream& drop_rng) {
  Tensor h1 = dropout(gcn_layer(ctx.norm, x, p.at("w1"), true), spec.dropout, drop_rng);
  return gcn_layer(ctx.norm, h1, p.at("w2"), false);
}

inline Tensor forward_hgcn(const ModelSpec& spec, const ModelParams& p, const GraphContext& ctx,
                           const Tensor& x, RngStream& drop_rng) {
  Tensor h1 = dropout(gcn_layer(ctx.norm, x, p.at("w1"), true), spec.dropout, drop_rng);
  Tensor h2 = dropout(gcn_layer(ctx.norm, h1, p.at("w2"), true), spec.dropout, drop_rng);
  return matmul(concat_cols(h1, h2), p.at("w_final"));
}

inline Tensor forward_phgcn(const ModelSpec& spec, const ModelParams& p, const GraphContext& ctx,
                            const Tensor& x, RngStream& drop_rng) {
  Tensor h1 = dropout(gcn_layer(ctx.norm, x, p.at("w1"), true), spec.dropout, drop_rng);
  Tensor h2 = dropout(gcn_layer(ctx.norm, x, p.at("w2"), true), spec.dropout, drop_rng);
  return matmul(concat_cols(h1, h2), p.at("w_final"));
}

inline Tensor forward_gat(const ModelSpec& spec, const ModelParams& p, const GraphContext& ctx,
                          const Tensor& x, RngStream& drop_rng) {
  // hidden layer: heads concatenated, relu, dropout
  Tensor h1 = gat_head(ctx.with_self, x, p.at("w1_h0"), p.at("a1_h0"), spec.leaky_slope);
  for (int head = 1; head < spec.heads; ++head) {
    const std::string tag = "_h" + std::to_string(head);
    h1 = concat_cols(h1, gat_head(ctx.with_self, x, p.at("w1" + tag), p.at("a1" + tag),
                                  spec.leaky_slope));
  }
  h1 = dropout(relu(h1), spec.dropout, drop_rng);
  // output layer: heads averaged, raw logits
  Tensor out = gat_head(ctx.with_self, h1, p.at("w2_h0"), p.at("a2_h0"), spec.leaky_slope);
  for (int head = 1; head < spec.heads; ++head) {
    const std::string tag = "_h" + std::to_string(head);
    out = add(out, gat_head(ctx.with_self, h1, p.at("w2" + tag), p.at("a2" + tag),
                            spec.leaky_slope));
  }
  return spec.heads > 1 ? scale(out, 1.0 / spec.heads) : out;
}

inline Tensor forward_sage(const ModelSpec& spec, const ModelParams& p, const GraphContext& ctx,
                           const Tensor& x, RngStream& drop_rng) {
  Tensor h1 = relu(sage_layer(ctx.without_self, x, p.at("w1_self"), p.at("w1_neigh")));
  h1 = dropout(h1, spec.dropout, drop_rng);
  return sage_layer(ctx.without_self, h1, p.at("w2_self"), p.at("w2_neigh"));
}

inline Tensor forward_gin(const ModelSpec& spec, const ModelParams& p, const GraphContext& ctx,
                          const Tensor& x, RngStream& drop_rng) {
  // epsilon = 0: aggregation is the unweighted (A+I) sum; h_theta is
  // linear -> relu -> linear
  Tensor h1 = matmul(relu(matmul(spmm(ctx.adj_plus_i, x), p.at("w1_1"))), p.at("w1_2"));
  h1 = dropout(h1, spec.dropout, drop_rng);
  Tensor h2 = matmul(relu(matmul(spmm(ctx.adj_plus_i, h1), p.at("w2_1"))), p.at("w2_2"));
  h2 = dropout(h2, spec.dropout, drop_rng);
  return matmul(h2, p.at("w_out"));
}

inline Tensor forward_gcn2(const ModelSpec& spec, const ModelParams& p, const GraphContext& ctx,
                           const Tensor& x, RngStream& drop_rng) {
  Tensor h0 = relu(matmul(x, p.at("w_in")));
  auto layer = [&](const Tensor& h, const Tensor& w) {
    Tensor support = add(scale(spmm(ctx.norm.matrix, h), 1.0 - spec.alpha), scale(h0, spec.alpha));
    return relu(add(scale(support, 1.0 - spec.beta), scale(matmul(support, w), spec.beta)));
  };
  Tensor h1 = dropout(layer(h0, p.at("w1")), spec.dropout, drop_rng);
  Tensor h2 = dropout(layer(h1, p.at("w2")), spec.dropout, drop_rng);
  return matmul(h2, p.at("w_out"));
}

inline Tensor forward_gtn(const ModelSpec& spec, const ModelParams& p, const GraphContext& ctx,
                          const Tensor& x, RngStream& drop_rng) {
  Tensor h1 = relu(gtn_layer(ctx.without_self, x, p.at("l1_w1"), p.at("l1_w2"), p.at("l1_w3"),
                             p.at("l1_w4")));
  h1 = dropout(h1, spec.dropout, drop_rng);
  return gtn_layer(ctx.without_self, h1, p.at("l2_w1"), p.at("l2_w2"), p.at("l2_w3"),
                   p.at("l2_w4"));
}

inline Tensor forward_lr(const ModelParams& p, const Tensor& x) {
  return add_bias(matmul(x, p.at("w")), p.at("b"));
}

inline Tensor forward_model(const ModelSpec& spec, const ModelParams& p, const GraphContext& ctx,
                            const Tensor& x, RngStream& drop_rng) {
  if (x.cols() != spec.in_dim)
    throw std::invalid_argument("forward_model: feature width " + std::to_string(x.cols()) +
                                " does not match spec in_dim " + std::to_string(spec.in_dim));
  switch (spec.arch) {
    case Arch::gcn: return forward_gcn(spec, p, ctx, x, drop_rng);
    case Arch::hgcn: return forward_hgcn(spec, p, ctx, x, drop_rng);
    case Arch::phgcn: return forward_phgcn(spec, p, ctx, x, drop_rng);
    case Arch::gat:
    case Arch::gat_3h: return forward_gat(spec, p, ctx, x, drop_rng);
    case Arch::gin: return forward_gin(spec, p, ctx, x, drop_rng);
    case Arch::gtn: return forward_gtn(spec, p, ctx, x, drop_rng);
    case Arch::gcn2: return forward_gcn2(spec, p, ctx, x, drop_rng);
    case Arch::sage: return forward_sage(spec, p, ctx, x, drop_rng);
    case Arch::lr: return forward_lr(p, x);
  }
  throw std::invalid_argument("forward_model: unknown architecture");
}

}  // namespace gnnbench
