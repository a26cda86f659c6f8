#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "gnnbench/adam.hpp"
#include "gnnbench/config.hpp"
#include "gnnbench/graph.hpp"
#include "gnnbench/metrics.hpp"
#include "gnnbench/models.hpp"
#include "gnnbench/tape.hpp"

namespace gnnbench {

/// One seeded training run: stratified resplit, class-weighted BCE on the
/// train mask, Adam updates, per-epoch eval-mode metrics on the test mask.
/// Bit-deterministic in (config, model, seed). Throws if the training loss
/// leaves the finite range; callers treat that as a failed run.
inline RunSeries train_one(const ExperimentConfig& cfg, const std::string& model_name,
                           const GraphContext& ctx, const NodeTable& table,
                           std::uint64_t run_seed) {
  const ModelSpec spec = cfg.model_spec(model_name, table.num_features());
  const SplitMask split = stratified_split(table, cfg.train_fraction, run_seed);

  long train_pos = 0, train_total = 0;
  for (std::size_t i = 0; i < split.train.size(); ++i)
    if (split.train[i]) {
      ++train_total;
      train_pos += table.labels[i];
    }
  if (train_pos == 0 || train_pos == train_total)
    throw std::runtime_error("train_one: degenerate train split");
  const double pos_weight =
      static_cast<double>(train_total - train_pos) / static_cast<double>(train_pos);

  Tape tape;
  const Tensor x = tape.constant(table.features);
  ModelParams params = init_params(tape, spec, run_seed);
  const Tape::Mark mark = tape.mark();
  AdamState opt(params.tensors(),
                {cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay});
  RngStream drop_rng = RngStream::derive(run_seed, "dropout");

  RunSeries series;
  series.model = model_name;
  series.seed = run_seed;
  series.epochs.reserve(static_cast<std::size_t>(cfg.epochs));
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    tape.rewind(mark);
    tape.training = true;
    Tensor logits = forward_model(spec, params, ctx, x, drop_rng);
    Tensor loss = weighted_bce_with_logits(logits, table.labels, split.train, pos_weight);
    const double train_loss = loss.value()(0, 0);
    tape.backward(loss);
    opt.step();

    tape.rewind(mark);
    tape.training = false;
    Tensor eval_logits = forward_model(spec, params, ctx, x, drop_rng);
    Tensor scores = sigmoid(eval_logits);
    EpochMetrics em;
    em.epoch = epoch;
    em.loss = train_loss;
    const ConfusionCounts c = confusion(scores.value(), table.labels, split.test);
    em.tn = c.tn;
    em.fp = c.fp;
    em.fn = c.fn;
    em.tp = c.tp;
    const BasicMetrics bm = basic_metrics(c);
    em.precision = bm.precision;
    em.recall = bm.recall;
    em.accuracy = bm.accuracy;
    em.bacc = bm.bacc;
    em.auc = auc(scores.value(), table.labels, split.test);
    em.test_loss =
        weighted_bce_with_logits(eval_logits, table.labels, split.test, pos_weight).value()(0, 0);
    series.epochs.push_back(em);
  }
  return series;
}

}  // namespace gnnbench
