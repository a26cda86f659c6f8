#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gnnbench/csv.hpp"
#include "gnnbench/matrix.hpp"

namespace gnnbench {

struct ConfusionCounts {
  long tn = 0, fp = 0, fn = 0, tp = 0;
  long total() const { return tn + fp + fn + tp; }
};

struct BasicMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double bacc = 0.0;
};

/// Counts over masked nodes; predicted positive iff score >= threshold.
/// Scores are sigmoid outputs in (0,1).
inline ConfusionCounts confusion(const Matrix& scores, const std::vector<std::uint8_t>& labels,
                                 const std::vector<std::uint8_t>& mask, double threshold = 0.5) {
  if (scores.cols() != 1 || labels.size() != static_cast<std::size_t>(scores.rows()) ||
      mask.size() != labels.size())
    throw std::invalid_argument("confusion: scores/labels/mask size mismatch");
  ConfusionCounts c;
  for (int i = 0; i < scores.rows(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    const bool predicted = scores(i, 0) >= threshold;
    const bool actual = labels[static_cast<std::size_t>(i)] != 0;
    if (predicted && actual) ++c.tp;
    else if (predicted && !actual) ++c.fp;
    else if (!predicted && actual) ++c.fn;
    else ++c.tn;
  }
  if (c.total() == 0) throw std::invalid_argument("confusion: empty mask");
  return c;
}

/// Zero-denominator convention: a ratio whose denominator is 0 contributes 0
/// (precision with no predicted positives, recall with no actual positives,
/// either bacc component likewise).
inline BasicMetrics basic_metrics(const ConfusionCounts& c) {
  if (c.total() == 0) throw std::invalid_argument("basic_metrics: empty counts");
  BasicMetrics m;
  m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  m.precision = c.tp + c.fp > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
  m.recall = c.tp + c.fn > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
  const double specificity =
      c.tn + c.fp > 0 ? static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp) : 0.0;
  m.bacc = 0.5 * (m.recall + specificity);
  return m;
}

/// Mann-Whitney AUC with midranks for ties:
/// (sum of positive ranks - P(P+1)/2) / (P*N). Undefined (nullopt) when the
/// mask holds a single class.
inline std::optional<double> auc(const Matrix& scores, const std::vector<std::uint8_t>& labels,
                                 const std::vector<std::uint8_t>& mask) {
  if (scores.cols() != 1 || labels.size() != static_cast<std::size_t>(scores.rows()) ||
      mask.size() != labels.size())
    throw std::invalid_argument("auc: scores/labels/mask size mismatch");
  std::vector<std::pair<double, std::uint8_t>> pts;
  for (int i = 0; i < scores.rows(); ++i)
    if (mask[static_cast<std::size_t>(i)])
      pts.emplace_back(scores(i, 0), labels[static_cast<std::size_t>(i)]);
  long pos = 0;
  for (const auto& [s, y] : pts) pos += y;
  const long neg = static_cast<long>(pts.size()) - pos;
  if (pos == 0 || neg == 0) return std::nullopt;
  std::sort(pts.begin(), pts.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < pts.size()) {
    std::size_t j = i;
    while (j < pts.size() && pts[j].first == pts[i].first) ++j;
    const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t k = i; k < j; ++k)
      if (pts[k].second) rank_sum_pos += midrank;
    i = j;
  }
  const double p = static_cast<double>(pos);
  return (rank_sum_pos - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

// ---------------------------------------------------------------------------
// Per-run series and cross-seed aggregation

struct EpochMetrics {
  int epoch = 0;
  double loss = 0.0;  // training objective at this epoch
  long tn = 0, fp = 0, fn = 0, tp = 0;
  double precision = 0.0, recall = 0.0, accuracy = 0.0, bacc = 0.0;
  std::optional<double> auc;
  double test_loss = 0.0;
};

struct RunSeries {
  std::string model;
  std::uint64_t seed = 0;
  std::vector<EpochMetrics> epochs;  // epoch numbers contiguous from 1

  void validate() const {
    for (std::size_t i = 0; i < epochs.size(); ++i)
      if (epochs[i].epoch != static_cast<int>(i) + 1)
        throw std::invalid_argument("RunSeries: epochs must be contiguous from 1");
  }
};

/// Exact persisted column set. Training loss, raw confusion counts, and the
/// derived metrics come first; the trailing test_loss records the eval-mode
/// loss on the held-out mask.
inline const char* kRunCsvHeader =
    "model,seed,epoch,loss,tn,fp,fn,tp,precision,recall,accuracy,bacc,auc,test_loss";

inline std::string run_series_to_csv(const RunSeries& series) {
  series.validate();
  std::string out(kRunCsvHeader);
  out.push_back('\n');
  for (const EpochMetrics& e : series.epochs) {
    out += series.model;
    out += ',' + std::to_string(series.seed);
    out += ',' + std::to_string(e.epoch);
    out += ',' + csv::fmt_g12(e.loss);
    out += ',' + std::to_string(e.tn);
    out += ',' + std::to_string(e.fp);
    out += ',' + std::to_string(e.fn);
    out += ',' + std::to_string(e.tp);
    out += ',' + csv::fmt_g12(e.precision);
    out += ',' + csv::fmt_g12(e.recall);
    out += ',' + csv::fmt_g12(e.accuracy);
    out += ',' + csv::fmt_g12(e.bacc);
    out += ',';
    if (e.auc) out += csv::fmt_g12(*e.auc);
    out += ',' + csv::fmt_g12(e.test_loss);
    out.push_back('\n');
  }
  return out;
}

inline RunSeries run_series_from_csv_text(const std::vector<std::string>& lines,
                                          const std::string& context) {
  if (lines.empty() || csv::trim(lines[0]) != kRunCsvHeader)
    throw std::runtime_error(context + ": bad run CSV header");
  RunSeries series;
  for (std::size_t row = 1; row < lines.size(); ++row) {
    if (lines[row].empty()) continue;
    const auto f = csv::split(lines[row]);
    const std::string ctx = context + ": row " + std::to_string(row + 1);
    if (f.size() != 14) throw std::runtime_error(ctx + ": expected 14 columns");
    if (series.epochs.empty()) {
      series.model = f[0];
      series.seed = std::stoull(f[1]);
    } else if (series.model != f[0] || series.seed != std::stoull(f[1])) {
      throw std::runtime_error(ctx + ": mixed model/seed in one run file");
    }
    EpochMetrics e;
    e.epoch = static_cast<int>(csv::parse_double(f[2], ctx));
    e.loss = csv::parse_double(f[3], ctx);
    e.tn = static_cast<long>(csv::parse_double(f[4], ctx));
    e.fp = static_cast<long>(csv::parse_double(f[5], ctx));
    e.fn = static_cast<long>(csv::parse_double(f[6], ctx));
    e.tp = static_cast<long>(csv::parse_double(f[7], ctx));
    e.precision = csv::parse_double(f[8], ctx);
    e.recall = csv::parse_double(f[9], ctx);
    e.accuracy = csv::parse_double(f[10], ctx);
    e.bacc = csv::parse_double(f[11], ctx);
    if (!csv::trim(f[12]).empty()) e.auc = csv::parse_double(f[12], ctx);
    e.test_loss = csv::parse_double(f[13], ctx);
    series.epochs.push_back(e);
  }
  series.validate();
  return series;
}

inline RunSeries load_run_series(const std::string& path) {
  return run_series_from_csv_text(csv::read_lines(path), "load_run_series: " + path);
}

/// Names and order of the aggregated/plotted metrics.
inline const std::vector<std::string>& curve_metric_names() {
  static const std::vector<std::string> names = {"loss", "bacc", "recall",
                                                 "auc",  "accuracy", "precision"};
  return names;
}

inline std::optional<double> metric_value(const EpochMetrics& e, const std::string& name) {
  if (name == "loss") return e.loss;
  if (name == "bacc") return e.bacc;
  if (name == "recall") return e.recall;
  if (name == "auc") return e.auc;
  if (name == "accuracy") return e.accuracy;
  if (name == "precision") return e.precision;
  throw std::invalid_argument("metric_value: unknown metric '" + name + "'");
}

struct AggregateCell {
  double mean = 0.0;
  std::optional<double> std_dev;  // sample std (n-1); missing when n < 2
  std::optional<double> std_err;  // std/sqrt(n)
};

struct ModelAggregate {
  std::string model;
  int n_series = 0;
  // per_epoch[e][m]: epoch e+1, metric curve_metric_names()[m]
  std::vector<std::vector<AggregateCell>> per_epoch;
  int best_epoch = 0;
  AggregateCell best_bacc;
};

/// Cross-seed aggregation for one model. All series must share an epoch
/// count. AUC cells average whichever seeds defined it.
inline ModelAggregate aggregate_model(const std::vector<RunSeries>& series) {
  if (series.empty()) throw std::invalid_argument("aggregate_model: no series");
  const std::size_t epochs = series[0].epochs.size();
  for (const RunSeries& s : series) {
    s.validate();
    if (s.model != series[0].model)
      throw std::invalid_argument("aggregate_model: mixed models");
    if (s.epochs.size() != epochs)
      throw std::invalid_argument("aggregate_model: series disagree on epoch count");
  }
  ModelAggregate agg;
  agg.model = series[0].model;
  agg.n_series = static_cast<int>(series.size());
  agg.per_epoch.assign(epochs, std::vector<AggregateCell>(curve_metric_names().size()));
  for (std::size_t e = 0; e < epochs; ++e) {
    for (std::size_t m = 0; m < curve_metric_names().size(); ++m) {
      std::vector<double> vals;
      for (const RunSeries& s : series) {
        const auto v = metric_value(s.epochs[e], curve_metric_names()[m]);
        if (v) vals.push_back(*v);
      }
      AggregateCell& cell = agg.per_epoch[e][m];
      if (vals.empty()) {
        cell.mean = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      double sum = 0.0;
      for (double v : vals) sum += v;
      cell.mean = sum / static_cast<double>(vals.size());
      if (vals.size() >= 2) {
        double ss = 0.0;
        for (double v : vals) ss += (v - cell.mean) * (v - cell.mean);
        cell.std_dev = std::sqrt(ss / static_cast<double>(vals.size() - 1));
        cell.std_err = *cell.std_dev / std::sqrt(static_cast<double>(vals.size()));
      }
    }
  }
  // best epoch by mean bacc, earliest on ties
  const std::size_t bacc_idx = 1;  // curve_metric_names()[1] == "bacc"
  agg.best_epoch = 1;
  agg.best_bacc = agg.per_epoch[0][bacc_idx];
  for (std::size_t e = 1; e < epochs; ++e)
    if (agg.per_epoch[e][bacc_idx].mean > agg.best_bacc.mean) {
      agg.best_epoch = static_cast<int>(e) + 1;
      agg.best_bacc = agg.per_epoch[e][bacc_idx];
    }
  return agg;
}

}  // namespace gnnbench
