#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "gnnbench/metrics.hpp"
#include "gnnbench/rng.hpp"
#include "support/test_util.hpp"

using namespace gnnbench;

namespace {

Matrix column(const std::vector<double>& v) {
  Matrix m(static_cast<int>(v.size()), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m(static_cast<int>(i), 0) = v[i];
  return m;
}

std::vector<std::uint8_t> ones(std::size_t n) { return std::vector<std::uint8_t>(n, 1); }

// Like reading the text back from a file: the trailing newline does not
// produce an empty final line.
std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (ch == '\n') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

RunSeries make_series(const std::string& model, std::uint64_t seed,
                      const std::vector<double>& bacc) {
  RunSeries s;
  s.model = model;
  s.seed = seed;
  for (std::size_t e = 0; e < bacc.size(); ++e) {
    EpochMetrics m;
    m.epoch = static_cast<int>(e) + 1;
    m.loss = 1.0 / (1.0 + static_cast<double>(e));
    m.tn = 5;
    m.fp = 1;
    m.fn = 2;
    m.tp = 4;
    m.precision = 0.8;
    m.recall = 2.0 / 3.0;
    m.accuracy = 0.75;
    m.bacc = bacc[e];
    m.auc = 0.9;
    m.test_loss = 0.5;
    s.epochs.push_back(m);
  }
  return s;
}

}  // namespace

TEST(Confusion, HandCountsAndDerivedRates) {
  // 4 positives: 3 above threshold, 1 below. 10 negatives: 5 above, 5 below.
  std::vector<double> scores = {0.9, 0.8, 0.7, 0.2,
                                0.6, 0.7, 0.8, 0.9, 0.55, 0.1, 0.2, 0.3, 0.4, 0.45};
  std::vector<std::uint8_t> labels = {1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0};
  ConfusionCounts c = confusion(column(scores), labels, ones(labels.size()));
  EXPECT_EQ(c.tp, 3);
  EXPECT_EQ(c.fn, 1);
  EXPECT_EQ(c.fp, 5);
  EXPECT_EQ(c.tn, 5);
  BasicMetrics b = basic_metrics(c);
  EXPECT_DOUBLE_EQ(b.precision, 3.0 / 8.0);
  EXPECT_DOUBLE_EQ(b.recall, 3.0 / 4.0);
  EXPECT_DOUBLE_EQ(b.accuracy, 8.0 / 14.0);
  EXPECT_DOUBLE_EQ(b.bacc, (3.0 / 4.0 + 5.0 / 10.0) / 2.0);
}

TEST(Confusion, ThresholdIsInclusiveAndMaskFilters) {
  ConfusionCounts c = confusion(column({0.5, 0.9}), {0, 1}, {1, 0});
  EXPECT_EQ(c.fp, 1);  // score exactly 0.5 counts as predicted positive
  EXPECT_EQ(c.total(), 1);
  EXPECT_THROW(confusion(column({0.5}), {0}, {0}), std::invalid_argument);
}

TEST(Confusion, ZeroDenominatorConventions) {
  // All negatives, none predicted positive: precision and recall both 0,
  // bacc collapses to specificity/2.
  ConfusionCounts c = confusion(column({0.1, 0.2}), {0, 0}, {1, 1});
  BasicMetrics b = basic_metrics(c);
  EXPECT_DOUBLE_EQ(b.precision, 0.0);
  EXPECT_DOUBLE_EQ(b.recall, 0.0);
  EXPECT_DOUBLE_EQ(b.bacc, 0.5);
  EXPECT_DOUBLE_EQ(b.accuracy, 1.0);
}

TEST(Confusion, BaccEqualsAccuracyOnBalancedMasks) {
  RngStream rng = RngStream::derive(8, "bacc-balance");
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> scores;
    std::vector<std::uint8_t> labels;
    for (int i = 0; i < 30; ++i) {
      scores.push_back(rng.next_double());
      labels.push_back(i < 15 ? 1 : 0);  // exactly balanced
    }
    BasicMetrics b = basic_metrics(confusion(column(scores), labels, ones(30)));
    EXPECT_NEAR(b.bacc, b.accuracy, 1e-12);
  }
}

TEST(Auc, DegenerateAndPerfectCases) {
  EXPECT_DOUBLE_EQ(*auc(column({0.4, 0.4, 0.4, 0.4}), {1, 0, 1, 0}, ones(4)), 0.5);
  EXPECT_DOUBLE_EQ(*auc(column({0.9, 0.8, 0.2, 0.1}), {1, 1, 0, 0}, ones(4)), 1.0);
  EXPECT_DOUBLE_EQ(*auc(column({0.1, 0.2, 0.8, 0.9}), {1, 1, 0, 0}, ones(4)), 0.0);
  EXPECT_FALSE(auc(column({0.5, 0.6}), {1, 1}, ones(2)).has_value());
  EXPECT_FALSE(auc(column({0.5, 0.6, 0.7}), {1, 0, 1}, {1, 0, 1}).has_value());
}

TEST(Auc, MidranksMatchTrapezoidOracle) {
  RngStream rng = RngStream::derive(17, "auc-oracle");
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> scores;
    std::vector<std::uint8_t> labels;
    const int n = 40;
    bool saw_pos = false, saw_neg = false;
    for (int i = 0; i < n; ++i) {
      // Quantize so ties between and within classes are common.
      scores.push_back(std::round(rng.next_double() * 8.0) / 8.0);
      labels.push_back(rng.next_bernoulli(0.35) ? 1 : 0);
      (labels.back() ? saw_pos : saw_neg) = true;
    }
    if (!saw_pos || !saw_neg) continue;
    const auto got = auc(column(scores), labels, ones(n));
    ASSERT_TRUE(got.has_value());
    EXPECT_NEAR(*got, testutil::trapezoid_auc(scores, labels), 1e-12);
  }
}

TEST(Auc, InvariantUnderMonotoneTransformAndFlipsWithLabels) {
  std::vector<double> scores = {0.11, 0.52, 0.52, 0.74, 0.35, 0.62, 0.20, 0.81};
  std::vector<std::uint8_t> labels = {0, 1, 0, 1, 0, 0, 1, 1};
  const double base = *auc(column(scores), labels, ones(8));
  std::vector<double> stretched;
  for (double s : scores) stretched.push_back(3.0 * s + 10.0);
  EXPECT_DOUBLE_EQ(*auc(column(stretched), labels, ones(8)), base);

  std::vector<std::uint8_t> flipped;
  for (auto y : labels) flipped.push_back(y ? 0 : 1);
  EXPECT_NEAR(*auc(column(scores), flipped, ones(8)), 1.0 - base, 1e-12);
}

TEST(RunCsv, HeaderAndRoundTrip) {
  EXPECT_STREQ(kRunCsvHeader,
               "model,seed,epoch,loss,tn,fp,fn,tp,precision,recall,accuracy,bacc,auc,test_loss");
  RunSeries s = make_series("gcn", 3, {0.5, 0.6, 0.7});
  s.epochs[1].auc = std::nullopt;  // exercise the empty-auc cell
  const std::string text = run_series_to_csv(s);
  const auto lines = split_lines(text);
  ASSERT_GE(lines.size(), 4u);
  EXPECT_EQ(lines[0], kRunCsvHeader);
  EXPECT_EQ(csv::split(lines[2])[12], "");  // auc cell empty

  const std::string dir = testutil::tmp_dir("run_csv");
  testutil::write_text(dir + "/r.csv", text);
  RunSeries back = load_run_series(dir + "/r.csv");
  EXPECT_EQ(back.model, "gcn");
  EXPECT_EQ(back.seed, 3u);
  ASSERT_EQ(back.epochs.size(), 3u);
  EXPECT_FALSE(back.epochs[1].auc.has_value());
  EXPECT_TRUE(back.epochs[0].auc.has_value());
  EXPECT_NEAR(back.epochs[2].bacc, 0.7, 1e-9);
  EXPECT_EQ(back.epochs[2].tp, 4);
}

TEST(RunCsv, RejectsHeaderMismatchAndInconsistentRows) {
  RunSeries s = make_series("gcn", 3, {0.5});
  auto lines = split_lines(run_series_to_csv(s));
  {
    auto bad = lines;
    bad[0] = "model,seed,epoch";
    EXPECT_THROW(run_series_from_csv_text(bad, "t"), std::runtime_error);
  }
  {
    auto bad = lines;
    bad[1] = "gat" + bad[1].substr(3);  // model differs from row to row later
    bad.push_back(split_lines(run_series_to_csv(make_series("gcn", 3, {0.5})))[1]);
    EXPECT_THROW(run_series_from_csv_text(bad, "t"), std::runtime_error);
  }
}

TEST(Aggregate, MeanStdAndStderrFromTwoSeeds) {
  std::vector<RunSeries> series = {make_series("gcn", 0, {0.5, 0.6}),
                                   make_series("gcn", 1, {0.5, 0.8})};
  ModelAggregate agg = aggregate_model(series);
  EXPECT_EQ(agg.n_series, 2);
  EXPECT_EQ(agg.best_epoch, 2);
  EXPECT_DOUBLE_EQ(agg.best_bacc.mean, 0.7);
  ASSERT_TRUE(agg.best_bacc.std_dev.has_value());
  EXPECT_NEAR(*agg.best_bacc.std_dev, std::sqrt(0.02), 1e-12);
  EXPECT_NEAR(*agg.best_bacc.std_err, std::sqrt(0.02) / std::sqrt(2.0), 1e-12);
}

TEST(Aggregate, BestEpochTieBreaksEarlierAndSingleSeedHasNoStd) {
  ModelAggregate agg = aggregate_model({make_series("gat", 0, {0.4, 0.7, 0.7, 0.6})});
  EXPECT_EQ(agg.best_epoch, 2);  // first epoch achieving the max
  EXPECT_FALSE(agg.best_bacc.std_dev.has_value());
  EXPECT_DOUBLE_EQ(agg.best_bacc.mean, 0.7);
}

TEST(Aggregate, AucAveragesOnlyDefinedSeeds) {
  RunSeries a = make_series("gcn", 0, {0.5});
  RunSeries b = make_series("gcn", 1, {0.5});
  a.epochs[0].auc = 0.8;
  b.epochs[0].auc = std::nullopt;
  ModelAggregate agg = aggregate_model({a, b});
  const auto& names = curve_metric_names();
  std::size_t auc_idx = 0;
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == "auc") auc_idx = i;
  EXPECT_DOUBLE_EQ(agg.per_epoch[0][auc_idx].mean, 0.8);
  EXPECT_FALSE(agg.per_epoch[0][auc_idx].std_dev.has_value());  // one defined seed
}

TEST(Aggregate, RejectsMixedModelsAndRaggedSeries) {
  EXPECT_THROW(aggregate_model({make_series("gcn", 0, {0.5}), make_series("gat", 1, {0.5})}),
               std::invalid_argument);
  EXPECT_THROW(
      aggregate_model({make_series("gcn", 0, {0.5}), make_series("gcn", 1, {0.5, 0.6})}),
      std::invalid_argument);
  EXPECT_THROW(aggregate_model({}), std::invalid_argument);
}

TEST(Aggregate, CurveMetricOrderIsStable) {
  const auto& names = curve_metric_names();
  ASSERT_EQ(names.size(), 6u);
  EXPECT_EQ(names[0], "loss");
  EXPECT_EQ(names[1], "bacc");
  EXPECT_EQ(names[2], "recall");
  EXPECT_EQ(names[3], "auc");
  EXPECT_EQ(names[4], "accuracy");
  EXPECT_EQ(names[5], "precision");
}
