#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "gnnbench/adam.hpp"
#include "gnnbench/gradcheck.hpp"
#include "gnnbench/rng.hpp"
#include "gnnbench/tape.hpp"
#include "support/test_util.hpp"

using namespace gnnbench;

namespace {

Matrix random_matrix(int r, int c, RngStream& rng) {
  Matrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = rng.next_normal();
  return m;
}

// Random values kept away from zero so kinked activations stay on one side
// of the kink across the finite-difference step.
Matrix random_offzero_matrix(int r, int c, RngStream& rng) {
  Matrix m = random_matrix(r, c, rng);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) += m(i, j) >= 0.0 ? 0.3 : -0.3;
  return m;
}

double check_unary(const std::function<Tensor(const Tensor&)>& op, const Matrix& input) {
  Tape tape;
  Tensor x = tape.leaf(input, true);
  auto report = gradient_check(tape, {{"x", x}}, [&]() { return sum_all(op(x)); });
  return report.max_rel_err;
}

}  // namespace

TEST(Tape, MatmulScalarHandValues) {
  Tape tape;
  Tensor a = tape.leaf(Matrix(1, 1, 2.0), true);
  Tensor b = tape.leaf(Matrix(1, 1, 3.0), true);
  Tensor y = matmul(a, b);
  EXPECT_DOUBLE_EQ(y.value()(0, 0), 6.0);
  tape.backward(y);
  EXPECT_DOUBLE_EQ(a.grad()(0, 0), 3.0);
  EXPECT_DOUBLE_EQ(b.grad()(0, 0), 2.0);
}

TEST(Tape, RepeatedBackwardAccumulates) {
  Tape tape;
  Tensor w = tape.leaf(Matrix(2, 1, 1.5), true);
  Tensor loss = sum_all(w);
  tape.backward(loss);
  tape.backward(loss);
  EXPECT_DOUBLE_EQ(w.grad()(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(w.grad()(1, 0), 2.0);
  tape.zero_grad();
  EXPECT_DOUBLE_EQ(w.grad()(0, 0), 0.0);
}

TEST(Tape, RewindDropsNodesButKeepsLeaves) {
  Tape tape;
  Tensor w = tape.leaf(Matrix(1, 1, 4.0), true);
  const Tape::Mark m = tape.mark();
  Tensor y = scale(w, 2.0);
  EXPECT_EQ(tape.num_nodes(), 2u);
  tape.rewind(m);
  EXPECT_EQ(tape.num_nodes(), 1u);
  EXPECT_DOUBLE_EQ(w.value()(0, 0), 4.0);
  Tensor y2 = scale(w, 3.0);
  tape.backward(y2);
  EXPECT_DOUBLE_EQ(w.grad()(0, 0), 3.0);
  (void)y;
}

TEST(Tape, PushRejectsNonFiniteResults) {
  Tape tape;
  Tensor x = tape.leaf(Matrix(1, 1, 1e308), true);
  EXPECT_THROW(scale(x, 1e10), std::runtime_error);
  EXPECT_THROW(tape.leaf(Matrix(1, 1, INFINITY), false), std::runtime_error);
}

TEST(Tape, PrimitiveGradientsMatchFiniteDifferences) {
  RngStream rng = RngStream::derive(31, "engine-fd");
  constexpr double kTol = 1e-7;

  {  // matmul
    Tape tape;
    Tensor a = tape.leaf(random_matrix(3, 4, rng), true);
    Tensor b = tape.leaf(random_matrix(4, 2, rng), true);
    auto rep = gradient_check(tape, {{"a", a}, {"b", b}},
                              [&]() { return sum_all(matmul(a, b)); });
    EXPECT_LT(rep.max_rel_err, kTol) << rep.worst_param;
  }
  {  // add, scale, add_bias chained
    Tape tape;
    Tensor a = tape.leaf(random_matrix(3, 4, rng), true);
    Tensor b = tape.leaf(random_matrix(3, 4, rng), true);
    Tensor bias = tape.leaf(random_matrix(1, 4, rng), true);
    auto rep = gradient_check(tape, {{"a", a}, {"b", b}, {"bias", bias}}, [&]() {
      return sum_all(add_bias(add(scale(a, 1.7), b), bias));
    });
    EXPECT_LT(rep.max_rel_err, kTol) << rep.worst_param;
  }
  EXPECT_LT(check_unary([](const Tensor& x) { return relu(x); },
                        random_offzero_matrix(4, 3, rng)),
            kTol);
  EXPECT_LT(check_unary([](const Tensor& x) { return leaky_relu(x, 0.2); },
                        random_offzero_matrix(4, 3, rng)),
            kTol);
  EXPECT_LT(check_unary([](const Tensor& x) { return sigmoid(x); }, random_matrix(4, 3, rng)),
            kTol);
  {  // concat_cols
    Tape tape;
    Tensor a = tape.leaf(random_matrix(3, 2, rng), true);
    Tensor b = tape.leaf(random_matrix(3, 3, rng), true);
    Tensor mix = tape.constant(random_matrix(5, 1, rng));
    auto rep = gradient_check(tape, {{"a", a}, {"b", b}},
                              [&]() { return sum_all(matmul(concat_cols(a, b), mix)); });
    EXPECT_LT(rep.max_rel_err, kTol) << rep.worst_param;
  }
  {  // row_gather with a repeated index (exercises scatter-add)
    Tape tape;
    Tensor x = tape.leaf(random_matrix(3, 2, rng), true);
    const std::vector<int> idx = {2, 0, 1, 0};
    auto rep = gradient_check(tape, {{"x", x}},
                              [&]() { return sum_all(sigmoid(row_gather(x, idx))); });
    EXPECT_LT(rep.max_rel_err, kTol) << rep.worst_param;
  }
  {  // rowwise_dot and row_scale
    Tape tape;
    Tensor a = tape.leaf(random_matrix(4, 3, rng), true);
    Tensor b = tape.leaf(random_matrix(4, 3, rng), true);
    Tensor s = tape.leaf(random_matrix(4, 1, rng), true);
    auto rep = gradient_check(tape, {{"a", a}, {"b", b}, {"s", s}}, [&]() {
      return sum_all(row_scale(add(a, b), sigmoid(rowwise_dot(a, b))));
    });
    EXPECT_LT(rep.max_rel_err, kTol) << rep.worst_param;
    (void)s;
  }
  {  // segment_softmax
    Tape tape;
    Tensor scores = tape.leaf(random_matrix(7, 1, rng), true);
    Tensor weights = tape.constant(random_matrix(7, 1, rng));
    const std::vector<int> seg = {0, 3, 4, 7};
    auto rep = gradient_check(tape, {{"scores", scores}}, [&]() {
      return sum_all(rowwise_dot(segment_softmax(scores, seg), weights));
    });
    EXPECT_LT(rep.max_rel_err, kTol) << rep.worst_param;
  }
  {  // segment_reduce, sum and mean, with an empty segment
    const std::vector<int> seg = {0, 2, 2, 5};
    for (Reduce kind : {Reduce::sum, Reduce::mean}) {
      Tape tape;
      Tensor x = tape.leaf(random_matrix(5, 2, rng), true);
      auto rep = gradient_check(tape, {{"x", x}}, [&]() {
        return sum_all(sigmoid(segment_reduce(x, seg, kind)));
      });
      EXPECT_LT(rep.max_rel_err, kTol) << rep.worst_param;
    }
  }
  {  // spmm over a small symmetric matrix
    std::vector<std::vector<std::pair<int, double>>> rows = {
        {{1, 0.5}, {2, 0.25}}, {{0, 0.5}}, {{0, 0.25}, {2, 2.0}}};
    SparseMatrix s = SparseMatrix::from_rows(3, rows, true);
    Tape tape;
    Tensor h = tape.leaf(random_matrix(3, 2, rng), true);
    auto rep = gradient_check(tape, {{"h", h}},
                              [&]() { return sum_all(sigmoid(spmm(s, h))); });
    EXPECT_LT(rep.max_rel_err, kTol) << rep.worst_param;
  }
  {  // weighted BCE with a partial mask
    Tape tape;
    Tensor z = tape.leaf(random_matrix(6, 1, rng), true);
    const std::vector<std::uint8_t> labels = {1, 0, 1, 0, 0, 1};
    const std::vector<std::uint8_t> mask = {1, 1, 0, 1, 1, 1};
    auto rep = gradient_check(tape, {{"z", z}}, [&]() {
      return weighted_bce_with_logits(z, labels, mask, 2.5);
    });
    EXPECT_LT(rep.max_rel_err, kTol) << rep.worst_param;
  }
}

TEST(Tape, KinkSubgradients) {
  Tape tape;
  Tensor x = tape.leaf(Matrix(1, 1, 0.0), true);
  tape.backward(sum_all(relu(x)));
  EXPECT_DOUBLE_EQ(x.grad()(0, 0), 0.0);  // relu'(0) = 0 by convention
  tape.zero_grad();
  const Tape::Mark m = tape.mark();
  tape.rewind(m);
  tape.backward(sum_all(leaky_relu(x, 0.2)));
  EXPECT_DOUBLE_EQ(x.grad()(0, 0), 0.2);  // leaky keeps the slope at 0
}

TEST(Tape, WrongBackwardRuleIsRejectedByChecker) {
  Tape tape;
  Tensor x = tape.leaf(Matrix(2, 1, 0.7), true);
  auto doubled_with_bad_rule = [&]() {
    Matrix v = x.value();
    for (int i = 0; i < v.rows(); ++i) v(i, 0) *= 2.0;
    Tensor out = tape.push(std::move(v), "bad_double");
    tape.record([xi = x.id, oi = out.id](Tape&, Tape::Adjoints& adj) {
      if (!adj.has(oi)) return;
      const Matrix& g = adj.at(oi);
      Matrix& gx = adj.accum_slot(xi, g.rows(), g.cols());
      for (int i = 0; i < g.rows(); ++i) gx(i, 0) += 3.0 * g(i, 0);  // should be 2.0
    });
    return out;
  };
  auto rep = gradient_check(tape, {{"x", x}},
                            [&]() { return sum_all(doubled_with_bad_rule()); });
  EXPECT_GT(rep.max_rel_err, 1e-2);
}

TEST(Tape, GradientCheckRejectsNondeterministicLoss) {
  Tape tape;
  Tensor x = tape.leaf(Matrix(1, 1, 1.0), true);
  int call = 0;
  EXPECT_THROW(gradient_check(tape, {{"x", x}},
                              [&]() { return scale(x, 1.0 + 0.5 * call++); }),
               std::runtime_error);
}

TEST(Bce, HandValuesAndStability) {
  const std::vector<std::uint8_t> one = {1};
  const std::vector<std::uint8_t> zero = {0};
  const std::vector<std::uint8_t> on = {1};
  {
    Tape tape;
    Tensor z = tape.constant(Matrix(1, 1, 0.0));
    EXPECT_NEAR(weighted_bce_with_logits(z, zero, on, 1.0).value()(0, 0), std::log(2.0), 1e-15);
  }
  {
    Tape tape;
    Tensor z = tape.constant(Matrix(1, 1, 40.0));
    EXPECT_LT(weighted_bce_with_logits(z, one, on, 1.0).value()(0, 0), 1e-12);
    Tensor zneg = tape.constant(Matrix(1, 1, -40.0));
    EXPECT_NEAR(weighted_bce_with_logits(zneg, one, on, 1.0).value()(0, 0), 40.0, 1e-9);
  }
  {
    Tape tape;
    Tensor z = tape.constant(Matrix(1, 1, 1e6));
    EXPECT_TRUE(std::isfinite(weighted_bce_with_logits(z, zero, on, 1.0).value()(0, 0)));
  }
  {
    // Weight normalization: both entries at z=0 give ln2 regardless of the
    // positive weight, because numerator and denominator scale together.
    Tape tape;
    Tensor z = tape.constant(Matrix(2, 1, 0.0));
    const std::vector<std::uint8_t> labels = {1, 0};
    const std::vector<std::uint8_t> mask = {1, 1};
    EXPECT_NEAR(weighted_bce_with_logits(z, labels, mask, 2.0).value()(0, 0), std::log(2.0),
                1e-15);
  }
  {
    Tape tape;
    Tensor z = tape.constant(Matrix(1, 1, 0.0));
    EXPECT_THROW(weighted_bce_with_logits(z, one, {0}, 1.0), std::invalid_argument);
    EXPECT_THROW(weighted_bce_with_logits(z, one, on, 0.0), std::invalid_argument);
  }
}

TEST(Bce, BackwardMatchesSigmoidFormula) {
  RngStream rng = RngStream::derive(77, "bce-back");
  Tape tape;
  Tensor z = tape.leaf(random_matrix(5, 1, rng), true);
  const std::vector<std::uint8_t> labels = {1, 0, 0, 1, 0};
  const std::vector<std::uint8_t> mask = {1, 1, 1, 1, 0};
  const double pw = 3.0;
  tape.backward(weighted_bce_with_logits(z, labels, mask, pw));
  double wsum = 0.0;
  for (int i = 0; i < 4; ++i) wsum += labels[i] ? pw : 1.0;
  for (int i = 0; i < 5; ++i) {
    if (!mask[i]) {
      EXPECT_DOUBLE_EQ(z.grad()(i, 0), 0.0);
      continue;
    }
    const double w = labels[i] ? pw : 1.0;
    const double sig = 1.0 / (1.0 + std::exp(-z.value()(i, 0)));
    EXPECT_NEAR(z.grad()(i, 0), w * (sig - labels[i]) / wsum, 1e-12);
  }
}

TEST(Dropout, IdentityInEvalModeOrZeroProbability) {
  Tape tape;
  RngStream rng = RngStream::derive(9, "dropout");
  Tensor x = tape.leaf(Matrix(2, 2, 1.0), true);
  tape.training = false;
  EXPECT_EQ(dropout(x, 0.5, rng).id, x.id);
  tape.training = true;
  EXPECT_EQ(dropout(x, 0.0, rng).id, x.id);
  EXPECT_THROW(dropout(x, 1.0, rng), std::invalid_argument);
}

TEST(Dropout, InvertedScalingKeepsMeanAndIsDeterministic) {
  Tape tape;
  tape.training = true;
  Tensor x = tape.constant(Matrix(200, 200, 1.0));
  RngStream rng_a = RngStream::derive(3, "dropout");
  Tensor a = dropout(x, 0.5, rng_a);
  double sum = 0.0;
  for (int i = 0; i < 200; ++i)
    for (int j = 0; j < 200; ++j) {
      const double v = a.value()(i, j);
      EXPECT_TRUE(v == 0.0 || v == 2.0);
      sum += v;
    }
  EXPECT_NEAR(sum / (200.0 * 200.0), 1.0, 0.02);

  RngStream rng_b = RngStream::derive(3, "dropout");
  Tensor b = dropout(x, 0.5, rng_b);
  EXPECT_TRUE(a.value() == b.value());
}

TEST(SegmentSoftmax, NormalizesEachSegmentAndIsShiftInvariant) {
  RngStream rng = RngStream::derive(21, "segsoft");
  Tape tape;
  Matrix scores = random_matrix(7, 1, rng);
  const std::vector<int> seg = {0, 3, 4, 7};
  Tensor s = tape.constant(scores);
  Tensor a = segment_softmax(s, seg);
  for (std::size_t k = 0; k + 1 < seg.size(); ++k) {
    double sum = 0.0;
    for (int e = seg[k]; e < seg[k + 1]; ++e) sum += a.value()(e, 0);
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
  Matrix shifted = scores;
  for (int i = 0; i < 7; ++i) shifted(i, 0) += 1000.0;
  Tensor a2 = segment_softmax(tape.constant(shifted), seg);
  for (int i = 0; i < 7; ++i) EXPECT_NEAR(a2.value()(i, 0), a.value()(i, 0), 1e-12);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Tape tape;
  Tensor w = tape.leaf(Matrix(1, 1, 0.5), true);
  AdamState opt({w}, {.lr = 0.01, .weight_decay = 0.0});
  tape.backward(sum_all(w));  // gradient exactly 1
  opt.step();
  EXPECT_NEAR(w.value()(0, 0), 0.49, 1e-8);
  EXPECT_DOUBLE_EQ(w.grad()(0, 0), 0.0);  // grads cleared by the step
}

TEST(Adam, CoupledWeightDecayActsWithoutLossGradient) {
  Tape tape;
  Tensor w = tape.leaf(Matrix(1, 1, 2.0), true);
  AdamState opt({w}, {.lr = 0.01, .weight_decay = 0.1});
  tape.backward(scale(sum_all(w), 0.0));  // zero loss gradient
  opt.step();
  // Effective gradient is wd * w = 0.2; Adam normalizes it to a unit step.
  EXPECT_NEAR(w.value()(0, 0), 1.99, 1e-7);
}

TEST(Adam, MatchesScalarReferenceOverManySteps) {
  Tape tape;
  Tensor w = tape.leaf(Matrix(1, 1, 0.0), true);
  Tensor target = tape.constant(Matrix(1, 1, -3.0));
  AdamState opt({w}, {.lr = 0.1, .weight_decay = 0.0});
  const Tape::Mark m = tape.mark();

  double rw = 0.0, rm = 0.0, rv = 0.0;  // scalar re-implementation
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8, lr = 0.1;

  for (int t = 1; t <= 30; ++t) {
    tape.rewind(m);
    Tensor d = add(w, target);
    tape.backward(rowwise_dot(d, d));  // (w - 3)^2
    opt.step();

    const double g = 2.0 * (rw - 3.0);
    rm = b1 * rm + (1 - b1) * g;
    rv = b2 * rv + (1 - b2) * g * g;
    const double mhat = rm / (1.0 - std::pow(b1, t));
    const double vhat = rv / (1.0 - std::pow(b2, t));
    rw -= lr * mhat / (std::sqrt(vhat) + eps);

    ASSERT_NEAR(w.value()(0, 0), rw, 1e-12) << "diverged at step " << t;
  }
  EXPECT_LT(std::abs(w.value()(0, 0) - 3.0), 2.0);  // moving toward the minimum
}

TEST(Adam, RejectsNonGradParams) {
  Tape tape;
  Tensor c = tape.constant(Matrix(1, 1, 1.0));
  EXPECT_THROW(AdamState({c}, {}), std::invalid_argument);
}
