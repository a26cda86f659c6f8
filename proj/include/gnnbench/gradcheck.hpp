#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gnnbench/tape.hpp"

namespace gnnbench {

struct GradcheckReport {
  double max_rel_err = 0.0;
  std::string worst_param;
  int worst_row = -1;
  int worst_col = -1;
  int entries_checked = 0;
};

/// Central-difference check of reverse-mode gradients.
///
/// `rebuild_loss` must rerun the whole forward pass from the current
/// parameter values and return the scalar loss; the tape is rewound to its
/// current mark before every call, so parameters have to predate the call
/// to gradient_check. The forward pass must be deterministic (probed by
/// evaluating twice); run with dropout disabled.
///
/// Error metric per entry: |analytic - numeric| / max(1, |analytic|, |numeric|).
inline GradcheckReport gradient_check(Tape& tape,
                                      const std::vector<std::pair<std::string, Tensor>>& params,
                                      const std::function<Tensor()>& rebuild_loss,
                                      double step = 1e-5) {
  const Tape::Mark mark = tape.mark();
  auto eval = [&]() {
    tape.rewind(mark);
    Tensor loss = rebuild_loss();
    if (loss.tape != &tape) throw std::invalid_argument("gradient_check: loss from another tape");
    return loss.value()(0, 0);
  };

  const double probe_a = eval();
  const double probe_b = eval();
  if (probe_a != probe_b)
    throw std::runtime_error("gradient_check: forward pass is not deterministic");

  tape.rewind(mark);
  Tensor loss = rebuild_loss();
  tape.zero_grad();
  tape.backward(loss);
  std::vector<Matrix> analytic;
  analytic.reserve(params.size());
  for (const auto& [name, p] : params) analytic.push_back(p.grad());

  GradcheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor p = params[k].second;
    Matrix& w = p.value_mut();
    for (int i = 0; i < w.rows(); ++i)
      for (int j = 0; j < w.cols(); ++j) {
        const double saved = w(i, j);
        w(i, j) = saved + step;
        const double up = eval();
        w(i, j) = saved - step;
        const double down = eval();
        w(i, j) = saved;
        const double numeric = (up - down) / (2.0 * step);
        const double a = analytic[k](i, j);
        const double err = std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
        ++report.entries_checked;
        if (err > report.max_rel_err) {
          report.max_rel_err = err;
          report.worst_param = params[k].first;
          report.worst_row = i;
          report.worst_col = j;
        }
      }
  }
  tape.rewind(mark);
  tape.zero_grad();
  return report;
}

}  // namespace gnnbench
