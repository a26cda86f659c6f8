#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace gnnbench {

namespace detail {

// Regularized incomplete gamma, split the classic way: series for
// x < a + 1, continued fraction (modified Lentz) otherwise.

inline double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16)
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  throw std::runtime_error("gamma_p_series: no convergence");
}

inline double gamma_q_contfrac(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16)
      return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  throw std::runtime_error("gamma_q_contfrac: no convergence");
}

/// Q(a, x) = regularized upper incomplete gamma.
inline double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q: requires x >= 0, a > 0");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_contfrac(a, x);
}

}  // namespace detail

/// Upper-tail probability of chi-squared with df degrees of freedom,
/// Q(df/2, x/2); absolute accuracy well under 1e-10 for df <= 100, x <= 500.
inline double chi2_survival(double x, int df) {
  if (x < 0.0) throw std::invalid_argument("chi2_survival: x must be >= 0");
  if (df < 1) throw std::invalid_argument("chi2_survival: df must be >= 1");
  return detail::gamma_q(0.5 * df, 0.5 * x);
}

/// Fisher's method: X = -2 sum ln p_i ~ chi-squared with 2k df. Values are
/// clamped below at 1e-300 before the log.
inline double fisher_combine(const std::vector<double>& pvals) {
  if (pvals.empty()) throw std::invalid_argument("fisher_combine: empty p-value list");
  double statistic = 0.0;
  for (double p : pvals) {
    if (!(p > 0.0 && p <= 1.0))
      throw std::invalid_argument("fisher_combine: p-value " + std::to_string(p) +
                                  " outside (0,1]");
    statistic += -2.0 * std::log(std::max(p, 1e-300));
  }
  return chi2_survival(statistic, 2 * static_cast<int>(pvals.size()));
}

}  // namespace gnnbench
