#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "gnnbench/tape.hpp"

namespace gnnbench {

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-4;  // coupled L2: added to the gradient
};

/// Adam with bias correction. step() consumes the accumulated gradients of
/// the registered parameters, updates their values in place and zeroes the
/// gradients for the next iteration.
class AdamState {
 public:
  AdamState(std::vector<Tensor> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const Tensor& p : params_) {
      if (!p.valid() || !p.tape->requires_grad(p.id))
        throw std::invalid_argument("AdamState: parameters must require grad");
      m_.emplace_back(p.rows(), p.cols());
      v_.emplace_back(p.rows(), p.cols());
    }
  }

  void step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
    for (std::size_t k = 0; k < params_.size(); ++k) {
      Tensor& p = params_[k];
      Matrix& w = p.value_mut();
      const Matrix& grad = p.grad();
      Matrix& m = m_[k];
      Matrix& v = v_[k];
      for (int i = 0; i < w.rows(); ++i)
        for (int j = 0; j < w.cols(); ++j) {
          const double g = grad(i, j) + cfg_.weight_decay * w(i, j);
          m(i, j) = cfg_.beta1 * m(i, j) + (1.0 - cfg_.beta1) * g;
          v(i, j) = cfg_.beta2 * v(i, j) + (1.0 - cfg_.beta2) * g * g;
          const double m_hat = m(i, j) / bc1;
          const double v_hat = v(i, j) / bc2;
          w(i, j) -= cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
        }
      if (!w.all_finite()) throw std::runtime_error("AdamState::step: non-finite parameter");
    }
    for (Tensor& p : params_) p.grad_mut().set_zero();
  }

  long iterations() const { return t_; }

 private:
  std::vector<Tensor> params_;
  std::vector<Matrix> m_, v_;
  AdamConfig cfg_;
  long t_ = 0;
};

}  // namespace gnnbench
