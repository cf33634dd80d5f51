#include "graphflow/optim.hpp"

#include <cmath>
#include <string>

#include "graphflow/error.hpp"

namespace graphflow {

Tensor uniform_init(std::size_t rows, std::size_t cols, double lo, double hi, Rng& rng) {
  if (rows == 0 || cols == 0) throw InvalidArgument("cannot initialize a tensor with a zero dimension");
  std::vector<double> v(rows * cols);
  for (double& x : v) x = rng.uniform(lo, hi);
  return Tensor::parameter(rows, cols, std::move(v));
}

Tensor glorot_init(std::size_t rows, std::size_t cols, Rng& rng) {
  if (rows == 0 || cols == 0) throw InvalidArgument("cannot initialize a tensor with a zero dimension");
  const double s = std::sqrt(6.0 / static_cast<double>(rows + cols));
  return uniform_init(rows, cols, -s, s, rng);
}

void Adam::step(std::span<Tensor> params) {
  if (m_.empty()) {
    for (const Tensor& p : params) {
      m_.emplace_back(p.size(), 0.0);
      v_.emplace_back(p.size(), 0.0);
    }
  }
  if (params.size() != m_.size()) {
    throw ShapeError("Adam: expected " + std::to_string(m_.size()) + " parameters, got " +
                     std::to_string(params.size()));
  }
  ++step_;
  const double t = static_cast<double>(step_);
  const double bc1 = 1.0 - std::pow(config_.beta1, t);
  const double bc2 = 1.0 - std::pow(config_.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = params[k];
    if (p.size() != m_[k].size()) throw ShapeError("Adam: parameter " + std::to_string(k) + " changed shape");
    auto g = p.grad();
    auto& m = m_[k];
    auto& v = v_[k];
    auto w = p.mutable_values();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = g.empty() ? 0.0 : g[i];
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * gi;
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * gi * gi;
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      w[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

Tensor l2_penalty(std::span<const Tensor> params, double weight) {
  if (weight < 0.0) throw InvalidArgument("L2 weight must be nonnegative");
  Tensor total = Tensor::scalar(0.0);
  for (const Tensor& p : params) total = add(total, squared_norm(p));
  return scale(total, weight);
}

}  // namespace graphflow
