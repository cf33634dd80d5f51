#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "graphflow/random.hpp"
#include "graphflow/tensor.hpp"

namespace graphflow {

// Glorot/Xavier uniform: samples in [-s, s], s = sqrt(6 / (rows + cols)).
Tensor glorot_init(std::size_t rows, std::size_t cols, Rng& rng);

// Uniform samples in [lo, hi], as a trainable parameter.
Tensor uniform_init(std::size_t rows, std::size_t cols, double lo, double hi, Rng& rng);

struct AdamConfig {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias correction. Moments are allocated lazily per parameter in
// the order parameters are passed to the first step.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  // Applies one update using each parameter's accumulated gradient; a
  // parameter with no gradient is treated as having a zero gradient.
  void step(std::span<Tensor> params);

  std::uint64_t steps() const { return step_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  std::uint64_t step_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

// weight * sum of squared Frobenius norms. Pass only transformation
// matrices; edge parameters are regularized elsewhere.
Tensor l2_penalty(std::span<const Tensor> params, double weight);

}  // namespace graphflow
