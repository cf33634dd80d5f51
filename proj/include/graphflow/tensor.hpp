#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "graphflow/graph.hpp"
#include "graphflow/random.hpp"

namespace graphflow {

namespace detail {

// One recorded value. Interior nodes keep their inputs alive through
// `parents` and know how to push their gradient back through `backward`.
struct Node {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  std::uint64_t seq = 0;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  bool is_leaf() const { return !backward; }
  std::vector<double>& grad_buffer() {
    if (grad.empty()) grad.assign(value.size(), 0.0);
    return grad;
  }
};

}  // namespace detail

// Dense row-major matrix of doubles taking part in reverse-mode
// differentiation. Operations are recorded as they run (define-by-run);
// each result remembers its inputs and a backward rule, and `seq` orders
// records globally so the tape is recovered by sorting.
//
// Tensor is a handle: copies alias the same node.
class Tensor {
 public:
  Tensor();

  static Tensor constant(std::size_t rows, std::size_t cols, std::vector<double> values);
  static Tensor zeros(std::size_t rows, std::size_t cols);
  // Leaf that accumulates gradients.
  static Tensor parameter(std::size_t rows, std::size_t cols, std::vector<double> values);
  static Tensor scalar(double v);

  std::size_t rows() const { return node_->rows; }
  std::size_t cols() const { return node_->cols; }
  std::size_t size() const { return node_->value.size(); }
  bool requires_grad() const { return node_->requires_grad; }
  bool is_leaf() const { return node_->is_leaf(); }

  std::span<const double> values() const { return node_->value; }
  // Writable storage; meant for leaves (optimizer updates, finite
  // differences). Mutating an interior value does not re-run anything.
  std::span<double> mutable_values() { return node_->value; }
  double at(std::size_t r, std::size_t c) const { return node_->value[r * node_->cols + c]; }
  double item() const;

  // Empty until a backward pass reaches this tensor.
  std::span<const double> grad() const { return node_->grad; }
  void zero_grad();

  // Constant copy of the current values, cut from the tape.
  Tensor detach() const;

  bool same_node(const Tensor& other) const { return node_ == other.node_; }

  // Internal: build a recorded result.
  static Tensor make_result(std::size_t rows, std::size_t cols, std::vector<double> values,
                            std::vector<Tensor> inputs, std::function<void(detail::Node&)> backward);
  detail::Node& node() const { return *node_; }
  const std::shared_ptr<detail::Node>& node_ptr() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> n) : node_(std::move(n)) {}
  std::shared_ptr<detail::Node> node_;
};

// Propagates d(loss)/d(.) to every tensor recorded before `loss` that
// requires gradients. Leaf gradients accumulate across calls; interior
// gradients are recomputed each call. Throws ShapeError unless loss is 1x1.
void backward(const Tensor& loss);

Tensor matmul(const Tensor& a, const Tensor& b);
// x (constant sparse) times w.
Tensor sparse_matmul(std::shared_ptr<const FeatureMatrix> x, const Tensor& w);
Tensor add(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor softplus(const Tensor& x);
Tensor sum(const Tensor& x);
// Sum of squared entries.
Tensor squared_norm(const Tensor& x);
// Single entry as a 1x1 tensor.
Tensor pick(const Tensor& x, std::size_t row, std::size_t col);
// Rows where mask is set are taken from `source`, the rest from `x`.
Tensor reset_rows(const Tensor& x, const std::vector<bool>& mask, const Tensor& source);

// Inverted dropout: survivors are scaled by 1/(1-rate). Identity when
// training is false or rate is 0.
Tensor dropout(const Tensor& x, double rate, bool training, Rng& rng);
FeatureMatrix dropout(const FeatureMatrix& x, double rate, bool training, Rng& rng);

// Mean over masked rows of -log softmax(logits[i])[labels[i]].
Tensor masked_softmax_cross_entropy(const Tensor& logits, std::span<const int> labels,
                                    const std::vector<bool>& mask);

// Mean over masked rows of -log(p[i][labels[i]] / sum_j p[i][j]) for
// nonnegative rows. A tiny additive floor makes an all-zero row behave as
// the uniform distribution.
Tensor masked_distribution_cross_entropy(const Tensor& probs, std::span<const int> labels,
                                         const std::vector<bool>& mask);

// ln(1 + e^x) without overflow.
double softplus(double x);
// Inverse of softplus for y > 0.
double softplus_inverse(double y);

}  // namespace graphflow
