#pragma once

#include <memory>
#include <vector>

#include "graphflow/adjacency.hpp"
#include "graphflow/random.hpp"

namespace graphflow {

enum class Activation { kRelu, kSigmoid };

// Transformation matrices W^(0..K-1); layer k maps dims[k] -> dims[k+1].
// No biases.
struct GcnParams {
  std::vector<Tensor> weights;

  std::size_t n_layers() const { return weights.size(); }
};

// Glorot-initialized K-layer parameters: in_dim -> hidden ... -> out_dim.
GcnParams init_gcn_params(std::size_t in_dim, std::size_t hidden_dim, std::size_t out_dim, int n_layers, Rng& rng);

struct GcnOptions {
  double dropout_rate = 0.0;
  bool training = false;
  Activation activation = Activation::kRelu;
};

// Every layer's output, last one being the logits (no activation):
//   X0 = dropout(features)
//   X(k+1) = act(T X(k) W(k)), dropout applied after hidden activations.
// The first layer multiplies the sparse features by W(0) before
// aggregating, which is the same product in a cheaper order.
std::vector<Tensor> gcn_layers(const RowStochasticOperator& op, const std::shared_ptr<const FeatureMatrix>& features,
                               const GcnParams& params, const GcnOptions& options, Rng& rng);

Tensor gcn_forward(const RowStochasticOperator& op, const std::shared_ptr<const FeatureMatrix>& features,
                   const GcnParams& params, const GcnOptions& options, Rng& rng);

// Row argmax with ties to the lowest index. Throws InvalidArgument on NaN.
std::vector<int> predict(const Tensor& logits);

// h = T x, the aggregation half of a GCN layer.
Tensor aggregate_step(const RowStochasticOperator& op, const Tensor& x);

}  // namespace graphflow
