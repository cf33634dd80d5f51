#include "graphflow/gcn.hpp"

#include <cmath>
#include <string>

#include "graphflow/error.hpp"
#include "graphflow/optim.hpp"

namespace graphflow {

GcnParams init_gcn_params(std::size_t in_dim, std::size_t hidden_dim, std::size_t out_dim, int n_layers, Rng& rng) {
  if (n_layers < 1) throw InvalidArgument("a GCN needs at least one layer");
  GcnParams p;
  for (int k = 0; k < n_layers; ++k) {
    std::size_t rows = k == 0 ? in_dim : hidden_dim;
    std::size_t cols = k == n_layers - 1 ? out_dim : hidden_dim;
    p.weights.push_back(glorot_init(rows, cols, rng));
  }
  return p;
}

std::vector<Tensor> gcn_layers(const RowStochasticOperator& op, const std::shared_ptr<const FeatureMatrix>& features,
                               const GcnParams& params, const GcnOptions& options, Rng& rng) {
  if (params.weights.empty()) throw InvalidArgument("a GCN needs at least one layer");
  if (features->rows != op.n_nodes()) {
    throw ShapeError("feature rows (" + std::to_string(features->rows) + ") differ from node count (" +
                     std::to_string(op.n_nodes()) + ")");
  }
  const std::size_t k_layers = params.weights.size();
  std::vector<Tensor> outputs;
  outputs.reserve(k_layers);

  auto input = features;
  if (options.training && options.dropout_rate > 0.0) {
    input = std::make_shared<const FeatureMatrix>(dropout(*features, options.dropout_rate, true, rng));
  }
  Tensor x;
  for (std::size_t k = 0; k < k_layers; ++k) {
    const Tensor& w = params.weights[k];
    Tensor h = k == 0 ? spmm(op, sparse_matmul(input, w)) : matmul(spmm(op, x), w);
    if (k + 1 == k_layers) {
      outputs.push_back(h);
      break;
    }
    h = options.activation == Activation::kRelu ? relu(h) : sigmoid(h);
    outputs.push_back(h);
    x = dropout(h, options.dropout_rate, options.training, rng);
  }
  return outputs;
}

Tensor gcn_forward(const RowStochasticOperator& op, const std::shared_ptr<const FeatureMatrix>& features,
                   const GcnParams& params, const GcnOptions& options, Rng& rng) {
  return gcn_layers(op, features, params, options, rng).back();
}

std::vector<int> predict(const Tensor& logits) {
  const std::size_t c = logits.cols();
  std::vector<int> out(logits.rows(), 0);
  auto v = logits.values();
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    std::size_t best = 0;
    for (std::size_t j = 0; j < c; ++j) {
      double z = v[i * c + j];
      if (std::isnan(z)) throw InvalidArgument("NaN logit in row " + std::to_string(i));
      if (z > v[i * c + best]) best = j;
    }
    out[i] = static_cast<int>(best);
  }
  return out;
}

Tensor aggregate_step(const RowStochasticOperator& op, const Tensor& x) { return spmm(op, x); }

}  // namespace graphflow
