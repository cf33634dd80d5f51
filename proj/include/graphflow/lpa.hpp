#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "graphflow/adjacency.hpp"

namespace graphflow {

// Node-by-class soft label matrix, row-major.
struct SoftLabels {
  std::size_t n_nodes = 0;
  std::size_t n_classes = 0;
  std::vector<double> values;

  std::span<const double> row(std::size_t i) const { return {values.data() + i * n_classes, n_classes}; }
  // Row argmax, ties toward the lower class; an all-zero row predicts 0.
  std::vector<int> predict() const;
  // Rows that received no label mass.
  std::vector<bool> unreached() const;
};

// Classic label propagation: Y <- T Y, then clamped rows are reset to their
// one-hot labels, `iters` times. Throws InvalidArgument on an empty clamp
// set, a clamped node without a label, or iters < 1.
SoftLabels lpa_infer(const RowStochasticOperator& op, std::span<const int> labels, int n_classes,
                     const std::vector<bool>& clamp_mask, int iters);

SoftLabels lpa_infer(const SparseGraph& graph, std::span<const int> labels, int n_classes,
                     const std::vector<bool>& clamp_mask, std::span<const double> edge_weights, int iters);

// Differentiable LPA objective over the operator's values.
//
// Runs the same clamped iteration as lpa_infer, except that the final
// step's output is read before the reset: otherwise every clamped node in
// the loss mask would reproduce its own label exactly. The loss is the
// mean cross-entropy of the renormalized rows of loss_mask nodes. An empty
// clamp set is allowed and yields uniform predictions (loss ln c).
Tensor lpa_loss(const RowStochasticOperator& op, std::span<const int> labels, int n_classes,
                const std::vector<bool>& clamp_mask, const std::vector<bool>& loss_mask, int iters);

// floor(ratio * |train|) training nodes drawn uniformly as propagation
// sources.
std::vector<bool> lpa_clamp_subset(const std::vector<bool>& train_mask, double ratio, std::uint64_t seed);

// Fraction of masked nodes whose prediction equals the label.
double accuracy(std::span<const int> predictions, std::span<const int> labels, const std::vector<bool>& mask);

}  // namespace graphflow
