#pragma once

#include <span>
#include <vector>

#include "graphflow/graph.hpp"
#include "graphflow/tensor.hpp"

namespace graphflow {

// D^{-1}A over a SparseGraph: one value per stored entry (nnz x 1), rows
// summing to 1. The values tensor is differentiable when the operator was
// built from differentiable edge weights.
struct RowStochasticOperator {
  SparseGraph graph;
  Tensor values;

  std::size_t n_nodes() const { return graph.n_nodes(); }
  // Entry (i, j), or 0 when absent.
  double at(NodeId i, NodeId j) const;
  // Dense n x n copy, for small-graph oracles.
  std::vector<double> to_dense() const;
};

// Normalizes per-uid positive weights. Throws InvalidArgument when a
// weight is not strictly positive or the weight count differs from the
// number of undirected edges.
RowStochasticOperator normalized_adjacency(const SparseGraph& graph, std::span<const double> uid_weights);
// Differentiable variant; `uid_weights` is (n_undirected_edges x 1).
RowStochasticOperator normalized_adjacency(const SparseGraph& graph, const Tensor& uid_weights);

// Uniform weights (every edge and loop weight 1).
RowStochasticOperator uniform_adjacency(const SparseGraph& graph);

// y[i] = sum_j T[i, j] x[j]. Differentiable in x and in the operator's
// values. Parallel over rows (see parallel.hpp) with a fixed per-row
// summation order.
Tensor spmm(const RowStochasticOperator& op, const Tensor& x);

// Plain (tape-free) product on a row-major n x cols buffer.
std::vector<double> apply(const RowStochasticOperator& op, std::span<const double> x, std::size_t cols);

}  // namespace graphflow
