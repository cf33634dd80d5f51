#include "graphflow/adjacency.hpp"

#include <cmath>
#include <string>

#include "graphflow/error.hpp"
#include "graphflow/parallel.hpp"

namespace graphflow {
namespace {

void check_weights(const SparseGraph& graph, std::span<const double> w) {
  if (w.size() != graph.n_undirected_edges()) {
    throw InvalidArgument("expected " + std::to_string(graph.n_undirected_edges()) + " edge weights, got " +
                          std::to_string(w.size()));
  }
  for (std::size_t u = 0; u < w.size(); ++u) {
    if (!(w[u] > 0.0) || !std::isfinite(w[u])) {
      throw InvalidArgument("edge weight " + std::to_string(u) + " is not strictly positive: " +
                            std::to_string(w[u]));
    }
  }
}

// Returns per-entry normalized values and per-row degrees.
std::vector<double> normalize(const SparseGraph& g, std::span<const double> w, std::vector<double>& degree) {
  const auto rp = g.row_ptr();
  const auto uid = g.edge_uid();
  std::vector<double> vals(g.nnz());
  degree.assign(g.n_nodes(), 0.0);
  for (std::size_t i = 0; i < g.n_nodes(); ++i) {
    double d = 0.0;
    for (std::size_t e = rp[i]; e < rp[i + 1]; ++e) d += w[uid[e]];
    degree[i] = d;
    for (std::size_t e = rp[i]; e < rp[i + 1]; ++e) vals[e] = w[uid[e]] / d;
  }
  return vals;
}

}  // namespace

double RowStochasticOperator::at(NodeId i, NodeId j) const {
  std::size_t e = graph.find_entry(i, j);
  return e == SparseGraph::npos ? 0.0 : values.values()[e];
}

std::vector<double> RowStochasticOperator::to_dense() const {
  const std::size_t n = n_nodes();
  std::vector<double> out(n * n, 0.0);
  const auto rp = graph.row_ptr();
  const auto ci = graph.col_idx();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t e = rp[i]; e < rp[i + 1]; ++e) out[i * n + ci[e]] = values.values()[e];
  return out;
}

RowStochasticOperator normalized_adjacency(const SparseGraph& graph, std::span<const double> uid_weights) {
  check_weights(graph, uid_weights);
  std::vector<double> degree;
  auto vals = normalize(graph, uid_weights, degree);
  return {graph, Tensor::constant(graph.nnz(), 1, std::move(vals))};
}

RowStochasticOperator normalized_adjacency(const SparseGraph& graph, const Tensor& uid_weights) {
  if (uid_weights.cols() != 1) throw ShapeError("edge weights must be a column vector");
  check_weights(graph, uid_weights.values());
  std::vector<double> degree;
  auto vals = normalize(graph, uid_weights.values(), degree);
  auto wn = uid_weights.node_ptr();
  Tensor values = Tensor::make_result(
      graph.nnz(), 1, std::move(vals), {uid_weights}, [graph, wn, degree = std::move(degree)](detail::Node& self) {
        // T_e = w_e / d_i with d_i = sum of the row's weights:
        // dL/dw_e += g_e / d_i - (sum_f g_f w_f) / d_i^2 for every e in row i.
        const auto rp = graph.row_ptr();
        const auto uid = graph.edge_uid();
        auto& gw = wn->grad_buffer();
        const auto& w = wn->value;
        for (std::size_t i = 0; i < graph.n_nodes(); ++i) {
          const double d = degree[i];
          double dot = 0.0;
          for (std::size_t e = rp[i]; e < rp[i + 1]; ++e) dot += self.grad[e] * w[uid[e]];
          const double shared = dot / (d * d);
          for (std::size_t e = rp[i]; e < rp[i + 1]; ++e) gw[uid[e]] += self.grad[e] / d - shared;
        }
      });
  return {graph, values};
}

RowStochasticOperator uniform_adjacency(const SparseGraph& graph) {
  std::vector<double> ones(graph.n_undirected_edges(), 1.0);
  return normalized_adjacency(graph, ones);
}

std::vector<double> apply(const RowStochasticOperator& op, std::span<const double> x, std::size_t cols) {
  const SparseGraph& g = op.graph;
  if (x.size() != g.n_nodes() * cols) throw ShapeError("apply: buffer does not match node count");
  const auto rp = g.row_ptr();
  const auto ci = g.col_idx();
  const auto val = op.values.values();
  std::vector<double> y(x.size(), 0.0);
  parallel_rows(g.n_nodes(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double* yi = &y[i * cols];
      for (std::size_t e = rp[i]; e < rp[i + 1]; ++e) {
        const double t = val[e];
        const double* xj = &x[static_cast<std::size_t>(ci[e]) * cols];
        for (std::size_t c = 0; c < cols; ++c) yi[c] += t * xj[c];
      }
    }
  });
  return y;
}

Tensor spmm(const RowStochasticOperator& op, const Tensor& x) {
  if (x.rows() != op.n_nodes()) {
    throw ShapeError("spmm: operator has " + std::to_string(op.n_nodes()) + " columns, input has " +
                     std::to_string(x.rows()) + " rows");
  }
  const std::size_t cols = x.cols();
  auto y = apply(op, x.values(), cols);
  auto xn = x.node_ptr();
  auto vn = op.values.node_ptr();
  const SparseGraph graph = op.graph;
  return Tensor::make_result(
      x.rows(), cols, std::move(y), {x, op.values}, [graph, xn, vn, cols](detail::Node& self) {
        const auto rp = graph.row_ptr();
        const auto ci = graph.col_idx();
        const auto rev = graph.reverse_entry();
        const auto& val = vn->value;
        const auto& g = self.grad;
        if (xn->requires_grad) {
          // Transposed product via mirrored entries: row j of T^T g
          // gathers T[i, j] g[i] over the stored neighbors i of j.
          auto& gx = xn->grad_buffer();
          parallel_rows(graph.n_nodes(), [&](std::size_t begin, std::size_t end) {
            for (std::size_t j = begin; j < end; ++j) {
              double* gj = &gx[j * cols];
              for (std::size_t e = rp[j]; e < rp[j + 1]; ++e) {
                const double t = val[rev[e]];
                const double* gi = &g[static_cast<std::size_t>(ci[e]) * cols];
                for (std::size_t c = 0; c < cols; ++c) gj[c] += t * gi[c];
              }
            }
          });
        }
        if (vn->requires_grad) {
          auto& gv = vn->grad_buffer();
          const auto& xv = xn->value;
          parallel_rows(graph.n_nodes(), [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
              const double* gi = &g[i * cols];
              for (std::size_t e = rp[i]; e < rp[i + 1]; ++e) {
                const double* xj = &xv[static_cast<std::size_t>(ci[e]) * cols];
                double s = 0.0;
                for (std::size_t c = 0; c < cols; ++c) s += gi[c] * xj[c];
                gv[e] += s;
              }
            }
          });
        }
      });
}

}  // namespace graphflow
