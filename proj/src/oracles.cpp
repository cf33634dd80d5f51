#include "graphflow/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>
#include <unordered_map>

#include "graphflow/error.hpp"
#include "graphflow/lpa.hpp"

namespace graphflow {
namespace {

void check_node(const SparseGraph& g, NodeId v, const char* what) {
  if (v >= g.n_nodes()) throw BoundsError(std::string(what) + " node " + std::to_string(v) + " out of range");
}

void check_k(int k) {
  if (k < 1) throw InvalidArgument("horizon k must be at least 1");
}

void check_influence_query(const SparseGraph& g, NodeId a, NodeId b, const std::vector<bool>& labeled) {
  check_node(g, a, "target");
  check_node(g, b, "source");
  if (labeled.size() != g.n_nodes()) throw ShapeError("labeled mask length differs from node count");
  if (labeled[a]) throw InvalidArgument("label influence needs an unlabeled target node");
  if (!labeled[b]) throw InvalidArgument("label influence needs a labeled source node");
}

double paths_from(const RowStochasticOperator& op, NodeId v, int steps, NodeId b) {
  if (steps == 0) return v == b ? 1.0 : 0.0;
  const auto& g = op.graph;
  auto cols = g.col_idx();
  auto vals = op.values.values();
  double s = 0.0;
  for (std::size_t e = g.row_begin(v); e < g.row_end(v); ++e) s += vals[e] * paths_from(op, cols[e], steps - 1, b);
  return s;
}

}  // namespace

double walk_probability_by_paths(const SparseGraph& graph, std::span<const double> weights, int k, NodeId a,
                                 NodeId b) {
  check_k(k);
  check_node(graph, a, "start");
  check_node(graph, b, "end");
  return paths_from(normalized_adjacency(graph, weights), a, k, b);
}

double walk_probability_by_power(const SparseGraph& graph, std::span<const double> weights, int k, NodeId a,
                                 NodeId b) {
  check_k(k);
  check_node(graph, a, "start");
  check_node(graph, b, "end");
  const auto op = normalized_adjacency(graph, weights);
  auto cols = graph.col_idx();
  auto vals = op.values.values();
  // Row vector e_a T^k.
  std::vector<double> p(graph.n_nodes(), 0.0);
  p[a] = 1.0;
  for (int t = 0; t < k; ++t) {
    std::vector<double> next(p.size(), 0.0);
    for (NodeId i = 0; i < p.size(); ++i) {
      if (p[i] == 0.0) continue;
      for (std::size_t e = graph.row_begin(i); e < graph.row_end(i); ++e) next[cols[e]] += p[i] * vals[e];
    }
    p = std::move(next);
  }
  return p[b];
}

double walk_probability(const SparseGraph& graph, std::span<const double> weights, int k, NodeId a, NodeId b) {
  return graph.n_nodes() <= 10 ? walk_probability_by_paths(graph, weights, k, a, b)
                               : walk_probability_by_power(graph, weights, k, a, b);
}

std::vector<double> feature_influence_row(const SparseGraph& graph, std::span<const double> weights, int k,
                                          NodeId a) {
  check_k(k);
  check_node(graph, a, "target");
  const std::size_t n = graph.n_nodes();
  constexpr std::size_t d = 2;
  const auto op = normalized_adjacency(graph, weights);
  Tensor x = Tensor::parameter(n, d, std::vector<double>(n * d, 0.0));
  Tensor y = x;
  for (int t = 0; t < k; ++t) y = spmm(op, y);

  std::vector<double> influence(n, 0.0);
  for (std::size_t r = 0; r < d; ++r) {
    x.zero_grad();
    backward(pick(y, a, r));
    auto g = x.grad();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < d; ++c) influence[i] += std::abs(g[i * d + c]);
  }
  double total = 0.0;
  for (double v : influence) total += v;
  if (total > 0.0)
    for (double& v : influence) v /= total;
  return influence;
}

double feature_influence_jacobian(const SparseGraph& graph, std::span<const double> weights, int k, NodeId a,
                                  NodeId b) {
  check_node(graph, b, "source");
  return feature_influence_row(graph, weights, k, a)[b];
}

std::vector<double> label_influence_row(const SparseGraph& graph, std::span<const double> weights, int k,
                                        NodeId a, const std::vector<bool>& labeled) {
  check_k(k);
  check_node(graph, a, "target");
  if (labeled.size() != graph.n_nodes()) throw ShapeError("labeled mask length differs from node count");
  if (labeled[a]) throw InvalidArgument("label influence needs an unlabeled target node");
  const std::size_t n = graph.n_nodes();
  const auto op = normalized_adjacency(graph, weights);
  std::vector<double> init(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (labeled[i]) init[i] = 1.0;
  Tensor y0 = Tensor::parameter(n, 1, std::move(init));
  Tensor y = y0;
  for (int t = 0; t < k; ++t) y = reset_rows(spmm(op, y), labeled, y0);
  backward(pick(y, a, 0));
  std::vector<double> out(n, 0.0);
  auto g = y0.grad();
  for (std::size_t i = 0; i < n; ++i)
    if (labeled[i] && !g.empty()) out[i] = g[i];
  return out;
}

double label_influence_gradient(const SparseGraph& graph, std::span<const double> weights, int k, NodeId a,
                                NodeId b, const std::vector<bool>& labeled) {
  check_influence_query(graph, a, b, labeled);
  return label_influence_row(graph, weights, k, a, labeled)[b];
}

double unlabeled_path_sum(const SparseGraph& graph, std::span<const double> weights, int k, NodeId a, NodeId b,
                          const std::vector<bool>& labeled) {
  check_k(k);
  check_influence_query(graph, a, b, labeled);
  const auto op = normalized_adjacency(graph, weights);
  auto cols = graph.col_idx();
  auto vals = op.values.values();
  // p[z]: probability of walks from a that reach z at the current step
  // having visited only unlabeled nodes before z.
  std::vector<double> p(graph.n_nodes(), 0.0);
  p[a] = 1.0;
  double total = 0.0;
  for (int j = 1; j <= k; ++j) {
    std::vector<double> next(p.size(), 0.0);
    for (NodeId i = 0; i < p.size(); ++i) {
      if (p[i] == 0.0 || labeled[i]) continue;
      for (std::size_t e = graph.row_begin(i); e < graph.row_end(i); ++e) next[cols[e]] += p[i] * vals[e];
    }
    total += next[b];
    p = std::move(next);
  }
  return total;
}

Theorem2Result check_theorem2(const SparseGraph& graph, std::span<const double> weights, int k, NodeId a, NodeId b,
                              double beta, std::size_t trials, Rng& rng) {
  check_k(k);
  check_node(graph, a, "target");
  check_node(graph, b, "source");
  if (a == b) throw InvalidArgument("theorem 2 needs distinct nodes");
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidArgument("beta must lie in (0, 1)");
  if (trials < 2) throw InvalidArgument("need at least two trials");
  const std::size_t n = graph.n_nodes();

  Theorem2Result r;
  r.trials = trials;
  for (int j = 1; j <= k; ++j) r.rhs += std::pow(beta, j) * feature_influence_jacobian(graph, weights, j, a, b);

  // Small graphs revisit the same labelings many times.
  const bool memo = n <= 24;
  std::unordered_map<std::uint32_t, double> cache;
  std::vector<bool> labeled(n);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    std::uint32_t key = 0;
    for (std::size_t i = 0; i < n; ++i) {
      labeled[i] = i == b || !rng.bernoulli(beta);
      if (labeled[i] && i < 32) key |= std::uint32_t{1} << i;
    }
    double v = 0.0;
    if (!labeled[a]) {
      auto it = memo ? cache.find(key) : cache.end();
      if (it != cache.end()) {
        v = it->second;
      } else {
        v = label_influence_gradient(graph, weights, k, a, b, labeled);
        if (memo) cache.emplace(key, v);
      }
    }
    sum += v;
    sum_sq += v * v;
  }
  const double m = static_cast<double>(trials);
  r.lhs = sum / m;
  const double var = std::max(0.0, (sum_sq - m * r.lhs * r.lhs) / (m - 1.0));
  r.std_err = std::sqrt(var / m);
  r.abs_err = std::abs(r.lhs - r.rhs);
  return r;
}

double expected_label_influence(const SparseGraph& graph, std::span<const double> weights, int k, NodeId a,
                                NodeId b, double beta) {
  check_node(graph, a, "target");
  check_node(graph, b, "source");
  const std::size_t n = graph.n_nodes();
  if (n > 20) throw InvalidArgument("labeling enumeration is limited to 20 nodes");
  if (a == b) throw InvalidArgument("distinct nodes required");
  std::vector<NodeId> others;
  for (NodeId i = 0; i < n; ++i)
    if (i != b) others.push_back(i);
  std::vector<bool> labeled(n);
  double expectation = 0.0;
  for (std::uint32_t bits = 0; bits < (std::uint32_t{1} << others.size()); ++bits) {
    double p = 1.0;
    labeled.assign(n, false);
    labeled[b] = true;
    for (std::size_t q = 0; q < others.size(); ++q) {
      const bool unl = (bits >> q) & 1u;
      labeled[others[q]] = !unl;
      p *= unl ? beta : 1.0 - beta;
    }
    if (labeled[a]) continue;
    expectation += p * unlabeled_path_sum(graph, weights, k, a, b, labeled);
  }
  return expectation;
}

Theorem3Result check_theorem3(const SparseGraph& graph, std::span<const double> weights, int k, NodeId a,
                              const std::vector<bool>& labeled, std::span<const int> labels, int n_classes) {
  check_k(k);
  check_node(graph, a, "target");
  if (labels.size() != graph.n_nodes() || labeled.size() != graph.n_nodes()) {
    throw ShapeError("labels/mask length differs from node count");
  }
  std::vector<bool> mask = labeled;
  mask[a] = false;
  const auto c = static_cast<std::size_t>(n_classes);

  Theorem3Result r;
  r.influence.assign(c, 0.0);
  const auto row = label_influence_row(graph, weights, k, a, mask);
  for (std::size_t b = 0; b < row.size(); ++b)
    if (mask[b]) r.influence[static_cast<std::size_t>(labels[b])] += row[b];

  const auto soft = lpa_infer(normalized_adjacency(graph, weights), labels, n_classes, mask, k);
  auto ya = soft.row(a);
  r.lpa_mass.assign(ya.begin(), ya.end());

  double si = 0.0, sm = 0.0;
  for (std::size_t i = 0; i < c; ++i) {
    si += r.influence[i];
    sm += r.lpa_mass[i];
  }
  if (si == 0.0 || sm == 0.0) {
    r.degenerate = true;
    r.max_abs_err = std::abs(si - sm);
    return r;
  }
  for (std::size_t i = 0; i < c; ++i) {
    r.max_abs_err = std::max(r.max_abs_err, std::abs(r.influence[i] / si - r.lpa_mass[i] / sm));
  }
  return r;
}

double dirichlet_energy(const RowStochasticOperator& op, std::span<const double> x, std::size_t cols) {
  const auto& g = op.graph;
  if (x.size() != g.n_nodes() * cols) throw ShapeError("dirichlet_energy: shape mismatch");
  auto col_idx = g.col_idx();
  auto vals = op.values.values();
  double total = 0.0;
  for (NodeId i = 0; i < g.n_nodes(); ++i) {
    for (std::size_t e = g.row_begin(i); e < g.row_end(i); ++e) {
      const NodeId j = col_idx[e];
      double sq = 0.0;
      for (std::size_t c = 0; c < cols; ++c) {
        const double diff = x[i * cols + c] - x[j * cols + c];
        sq += diff * diff;
      }
      total += vals[e] * sq;
    }
  }
  return 0.5 * total;
}

Theorem4Result check_theorem4(const SparseGraph& graph, std::span<const double> weights, std::span<const double> x,
                              std::size_t cols) {
  const auto op = normalized_adjacency(graph, weights);
  const auto h = apply(op, x, cols);
  return {dirichlet_energy(op, x, cols), dirichlet_energy(op, h, cols)};
}

SmoothingReport check_theorem1_linear(const SparseGraph& graph, std::span<const double> weights,
                                      std::span<const double> features, std::size_t dim,
                                      std::span<const double> w_map) {
  const std::size_t n = graph.n_nodes();
  if (features.size() != n * dim || w_map.size() != dim) throw ShapeError("theorem 1: shape mismatch");
  const auto op = normalized_adjacency(graph, weights);
  const auto avg = apply(op, features, dim);

  std::vector<double> y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < dim; ++c) y[i] += features[i * dim + c] * w_map[c];
  const auto y_avg = apply(op, y, 1);

  SmoothingReport r;
  for (double w : w_map) r.lipschitz += w * w;
  r.lipschitz = std::sqrt(r.lipschitz);
  r.residual.resize(n * dim);
  r.residual_norm.resize(n);
  r.label_residual.resize(n);
  r.bound.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sq = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
      const double eps = features[i * dim + c] - avg[i * dim + c];
      r.residual[i * dim + c] = eps;
      sq += eps * eps;
    }
    r.residual_norm[i] = std::sqrt(sq);
    r.label_residual[i] = std::abs(y[i] - y_avg[i]);
    r.bound[i] = r.lipschitz * r.residual_norm[i];
    r.max_violation = std::max(r.max_violation, r.label_residual[i] - r.bound[i]);
  }
  return r;
}

double intra_class_influence(const SparseGraph& graph, std::span<const double> weights, int k,
                             std::span<const int> labels, int class_i, const std::vector<bool>& labeled) {
  if (labels.size() != graph.n_nodes() || labeled.size() != graph.n_nodes()) {
    throw ShapeError("labels/mask length differs from node count");
  }
  double total = 0.0;
  for (NodeId a = 0; a < graph.n_nodes(); ++a) {
    if (labeled[a] || labels[a] != class_i) continue;
    const auto row = label_influence_row(graph, weights, k, a, labeled);
    for (NodeId b = 0; b < graph.n_nodes(); ++b)
      if (labeled[b] && labels[b] == class_i) total += row[b];
  }
  return total;
}

double intra_class_feature_influence(const SparseGraph& graph, std::span<const double> weights, int k,
                                     std::span<const int> labels, int class_i) {
  if (labels.size() != graph.n_nodes()) throw ShapeError("labels length differs from node count");
  double total = 0.0;
  for (NodeId a = 0; a < graph.n_nodes(); ++a) {
    if (labels[a] != class_i) continue;
    const auto row = feature_influence_row(graph, weights, k, a);
    for (NodeId b = 0; b < graph.n_nodes(); ++b)
      if (labels[b] == class_i) total += row[b];
  }
  return total;
}

std::vector<int> hop_distances(const SparseGraph& graph, NodeId a) {
  check_node(graph, a, "start");
  std::vector<int> dist(graph.n_nodes(), -1);
  std::deque<NodeId> queue{a};
  dist[a] = 0;
  auto cols = graph.col_idx();
  while (!queue.empty()) {
    const NodeId v = queue.front();
    queue.pop_front();
    for (std::size_t e = graph.row_begin(v); e < graph.row_end(v); ++e) {
      if (dist[cols[e]] < 0) {
        dist[cols[e]] = dist[v] + 1;
        queue.push_back(cols[e]);
      }
    }
  }
  return dist;
}

}  // namespace graphflow
