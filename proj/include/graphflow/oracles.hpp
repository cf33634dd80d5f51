#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "graphflow/adjacency.hpp"
#include "graphflow/random.hpp"

// Brute-force reference computations on small graphs. `weights` is always
// one positive value per undirected edge uid; the operator is their row
// normalization.
namespace graphflow {

// (T^k)[a, b] as a sum over every length-k walk a -> b (n <= 10), or by
// repeated vector-matrix products for larger graphs.
double walk_probability(const SparseGraph& graph, std::span<const double> weights, int k, NodeId a, NodeId b);
double walk_probability_by_paths(const SparseGraph& graph, std::span<const double> weights, int k, NodeId a,
                                 NodeId b);
double walk_probability_by_power(const SparseGraph& graph, std::span<const double> weights, int k, NodeId a,
                                 NodeId b);

// Normalized feature influence of every node on `a` after k linear
// layers (W = I, identity activation), read from the entrywise L1 norm of
// the tape Jacobian d x_a^(k) / d x_b.
std::vector<double> feature_influence_row(const SparseGraph& graph, std::span<const double> weights, int k,
                                          NodeId a);
double feature_influence_jacobian(const SparseGraph& graph, std::span<const double> weights, int k, NodeId a,
                                  NodeId b);

// d y_a^(k) / d y_b for every b, differentiating k clamped LPA iterations
// on scalar labels. Requires `a` unlabeled; entries for unlabeled b are 0.
std::vector<double> label_influence_row(const SparseGraph& graph, std::span<const double> weights, int k,
                                        NodeId a, const std::vector<bool>& labeled);
// Throws InvalidArgument if a is labeled or b is not.
double label_influence_gradient(const SparseGraph& graph, std::span<const double> weights, int k, NodeId a,
                                NodeId b, const std::vector<bool>& labeled);

// Total probability of walks a -> b of length 1..k whose nodes, except the
// final b, are all unlabeled. Same preconditions as above.
double unlabeled_path_sum(const SparseGraph& graph, std::span<const double> weights, int k, NodeId a, NodeId b,
                          const std::vector<bool>& labeled);

struct Theorem2Result {
  double lhs = 0.0;
  double rhs = 0.0;
  double abs_err = 0.0;
  double std_err = 0.0;
  std::size_t trials = 0;
};

// Monte Carlo over labelings: b is labeled, every other node (a included)
// is unlabeled with probability beta. Influence is zero whenever a comes
// out labeled, since its value is then reset every iteration.
// rhs = sum_{j<=k} beta^j * feature influence(a, b; j).
Theorem2Result check_theorem2(const SparseGraph& graph, std::span<const double> weights, int k, NodeId a, NodeId b,
                              double beta, std::size_t trials, Rng& rng);

// Exact expectation of the same quantity by enumerating every labeling of
// the nodes other than b (n <= 20).
double expected_label_influence(const SparseGraph& graph, std::span<const double> weights, int k, NodeId a,
                                NodeId b, double beta);

struct Theorem3Result {
  std::vector<double> influence;  // per class: sum of label influence from labeled nodes of that class
  std::vector<double> lpa_mass;   // per class: y_a^(k) from one-hot LPA
  double max_abs_err = 0.0;       // between the two after normalizing to unit sum
  bool degenerate = false;        // no label mass reaches a
};

// `a` is treated as unlabeled regardless of `labeled`.
Theorem3Result check_theorem3(const SparseGraph& graph, std::span<const double> weights, int k, NodeId a,
                              const std::vector<bool>& labeled, std::span<const int> labels, int n_classes);

// 1/2 sum_ij T[i, j] ||x_i - x_j||^2 over a row-major n x cols matrix.
double dirichlet_energy(const RowStochasticOperator& op, std::span<const double> x, std::size_t cols);

struct Theorem4Result {
  double before = 0.0;
  double after = 0.0;
};

// Energy of x and of its aggregation T x.
Theorem4Result check_theorem4(const SparseGraph& graph, std::span<const double> weights, std::span<const double> x,
                              std::size_t cols);

struct SmoothingReport {
  std::vector<double> residual;        // n x d, eps_i = x_i - sum_j T_ij x_j
  std::vector<double> residual_norm;   // ||eps_i||_2
  std::vector<double> label_residual;  // |y_i - sum_j T_ij y_j|, y = x w
  double lipschitz = 0.0;              // ||w||_2
  std::vector<double> bound;           // L ||eps_i||_2
  double max_violation = 0.0;          // max(label_residual - bound), clipped at 0
};

// Smoothing bound for the linear labeling y = x^T w, where the remainder
// term vanishes.
SmoothingReport check_theorem1_linear(const SparseGraph& graph, std::span<const double> weights,
                                      std::span<const double> features, std::size_t dim,
                                      std::span<const double> w_map);

// Sum of label influence over unlabeled a and labeled b that both carry
// class_i.
double intra_class_influence(const SparseGraph& graph, std::span<const double> weights, int k,
                             std::span<const int> labels, int class_i, const std::vector<bool>& labeled);

// Feature-side analog: normalized feature influence summed over all
// ordered pairs (a, b) of class_i nodes.
double intra_class_feature_influence(const SparseGraph& graph, std::span<const double> weights, int k,
                                     std::span<const int> labels, int class_i);

// Hop distance from a (unweighted BFS); -1 when unreachable.
std::vector<int> hop_distances(const SparseGraph& graph, NodeId a);

}  // namespace graphflow
