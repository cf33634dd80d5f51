#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace graphflow {

using NodeId = std::uint32_t;
using EdgeUid = std::uint32_t;

struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Immutable undirected graph in symmetric CSR form.
//
// Every node carries a self-loop. Each stored directed entry (i, j) has an
// undirected-edge id shared with its mirror (j, i); ids index the sorted
// list of canonical pairs (u <= v), so a self-loop owns one id. Columns are
// strictly increasing within a row. Copies share storage.
class SparseGraph {
 public:
  SparseGraph();

  // Canonicalizes an edge list: merges duplicates and mirrored pairs,
  // adds a self-loop to every node. Throws BoundsError on ids >= n_nodes.
  static SparseGraph from_edges(std::size_t n_nodes, std::span<const Edge> edges);

  std::size_t n_nodes() const { return s_->n_nodes; }
  std::size_t nnz() const { return s_->col_idx.size(); }
  std::size_t n_undirected_edges() const { return s_->edges.size(); }
  std::size_t n_non_loop_edges() const { return s_->edges.size() - s_->n_nodes; }

  std::span<const std::size_t> row_ptr() const { return s_->row_ptr; }
  std::span<const NodeId> col_idx() const { return s_->col_idx; }
  std::span<const EdgeUid> edge_uid() const { return s_->edge_uid; }
  // reverse_entry()[e] is the position of the mirror of entry e.
  std::span<const std::size_t> reverse_entry() const { return s_->reverse; }
  // Canonical pair (u <= v) for each uid.
  std::span<const Edge> undirected_edges() const { return s_->edges; }

  std::size_t row_begin(NodeId i) const { return s_->row_ptr[i]; }
  std::size_t row_end(NodeId i) const { return s_->row_ptr[i + 1]; }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  // Position of entry (u, v) or npos.
  std::size_t find_entry(NodeId u, NodeId v) const;
  bool has_edge(NodeId u, NodeId v) const { return find_entry(u, v) != npos; }

  // Non-loop canonical pairs, in uid order.
  std::vector<Edge> non_loop_edges() const;

  // Graph with nodes relabeled: node i becomes perm[i].
  SparseGraph permuted(std::span<const NodeId> perm) const;

  friend bool operator==(const SparseGraph& a, const SparseGraph& b);

 private:
  struct Storage {
    std::size_t n_nodes = 0;
    std::vector<std::size_t> row_ptr{0};
    std::vector<NodeId> col_idx;
    std::vector<EdgeUid> edge_uid;
    std::vector<std::size_t> reverse;
    std::vector<Edge> edges;
  };
  explicit SparseGraph(std::shared_ptr<const Storage> s) : s_(std::move(s)) {}
  std::shared_ptr<const Storage> s_;
};

// Sparse node-by-dimension matrix (CSR). Used for input features, which are
// never differentiated.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::uint32_t> col_idx;
  std::vector<double> values;

  struct Entry {
    std::size_t row;
    std::size_t col;
    double value;
  };
  // Throws InvalidArgument on duplicate (row, col) and BoundsError on
  // out-of-range indices. Explicit zeros are dropped.
  static FeatureMatrix from_entries(std::size_t rows, std::size_t cols, std::vector<Entry> entries);
  static FeatureMatrix identity(std::size_t n);
  static FeatureMatrix from_dense(std::size_t rows, std::size_t cols, std::span<const double> dense);

  std::size_t nnz() const { return values.size(); }
  std::vector<double> to_dense() const;
  FeatureMatrix permuted_rows(std::span<const NodeId> perm) const;

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;
};

// Divides each nonzero row by its sum; all-zero rows are kept.
// Throws InvalidArgument on negative entries.
FeatureMatrix row_normalize_features(const FeatureMatrix& features);

inline constexpr int kUnknownLabel = -1;

// Fraction of non-loop undirected edges whose endpoints share a label.
// Edges touching an unlabeled node are skipped; throws InvalidArgument
// when no edge is left.
double intra_class_edge_rate(const SparseGraph& graph, std::span<const int> labels);

}  // namespace graphflow
