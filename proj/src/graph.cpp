#include "graphflow/graph.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "graphflow/error.hpp"

namespace graphflow {

SparseGraph::SparseGraph() : s_(std::make_shared<const Storage>()) {}

SparseGraph SparseGraph::from_edges(std::size_t n_nodes, std::span<const Edge> edges) {
  auto s = std::make_shared<Storage>();
  s->n_nodes = n_nodes;

  std::vector<Edge> canon;
  canon.reserve(edges.size() + n_nodes);
  for (const Edge& e : edges) {
    if (e.u >= n_nodes || e.v >= n_nodes) {
      throw BoundsError("edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                        ") out of range for " + std::to_string(n_nodes) + " nodes");
    }
    canon.push_back({std::min(e.u, e.v), std::max(e.u, e.v)});
  }
  for (std::size_t i = 0; i < n_nodes; ++i) {
    canon.push_back({static_cast<NodeId>(i), static_cast<NodeId>(i)});
  }
  std::sort(canon.begin(), canon.end());
  canon.erase(std::unique(canon.begin(), canon.end()), canon.end());

  std::vector<std::size_t> count(n_nodes + 1, 0);
  for (const Edge& e : canon) {
    ++count[e.u + 1];
    if (e.u != e.v) ++count[e.v + 1];
  }
  std::partial_sum(count.begin(), count.end(), count.begin());
  s->row_ptr = count;
  std::size_t nnz = count[n_nodes];
  s->col_idx.resize(nnz);
  s->edge_uid.resize(nnz);

  // Canonical pairs arrive sorted by (u, v): row u receives v in
  // increasing order, and row v receives u in increasing order of u. Since
  // every u' < v in row v comes before v' > v, filling in two passes keeps
  // each row sorted without a per-row sort.
  std::vector<std::size_t> cursor(s->row_ptr.begin(), s->row_ptr.end() - 1);
  for (std::size_t uid = 0; uid < canon.size(); ++uid) {
    const Edge& e = canon[uid];
    if (e.u != e.v) {
      std::size_t p = cursor[e.v]++;
      s->col_idx[p] = e.u;
      s->edge_uid[p] = static_cast<EdgeUid>(uid);
    }
  }
  for (std::size_t uid = 0; uid < canon.size(); ++uid) {
    const Edge& e = canon[uid];
    std::size_t p = cursor[e.u]++;
    s->col_idx[p] = e.v;
    s->edge_uid[p] = static_cast<EdgeUid>(uid);
  }

  s->edges = std::move(canon);
  s->reverse.resize(nnz);
  SparseGraph g(s);
  for (std::size_t i = 0; i < n_nodes; ++i) {
    for (std::size_t p = s->row_ptr[i]; p < s->row_ptr[i + 1]; ++p) {
      s->reverse[p] = g.find_entry(s->col_idx[p], static_cast<NodeId>(i));
    }
  }
  return g;
}

std::size_t SparseGraph::find_entry(NodeId u, NodeId v) const {
  if (u >= s_->n_nodes) return npos;
  auto b = s_->col_idx.begin() + static_cast<std::ptrdiff_t>(s_->row_ptr[u]);
  auto e = s_->col_idx.begin() + static_cast<std::ptrdiff_t>(s_->row_ptr[u + 1]);
  auto it = std::lower_bound(b, e, v);
  if (it == e || *it != v) return npos;
  return static_cast<std::size_t>(it - s_->col_idx.begin());
}

std::vector<Edge> SparseGraph::non_loop_edges() const {
  std::vector<Edge> out;
  out.reserve(n_non_loop_edges());
  for (const Edge& e : s_->edges) {
    if (e.u != e.v) out.push_back(e);
  }
  return out;
}

SparseGraph SparseGraph::permuted(std::span<const NodeId> perm) const {
  if (perm.size() != n_nodes()) throw InvalidArgument("permutation size mismatch");
  std::vector<Edge> edges;
  edges.reserve(n_non_loop_edges());
  for (const Edge& e : non_loop_edges()) edges.push_back({perm[e.u], perm[e.v]});
  return from_edges(n_nodes(), edges);
}

bool operator==(const SparseGraph& a, const SparseGraph& b) {
  return a.s_->n_nodes == b.s_->n_nodes && a.s_->row_ptr == b.s_->row_ptr &&
         a.s_->col_idx == b.s_->col_idx && a.s_->edge_uid == b.s_->edge_uid;
}

FeatureMatrix FeatureMatrix::from_entries(std::size_t rows, std::size_t cols, std::vector<Entry> entries) {
  for (const Entry& e : entries) {
    if (e.row >= rows || e.col >= cols) {
      throw BoundsError("feature entry (" + std::to_string(e.row) + ", " + std::to_string(e.col) +
                        ") out of range for " + std::to_string(rows) + "x" + std::to_string(cols));
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  FeatureMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.row_ptr.assign(rows + 1, 0);
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (k > 0 && entries[k].row == entries[k - 1].row && entries[k].col == entries[k - 1].col) {
      throw InvalidArgument("duplicate feature entry (" + std::to_string(entries[k].row) + ", " +
                            std::to_string(entries[k].col) + ")");
    }
    if (entries[k].value == 0.0) continue;
    ++m.row_ptr[entries[k].row + 1];
    m.col_idx.push_back(static_cast<std::uint32_t>(entries[k].col));
    m.values.push_back(entries[k].value);
  }
  std::partial_sum(m.row_ptr.begin(), m.row_ptr.end(), m.row_ptr.begin());
  return m;
}

FeatureMatrix FeatureMatrix::identity(std::size_t n) {
  FeatureMatrix m;
  m.rows = m.cols = n;
  m.row_ptr.resize(n + 1);
  m.col_idx.resize(n);
  m.values.assign(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    m.row_ptr[i + 1] = i + 1;
    m.col_idx[i] = static_cast<std::uint32_t>(i);
  }
  return m;
}

FeatureMatrix FeatureMatrix::from_dense(std::size_t rows, std::size_t cols, std::span<const double> dense) {
  if (dense.size() != rows * cols) throw InvalidArgument("dense buffer size mismatch");
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      if (dense[i * cols + j] != 0.0) entries.push_back({i, j, dense[i * cols + j]});
  return from_entries(rows, cols, std::move(entries));
}

std::vector<double> FeatureMatrix::to_dense() const {
  std::vector<double> out(rows * cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) out[i * cols + col_idx[p]] = values[p];
  return out;
}

FeatureMatrix FeatureMatrix::permuted_rows(std::span<const NodeId> perm) const {
  std::vector<Entry> entries;
  entries.reserve(nnz());
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) entries.push_back({perm[i], col_idx[p], values[p]});
  return from_entries(rows, cols, std::move(entries));
}

FeatureMatrix row_normalize_features(const FeatureMatrix& features) {
  FeatureMatrix out = features;
  for (std::size_t i = 0; i < out.rows; ++i) {
    double sum = 0.0;
    for (std::size_t p = out.row_ptr[i]; p < out.row_ptr[i + 1]; ++p) {
      if (out.values[p] < 0.0) {
        throw InvalidArgument("negative feature value at row " + std::to_string(i));
      }
      sum += out.values[p];
    }
    if (sum == 0.0) continue;
    for (std::size_t p = out.row_ptr[i]; p < out.row_ptr[i + 1]; ++p) out.values[p] /= sum;
  }
  return out;
}

double intra_class_edge_rate(const SparseGraph& graph, std::span<const int> labels) {
  if (labels.size() != graph.n_nodes()) throw InvalidArgument("label count does not match node count");
  std::size_t total = 0, same = 0;
  for (const Edge& e : graph.undirected_edges()) {
    if (e.u == e.v) continue;
    if (labels[e.u] == kUnknownLabel || labels[e.v] == kUnknownLabel) continue;
    ++total;
    if (labels[e.u] == labels[e.v]) ++same;
  }
  if (total == 0) throw InvalidArgument("graph has no non-loop edge between labeled nodes");
  return static_cast<double>(same) / static_cast<double>(total);
}

}  // namespace graphflow
