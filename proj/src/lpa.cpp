#include "graphflow/lpa.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "graphflow/error.hpp"
#include "graphflow/random.hpp"

namespace graphflow {
namespace {

std::vector<double> one_hot_rows(std::span<const int> labels, int n_classes, const std::vector<bool>& mask) {
  const std::size_t c = static_cast<std::size_t>(n_classes);
  std::vector<double> y(labels.size() * c, 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!mask[i]) continue;
    if (labels[i] < 0 || labels[i] >= n_classes) {
      throw InvalidArgument("clamped node " + std::to_string(i) + " has no valid label");
    }
    y[i * c + static_cast<std::size_t>(labels[i])] = 1.0;
  }
  return y;
}

void check_inputs(const RowStochasticOperator& op, std::span<const int> labels, int n_classes,
                  const std::vector<bool>& clamp_mask, int iters) {
  if (iters < 1) throw InvalidArgument("LPA needs at least one iteration");
  if (n_classes < 1) throw InvalidArgument("LPA needs at least one class");
  if (labels.size() != op.n_nodes() || clamp_mask.size() != op.n_nodes()) {
    throw ShapeError("LPA: labels/mask length differs from node count");
  }
}

}  // namespace

std::vector<int> SoftLabels::predict() const {
  std::vector<int> out(n_nodes, 0);
  for (std::size_t i = 0; i < n_nodes; ++i) {
    auto r = row(i);
    out[i] = static_cast<int>(std::max_element(r.begin(), r.end()) - r.begin());
  }
  return out;
}

std::vector<bool> SoftLabels::unreached() const {
  std::vector<bool> out(n_nodes, false);
  for (std::size_t i = 0; i < n_nodes; ++i) {
    auto r = row(i);
    out[i] = std::all_of(r.begin(), r.end(), [](double v) { return v == 0.0; });
  }
  return out;
}

SoftLabels lpa_infer(const RowStochasticOperator& op, std::span<const int> labels, int n_classes,
                     const std::vector<bool>& clamp_mask, int iters) {
  check_inputs(op, labels, n_classes, clamp_mask, iters);
  if (std::none_of(clamp_mask.begin(), clamp_mask.end(), [](bool b) { return b; })) {
    throw InvalidArgument("LPA needs at least one clamped node");
  }
  const std::size_t c = static_cast<std::size_t>(n_classes);
  const auto y0 = one_hot_rows(labels, n_classes, clamp_mask);
  std::vector<double> y = y0;
  for (int t = 0; t < iters; ++t) {
    y = apply(op, y, c);
    for (std::size_t i = 0; i < clamp_mask.size(); ++i)
      if (clamp_mask[i]) std::copy_n(&y0[i * c], c, &y[i * c]);
  }
  return {op.n_nodes(), c, std::move(y)};
}

SoftLabels lpa_infer(const SparseGraph& graph, std::span<const int> labels, int n_classes,
                     const std::vector<bool>& clamp_mask, std::span<const double> edge_weights, int iters) {
  return lpa_infer(normalized_adjacency(graph, edge_weights), labels, n_classes, clamp_mask, iters);
}

Tensor lpa_loss(const RowStochasticOperator& op, std::span<const int> labels, int n_classes,
                const std::vector<bool>& clamp_mask, const std::vector<bool>& loss_mask, int iters) {
  check_inputs(op, labels, n_classes, clamp_mask, iters);
  if (std::none_of(loss_mask.begin(), loss_mask.end(), [](bool b) { return b; })) {
    throw InvalidArgument("lpa_loss: empty loss mask");
  }
  const std::size_t c = static_cast<std::size_t>(n_classes);
  const Tensor y0 = Tensor::constant(op.n_nodes(), c, one_hot_rows(labels, n_classes, clamp_mask));
  Tensor y = y0;
  for (int t = 1; t < iters; ++t) y = reset_rows(spmm(op, y), clamp_mask, y0);
  Tensor readout = spmm(op, y);
  return masked_distribution_cross_entropy(readout, labels, loss_mask);
}

std::vector<bool> lpa_clamp_subset(const std::vector<bool>& train_mask, double ratio, std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw InvalidArgument("label ratio must be in [0, 1]");
  std::vector<std::size_t> train;
  for (std::size_t i = 0; i < train_mask.size(); ++i)
    if (train_mask[i]) train.push_back(i);
  const auto keep = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(train.size()) + 1e-9));
  std::vector<bool> out(train_mask.size(), false);
  if (keep == train.size()) return train_mask;
  Rng rng(seed);
  rng.shuffle(train);
  for (std::size_t k = 0; k < keep; ++k) out[train[k]] = true;
  return out;
}

double accuracy(std::span<const int> predictions, std::span<const int> labels, const std::vector<bool>& mask) {
  if (predictions.size() != labels.size() || mask.size() != labels.size()) {
    throw ShapeError("accuracy: length mismatch");
  }
  std::size_t total = 0, hit = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    ++total;
    if (predictions[i] == labels[i]) ++hit;
  }
  if (total == 0) throw InvalidArgument("accuracy over an empty mask");
  return static_cast<double>(hit) / static_cast<double>(total);
}

}  // namespace graphflow
