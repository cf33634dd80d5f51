#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "graphflow/dataset.hpp"
#include "graphflow/error.hpp"
#include "graphflow/gcn.hpp"

namespace graphflow {

enum class EdgeMode { kFree, kKernel };

// Raw edge parameters mapped through softplus to a positive mask.
//
// Free mode keeps one theta per undirected edge (loops included). Kernel
// mode scores edge (u, v), u <= v, as x_u^T H x_v; the canonical
// orientation keeps the mask symmetric for a non-symmetric H.
struct EdgeWeightParams {
  EdgeMode mode = EdgeMode::kFree;
  Tensor theta;  // n_undirected_edges x 1 (free mode)
  Tensor h;      // d x d (kernel mode)

  // theta = ln(e - 1) everywhere, i.e. unit weights.
  static EdgeWeightParams free(const SparseGraph& graph);
  static EdgeWeightParams kernel(std::size_t feature_dim, Rng& rng);

  Tensor& raw() { return mode == EdgeMode::kFree ? theta : h; }
  const Tensor& raw() const { return mode == EdgeMode::kFree ? theta : h; }
};

// Per-uid positive weights (n_undirected_edges x 1), differentiable in the
// raw parameters.
Tensor effective_weights(const EdgeWeightParams& edges, const SparseGraph& graph,
                         const std::shared_ptr<const FeatureMatrix>& features);

// s[e] = x_u^T H x_v for the canonical pair (u, v) of every uid.
Tensor edge_bilinear(const SparseGraph& graph, const std::shared_ptr<const FeatureMatrix>& features, const Tensor& h);

struct ModelConfig {
  int hidden_dim = 16;
  int n_gcn_layers = 2;
  int n_lpa_iters = 5;
  double l2_weight = 5e-4;
  double lambda = 1.0;
  double dropout_rate = 0.0;
  double learning_rate = 0.2;
  int epochs = 200;
  std::uint64_t seed = 0;
  double lpa_label_ratio = 1.0;
  EdgeMode edge_mode = EdgeMode::kFree;
  // Keep the edge parameters at their initial values.
  bool freeze_edges = false;
  Activation activation = Activation::kRelu;
  // When positive, W is drawn uniformly from [-init_range, init_range]
  // instead of the Glorot range.
  double init_range = 0.0;
};

// Hyper-parameters tuned per dataset (name matched case-insensitively);
// unknown names get the citeseer row.
ModelConfig default_config(const std::string& dataset_name);

struct ModelParams {
  GcnParams gcn;
  EdgeWeightParams edges;

  // Deep copy detached from any tape.
  ModelParams clone() const;
  // Every tensor the optimizer updates, W first.
  std::vector<Tensor> trainable(bool include_edges) const;
};

ModelParams init_model(const Dataset& dataset, const ModelConfig& config, Rng& rng);

struct LossTerms {
  Tensor total;
  Tensor gcn;
  std::optional<Tensor> lpa;  // absent when lambda is 0
  Tensor l2;
  Tensor logits;
};

// L = L_gcn + lambda * L_lpa + l2 * sum ||W||^2, both data terms built on
// one shared operator from the current edge weights. LPA sources are
// `clamp_mask`; its loss runs over the training nodes.
LossTerms joint_loss(const Dataset& dataset, const std::shared_ptr<const FeatureMatrix>& features,
                     const ModelParams& params, const ModelConfig& config, const std::vector<bool>& clamp_mask,
                     bool training, Rng& rng);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double gcn_loss = 0.0;
  std::optional<double> lpa_loss;
  double train_acc = 0.0;
  std::optional<double> val_acc;
  std::optional<double> test_acc;
  double epoch_ms = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  std::optional<double> best_val_acc;
  std::optional<double> test_acc;
  double train_acc = 0.0;
};

struct TrainResult {
  TrainReport report;
  ModelParams params;  // snapshot at the best validation epoch
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

// Full-batch Adam for config.epochs epochs. With an empty validation set
// the final epoch is kept. Throws TrainingError on a non-finite loss.
TrainResult train(const Dataset& dataset, const ModelConfig& config);

// Inference-mode logits (dropout off).
Tensor model_logits(const Dataset& dataset, const ModelParams& params, const ModelConfig& config);

double evaluate(const Dataset& dataset, const ModelParams& params, const ModelConfig& config,
                const std::vector<bool>& mask);

// Layer outputs (post-activation, last = logits) with dropout off.
std::vector<Tensor> model_layers(const Dataset& dataset, const ModelParams& params, const ModelConfig& config);

// TSV "node<TAB>label<TAB>v1..vd" of layer `layer_index` (0-based; the
// last layer gives logits).
void export_embeddings(const Dataset& dataset, const ModelParams& params, const ModelConfig& config,
                       std::size_t layer_index, const std::filesystem::path& path);

// One JSON object per line. epoch_ms is written only when requested so
// that repeated runs produce identical files.
std::string to_jsonl(const TrainReport& report, bool include_timing);

}  // namespace graphflow
