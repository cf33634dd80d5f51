#include "graphflow/unified.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "graphflow/error.hpp"
#include "graphflow/lpa.hpp"
#include "graphflow/optim.hpp"

namespace graphflow {
namespace {

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double sparse_row_dot(std::span<const double> dense_row, const FeatureMatrix& x, std::size_t row) {
  double s = 0.0;
  for (std::size_t p = x.row_ptr[row]; p < x.row_ptr[row + 1]; ++p) s += dense_row[x.col_idx[p]] * x.values[p];
  return s;
}

}  // namespace

EdgeWeightParams EdgeWeightParams::free(const SparseGraph& graph) {
  EdgeWeightParams p;
  p.mode = EdgeMode::kFree;
  p.theta = Tensor::parameter(graph.n_undirected_edges(), 1,
                              std::vector<double>(graph.n_undirected_edges(), softplus_inverse(1.0)));
  return p;
}

EdgeWeightParams EdgeWeightParams::kernel(std::size_t feature_dim, Rng& rng) {
  EdgeWeightParams p;
  p.mode = EdgeMode::kKernel;
  p.h = glorot_init(feature_dim, feature_dim, rng);
  return p;
}

Tensor edge_bilinear(const SparseGraph& graph, const std::shared_ptr<const FeatureMatrix>& features, const Tensor& h) {
  if (features->rows != graph.n_nodes()) throw ShapeError("edge_bilinear: feature rows differ from node count");
  if (h.rows() != features->cols || h.cols() != features->cols) {
    throw ShapeError("edge_bilinear: H must be " + std::to_string(features->cols) + "x" +
                     std::to_string(features->cols));
  }
  // P = X H, then s_e = P[u] . x_v
  Tensor p = sparse_matmul(features, h);
  const std::size_t d = p.cols();
  auto edges = graph.undirected_edges();
  std::vector<double> s(edges.size());
  auto pv = p.values();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    s[e] = sparse_row_dot(pv.subspan(edges[e].u * d, d), *features, edges[e].v);
  }
  SparseGraph g = graph;
  auto x = features;
  return Tensor::make_result(edges.size(), 1, std::move(s), {p}, [g, x, d](detail::Node& self) {
    auto& pn = *self.parents[0];
    if (!pn.requires_grad) return;
    auto& gp = pn.grad_buffer();
    auto edges = g.undirected_edges();
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const double ge = self.grad[e];
      if (ge == 0.0) continue;
      double* row = gp.data() + edges[e].u * d;
      for (std::size_t q = x->row_ptr[edges[e].v]; q < x->row_ptr[edges[e].v + 1]; ++q) {
        row[x->col_idx[q]] += ge * x->values[q];
      }
    }
  });
}

Tensor effective_weights(const EdgeWeightParams& edges, const SparseGraph& graph,
                         const std::shared_ptr<const FeatureMatrix>& features) {
  if (edges.mode == EdgeMode::kFree) {
    if (edges.theta.rows() != graph.n_undirected_edges() || edges.theta.cols() != 1) {
      throw ShapeError("theta must have one entry per undirected edge");
    }
    return softplus(edges.theta);
  }
  return softplus(edge_bilinear(graph, features, edges.h));
}

ModelConfig default_config(const std::string& dataset_name) {
  std::string name = dataset_name;
  std::transform(name.begin(), name.end(), name.begin(), [](unsigned char ch) { return std::tolower(ch); });
  ModelConfig c;
  auto set = [&](int hidden, int layers, int lpa, double l2, double lambda, double dropout, double lr) {
    c.hidden_dim = hidden;
    c.n_gcn_layers = layers;
    c.n_lpa_iters = lpa;
    c.l2_weight = l2;
    c.lambda = lambda;
    c.dropout_rate = dropout;
    c.learning_rate = lr;
  };
  if (name == "cora") {
    set(32, 5, 5, 1e-4, 10, 0.2, 0.05);
  } else if (name == "pubmed") {
    set(32, 2, 1, 2e-4, 1, 0.0, 0.1);
  } else if (name == "coauthor-cs") {
    set(32, 2, 2, 1e-4, 2, 0.2, 0.1);
  } else if (name == "coauthor-phy") {
    set(32, 2, 3, 1e-4, 1, 0.2, 0.05);
  } else {
    set(16, 2, 5, 5e-4, 1, 0.0, 0.2);
  }
  return c;
}

ModelParams ModelParams::clone() const {
  auto copy = [](const Tensor& t) {
    if (t.size() == 0 && t.rows() == 0) return Tensor();
    return Tensor::parameter(t.rows(), t.cols(), std::vector<double>(t.values().begin(), t.values().end()));
  };
  ModelParams out;
  for (const Tensor& w : gcn.weights) out.gcn.weights.push_back(copy(w));
  out.edges.mode = edges.mode;
  out.edges.theta = copy(edges.theta);
  out.edges.h = copy(edges.h);
  return out;
}

std::vector<Tensor> ModelParams::trainable(bool include_edges) const {
  std::vector<Tensor> out = gcn.weights;
  if (include_edges) out.push_back(edges.raw());
  return out;
}

ModelParams init_model(const Dataset& dataset, const ModelConfig& config, Rng& rng) {
  if (config.hidden_dim < 1) throw InvalidArgument("hidden dimension must be positive");
  ModelParams p;
  p.gcn = init_gcn_params(dataset.feature_dim(), static_cast<std::size_t>(config.hidden_dim),
                          static_cast<std::size_t>(dataset.n_classes), config.n_gcn_layers, rng);
  if (config.init_range > 0.0) {
    for (Tensor& w : p.gcn.weights) w = uniform_init(w.rows(), w.cols(), -config.init_range, config.init_range, rng);
  }
  p.edges = config.edge_mode == EdgeMode::kFree ? EdgeWeightParams::free(dataset.graph)
                                                : EdgeWeightParams::kernel(dataset.feature_dim(), rng);
  return p;
}

namespace {

RowStochasticOperator model_operator(const Dataset& dataset, const std::shared_ptr<const FeatureMatrix>& features,
                                     const ModelParams& params, const ModelConfig& config) {
  Tensor w = effective_weights(params.edges, dataset.graph, features);
  if (config.freeze_edges) w = w.detach();
  return normalized_adjacency(dataset.graph, w);
}

GcnOptions gcn_options(const ModelConfig& config, bool training) {
  return {config.dropout_rate, training, config.activation};
}

}  // namespace

LossTerms joint_loss(const Dataset& dataset, const std::shared_ptr<const FeatureMatrix>& features,
                     const ModelParams& params, const ModelConfig& config, const std::vector<bool>& clamp_mask,
                     bool training, Rng& rng) {
  if (config.lambda < 0.0) throw InvalidArgument("lambda must be nonnegative");
  const auto op = model_operator(dataset, features, params, config);
  LossTerms t;
  t.logits = gcn_forward(op, features, params.gcn, gcn_options(config, training), rng);
  t.gcn = masked_softmax_cross_entropy(t.logits, dataset.labels, dataset.split.train);
  t.l2 = l2_penalty(params.gcn.weights, config.l2_weight);
  t.total = add(t.gcn, t.l2);
  if (config.lambda > 0.0) {
    t.lpa = lpa_loss(op, dataset.labels, dataset.n_classes, clamp_mask, dataset.split.train, config.n_lpa_iters);
    t.total = add(t.total, scale(*t.lpa, config.lambda));
  }
  return t;
}

std::vector<Tensor> model_layers(const Dataset& dataset, const ModelParams& params, const ModelConfig& config) {
  auto features = std::make_shared<const FeatureMatrix>(dataset.features);
  Rng unused(0);
  const auto op = model_operator(dataset, features, params, config);
  return gcn_layers(op, features, params.gcn, gcn_options(config, false), unused);
}

Tensor model_logits(const Dataset& dataset, const ModelParams& params, const ModelConfig& config) {
  return model_layers(dataset, params, config).back();
}

double evaluate(const Dataset& dataset, const ModelParams& params, const ModelConfig& config,
                const std::vector<bool>& mask) {
  return accuracy(predict(model_logits(dataset, params, config)), dataset.labels, mask);
}

TrainResult train(const Dataset& dataset, const ModelConfig& config) {
  if (config.epochs < 1) throw InvalidArgument("epochs must be at least 1");
  if (dataset.split.empty() || count(dataset.split.train) == 0) throw InvalidArgument("dataset has no training split");
  using clock = std::chrono::steady_clock;

  Rng rng(config.seed);
  Rng init_rng = rng.split();
  Rng dropout_rng = rng.split();
  auto features = std::make_shared<const FeatureMatrix>(dataset.features);
  ModelParams params = init_model(dataset, config, init_rng);
  const auto clamp = lpa_clamp_subset(dataset.split.train, config.lpa_label_ratio, config.seed);
  const bool has_val = count(dataset.split.val) > 0;
  const bool has_test = count(dataset.split.test) > 0;

  Adam adam(AdamConfig{config.learning_rate});
  std::vector<Tensor> trainable = params.trainable(!config.freeze_edges);

  TrainResult result;
  auto& report = result.report;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto t0 = clock::now();
    for (Tensor& p : trainable) p.zero_grad();
    LossTerms terms = joint_loss(dataset, features, params, config, clamp, true, dropout_rng);
    const double total = terms.total.item();
    if (!std::isfinite(total)) {
      std::ostringstream msg;
      msg << "non-finite loss at epoch " << epoch << ": gcn=" << terms.gcn.item()
          << " lpa=" << (terms.lpa ? terms.lpa->item() : 0.0) << " l2=" << terms.l2.item();
      throw TrainingError(msg.str());
    }
    backward(terms.total);
    adam.step(trainable);

    const Tensor logits = model_logits(dataset, params, config);
    auto lv = logits.values();
    if (!std::all_of(lv.begin(), lv.end(), [](double v) { return std::isfinite(v); })) {
      throw TrainingError("non-finite logits after the update of epoch " + std::to_string(epoch) +
                          " (loss before the update " + format_double(total) + ")");
    }
    const auto preds = predict(logits);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = total;
    rec.gcn_loss = terms.gcn.item();
    if (terms.lpa) rec.lpa_loss = terms.lpa->item();
    rec.train_acc = accuracy(preds, dataset.labels, dataset.split.train);
    if (has_val) rec.val_acc = accuracy(preds, dataset.labels, dataset.split.val);
    if (has_test) rec.test_acc = accuracy(preds, dataset.labels, dataset.split.test);
    rec.epoch_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();

    const bool improved = has_val ? (!report.best_val_acc || *rec.val_acc > *report.best_val_acc)
                                  : epoch == config.epochs;
    if (improved) {
      report.best_epoch = epoch;
      report.best_val_acc = rec.val_acc;
      report.test_acc = rec.test_acc;
      report.train_acc = rec.train_acc;
      result.params = params.clone();
    }
    report.epochs.push_back(rec);
  }
  return result;
}

void export_embeddings(const Dataset& dataset, const ModelParams& params, const ModelConfig& config,
                       std::size_t layer_index, const std::filesystem::path& path) {
  const auto layers = model_layers(dataset, params, config);
  if (layer_index >= layers.size()) {
    throw InvalidArgument("layer " + std::to_string(layer_index) + " does not exist (model has " +
                          std::to_string(layers.size()) + ")");
  }
  const Tensor& x = layers[layer_index];
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    out << i << '\t' << dataset.labels[i];
    for (std::size_t j = 0; j < x.cols(); ++j) out << '\t' << format_double(x.at(i, j));
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::string to_jsonl(const TrainReport& report, bool include_timing) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  std::string out;
  for (const auto& r : report.epochs) {
    nlohmann::ordered_json j;
    j["epoch"] = r.epoch;
    j["train_loss"] = r.train_loss;
    j["train_acc"] = r.train_acc;
    j["val_acc"] = opt(r.val_acc);
    j["test_acc"] = opt(r.test_acc);
    j["lpa_loss"] = opt(r.lpa_loss);
    j["gcn_loss"] = r.gcn_loss;
    if (include_timing) j["epoch_ms"] = r.epoch_ms;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace graphflow
