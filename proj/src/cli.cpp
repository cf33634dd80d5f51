#include "graphflow/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "graphflow/dataset.hpp"
#include "graphflow/error.hpp"
#include "graphflow/lpa.hpp"
#include "graphflow/probe.hpp"
#include "graphflow/sweeps.hpp"
#include "graphflow/unified.hpp"

namespace graphflow {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

// Raised for bad flag values found after CLI11 has parsed.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string shortest(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
  if (!f) throw IoError("write failed: " + path.string());
}

std::array<double, 3> parse_split(const std::string& text) {
  std::array<double, 3> r{};
  std::stringstream ss(text);
  std::string part;
  std::size_t i = 0;
  while (std::getline(ss, part, ',')) {
    if (i == 3) throw UsageError("--split takes three ratios");
    const char* first = part.data();
    const char* last = part.data() + part.size();
    auto res = std::from_chars(first, last, r[i]);
    if (res.ec != std::errc() || res.ptr != last) throw UsageError("--split: bad number '" + part + "'");
    ++i;
  }
  if (i != 3) throw UsageError("--split takes three ratios");
  double sum = 0.0;
  for (double x : r) {
    if (!(x > 0.0)) throw UsageError("--split ratios must be positive");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw UsageError("--split ratios must sum to 1 (got " + shortest(sum) + ")");
  return r;
}

const char* mode_name(EdgeMode m) { return m == EdgeMode::kFree ? "free" : "kernel"; }

ordered_json config_json(const ModelConfig& c) {
  ordered_json j;
  j["hidden_dim"] = c.hidden_dim;
  j["n_gcn_layers"] = c.n_gcn_layers;
  j["n_lpa_iters"] = c.n_lpa_iters;
  j["l2_weight"] = c.l2_weight;
  j["lambda"] = c.lambda;
  j["dropout_rate"] = c.dropout_rate;
  j["learning_rate"] = c.learning_rate;
  j["epochs"] = c.epochs;
  j["seed"] = c.seed;
  j["lpa_label_ratio"] = c.lpa_label_ratio;
  j["edge_mode"] = mode_name(c.edge_mode);
  j["freeze_edges"] = c.freeze_edges;
  return j;
}

// ---- train ---------------------------------------------------------------

struct TrainFlags {
  std::string data;
  std::string builtin;
  std::string model = "gcn-lpa";
  int layers = 0;
  int hidden = 0;
  int lpa_iters = 0;
  double lambda = 0.0;
  double dropout = 0.0;
  double lr = 0.0;
  double l2 = 0.0;
  int epochs = 200;
  std::uint64_t seed = 0;
  std::string split = "0.6,0.2,0.2";
  double label_ratio = 1.0;
  std::string edge_mode = "free";
  std::string out = "run";
  std::vector<int> emit;
  bool record_timing = false;
  bool raw_features = false;
};

struct TrainOptions {
  CLI::Option* layers;
  CLI::Option* hidden;
  CLI::Option* lpa_iters;
  CLI::Option* lambda;
  CLI::Option* dropout;
  CLI::Option* lr;
  CLI::Option* l2;
  CLI::Option* emit;
};

TrainOptions add_train_options(CLI::App* app, TrainFlags& f) {
  TrainOptions o{};
  auto* data = app->add_option("--data", f.data, "Dataset directory (meta.json, edges.tsv, features.tsv, labels.tsv)");
  auto* builtin = app->add_option("--builtin", f.builtin, "Built-in dataset")->check(CLI::IsMember({"karate"}));
  data->excludes(builtin);
  app->add_option("--model", f.model, "Model")->check(CLI::IsMember({"gcn", "lpa", "gcn-lpa"}));
  o.layers = app->add_option("--layers", f.layers, "GCN layers")->check(CLI::PositiveNumber);
  o.hidden = app->add_option("--hidden", f.hidden, "Hidden dimension")->check(CLI::PositiveNumber);
  o.lpa_iters = app->add_option("--lpa-iters", f.lpa_iters, "LPA iterations")->check(CLI::PositiveNumber);
  o.lambda = app->add_option("--lambda", f.lambda, "LPA loss weight")->check(CLI::NonNegativeNumber);
  o.dropout = app->add_option("--dropout", f.dropout, "Dropout rate")->check(CLI::Range(0.0, 0.999999));
  o.lr = app->add_option("--lr", f.lr, "Learning rate")->check(CLI::PositiveNumber);
  o.l2 = app->add_option("--l2", f.l2, "L2 weight on transformation matrices")->check(CLI::NonNegativeNumber);
  app->add_option("--epochs", f.epochs, "Training epochs")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--seed", f.seed, "Random seed")->capture_default_str();
  app->add_option("--split", f.split, "train,val,test ratios")->capture_default_str();
  app->add_option("--lpa-label-ratio", f.label_ratio, "Fraction of training labels used as LPA sources")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  app->add_option("--edge-mode", f.edge_mode, "Edge weight parameterization")
      ->check(CLI::IsMember({"free", "kernel"}))
      ->capture_default_str();
  app->add_option("--out", f.out, "Output directory")->capture_default_str();
  o.emit = app->add_option("--emit-embeddings", f.emit, "Write embeddings of LAYER (0-based, default last)")
               ->expected(0, 1);
  app->add_flag("--record-timing", f.record_timing, "Add epoch_ms to metrics.jsonl (breaks byte-identical reruns)");
  app->add_flag("--raw-features", f.raw_features, "Skip feature row normalization");
  return o;
}

int cmd_train(const TrainFlags& f, const TrainOptions& o, const std::vector<std::string>& argv, std::ostream& out) {
  if (f.data.empty() == f.builtin.empty()) throw UsageError("exactly one of --data or --builtin is required");
  const auto ratios = parse_split(f.split);

  Dataset ds;
  std::string source;
  if (!f.data.empty()) {
    ds = load_dataset(f.data);
    if (!f.raw_features) ds.features = row_normalize_features(ds.features);
    source = f.data;
  } else {
    ds = karate_club();
    source = "builtin:" + f.builtin;
  }
  ds.split = make_split(ds, ratios, f.seed);

  ModelConfig cfg = default_config(ds.name);
  if (o.layers->count()) cfg.n_gcn_layers = f.layers;
  if (o.hidden->count()) cfg.hidden_dim = f.hidden;
  if (o.lpa_iters->count()) cfg.n_lpa_iters = f.lpa_iters;
  if (o.lambda->count()) cfg.lambda = f.lambda;
  if (o.dropout->count()) cfg.dropout_rate = f.dropout;
  if (o.lr->count()) cfg.learning_rate = f.lr;
  if (o.l2->count()) cfg.l2_weight = f.l2;
  cfg.epochs = f.epochs;
  cfg.seed = f.seed;
  cfg.lpa_label_ratio = f.label_ratio;
  cfg.edge_mode = f.edge_mode == "kernel" ? EdgeMode::kKernel : EdgeMode::kFree;
  if (f.model == "gcn") {
    cfg.lambda = 0.0;
    cfg.freeze_edges = true;
  }
  // Plain LPA inference runs 20 iterations unless told otherwise.
  if (f.model == "lpa" && !o.lpa_iters->count()) cfg.n_lpa_iters = 20;

  const fs::path dir = f.out;
  fs::create_directories(dir);
  std::vector<std::string> outputs{"metrics.jsonl", "manifest.json"};

  std::optional<double> test_acc;
  int best_epoch = 0;
  if (f.model == "lpa") {
    const auto clamp = lpa_clamp_subset(ds.split.train, cfg.lpa_label_ratio, cfg.seed);
    const auto soft = lpa_infer(uniform_adjacency(ds.graph), ds.labels, ds.n_classes, clamp, cfg.n_lpa_iters);
    const auto preds = soft.predict();
    ordered_json j;
    j["epoch"] = 0;
    j["train_loss"] = nullptr;
    j["train_acc"] = accuracy(preds, ds.labels, ds.split.train);
    j["val_acc"] = accuracy(preds, ds.labels, ds.split.val);
    test_acc = accuracy(preds, ds.labels, ds.split.test);
    j["test_acc"] = *test_acc;
    j["lpa_loss"] = nullptr;
    j["gcn_loss"] = nullptr;
    write_file(dir / "metrics.jsonl", j.dump() + "\n");
  } else {
    const auto result = train(ds, cfg);
    write_file(dir / "metrics.jsonl", to_jsonl(result.report, f.record_timing));
    test_acc = result.report.test_acc;
    best_epoch = result.report.best_epoch;
    if (o.emit->count()) {
      const std::size_t layer =
          f.emit.empty() ? static_cast<std::size_t>(cfg.n_gcn_layers - 1) : static_cast<std::size_t>(f.emit.front());
      const std::string name = "embeddings_layer" + std::to_string(layer) + ".tsv";
      export_embeddings(ds, result.params, cfg, layer, dir / name);
      outputs.push_back(name);
    }
  }

  ordered_json m;
  m["command"] = "train";
  m["argv"] = argv;
  m["model"] = f.model;
  m["dataset"] = source;
  m["dataset_name"] = ds.name;
  m["split"] = {ratios[0], ratios[1], ratios[2]};
  m["seed"] = f.seed;
  m["config"] = config_json(cfg);
  m["outputs"] = outputs;
  m["version"] = kVersion;
  write_file(dir / "manifest.json", m.dump(2) + "\n");

  out << "test_acc=" << (test_acc ? shortest(*test_acc) : "nan") << " best_epoch=" << best_epoch << '\n';
  return kOk;
}

// ---- verify --------------------------------------------------------------

struct VerifyFlags {
  std::string suite = "all";
  std::uint64_t seed = 0;
  std::size_t instances = 100;
  std::string check;
  std::size_t instance = 0;
  std::size_t trials = 100000;
};

int cmd_verify(const VerifyFlags& f, bool replay, std::ostream& out) {
  std::vector<std::string> names;
  if (!f.check.empty()) {
    names = {f.check};
  } else {
    try {
      names = suite_checks(f.suite);
    } catch (const InvalidArgument& e) {
      throw UsageError(e.what());
    }
  }
  SweepOptions opts;
  opts.instances = f.instances;
  opts.seed = f.seed;
  opts.theorem2_trials = f.trials;
  if (replay) opts.only = f.instance;
  bool all_pass = true;
  for (const auto& name : names) {
    const auto r = run_check(name, opts);
    out << to_json(r) << '\n';
    all_pass = all_pass && r.pass;
  }
  return all_pass ? kOk : kFailure;
}

// ---- bench ---------------------------------------------------------------

struct BenchFlags {
  std::vector<std::size_t> nodes{1000, 2000, 4000, 8000, 10000};
  double avg_degree = 5.0;
  int epochs = 100;
  std::uint64_t seed = 0;
};

// Median, so that a stray slow epoch (page faults while the heap grows)
// does not dominate.
double median_epoch_ms(const TrainReport& r) {
  std::vector<double> ms;
  for (const auto& e : r.epochs) ms.push_back(e.epoch_ms);
  std::sort(ms.begin(), ms.end());
  const std::size_t m = ms.size();
  return m % 2 ? ms[m / 2] : 0.5 * (ms[m / 2 - 1] + ms[m / 2]);
}

int cmd_bench(const BenchFlags& f, std::ostream& out) {
  if (!std::is_sorted(f.nodes.begin(), f.nodes.end())) throw UsageError("--nodes must be ascending");
  out << "n\tgcn_ms_per_epoch\tgcnlpa_ms_per_epoch\toverhead_pct\n";
  bool ok = true;
  for (std::size_t n : f.nodes) {
    try {
      Dataset ds = synth_random_graph(n, f.avg_degree, f.seed);
      ds.split = make_split_counts(ds, std::clamp<std::size_t>(n / 10, 1, 100), std::min<std::size_t>(n / 5, 200),
                                   f.seed);
      ModelConfig lpa_cfg = default_config("cora");
      lpa_cfg.epochs = f.epochs;
      lpa_cfg.seed = f.seed;
      ModelConfig gcn_cfg = lpa_cfg;
      gcn_cfg.lambda = 0.0;
      gcn_cfg.freeze_edges = true;
      // Untimed warm-up of both models first.
      for (ModelConfig warm : {gcn_cfg, lpa_cfg}) {
        warm.epochs = std::min(warm.epochs, 3);
        train(ds, warm);
      }
      const double gcn_ms = median_epoch_ms(train(ds, gcn_cfg).report);
      const double lpa_ms = median_epoch_ms(train(ds, lpa_cfg).report);
      out << n << '\t' << std::fixed << std::setprecision(3) << gcn_ms << '\t' << lpa_ms << '\t'
          << std::setprecision(2) << 100.0 * (lpa_ms / gcn_ms - 1.0) << std::defaultfloat << '\n';
    } catch (const std::exception& e) {
      ok = false;
      out << n << "\terror\t" << e.what() << "\t\n";
    }
    out.flush();
  }
  return ok ? kOk : kFailure;
}

// ---- karate --------------------------------------------------------------

struct KarateFlags {
  std::size_t noise = 0;
  std::vector<int> layers{1, 2, 3, 4};
  std::uint64_t seed = 0;
  int epochs = 200;
  double lambda = 1.0;
  bool untrained = false;
  std::string out = "karate";
};

struct KarateRun {
  double probe_acc = 0.0;
  double train_acc = 0.0;
};

KarateRun karate_model(const Dataset& ds, int layers, bool lpa, const KarateFlags& f, const fs::path& dir) {
  ModelConfig cfg = default_config("karate");
  cfg.hidden_dim = 2;
  cfg.n_gcn_layers = layers;
  cfg.dropout_rate = 0.0;
  cfg.activation = Activation::kSigmoid;
  cfg.init_range = 1.0;
  cfg.epochs = f.epochs;
  cfg.seed = f.seed;
  cfg.lambda = lpa ? f.lambda : 0.0;
  cfg.freeze_edges = !lpa;

  ModelParams params;
  if (f.untrained) {
    // Untrained comparison: same random W for both models; the GCN-LPA
    // stand-in multiplies every intra-class edge weight by ten.
    Rng rng(f.seed);
    params = init_model(ds, cfg, rng);
    cfg.freeze_edges = true;
    if (lpa) {
      auto theta = params.edges.theta.mutable_values();
      auto edges = ds.graph.undirected_edges();
      for (std::size_t e = 0; e < edges.size(); ++e) {
        if (edges[e].u != edges[e].v && ds.labels[edges[e].u] == ds.labels[edges[e].v]) {
          theta[e] = softplus_inverse(10.0);
        }
      }
    }
  } else {
    params = train(ds, cfg).params;
  }
  const auto emb = model_layers(ds, params, cfg).back();
  KarateRun r;
  r.probe_acc = logistic_probe(emb.values(), emb.rows(), emb.cols(), ds.labels).accuracy;
  r.train_acc = accuracy(predict(emb), ds.labels, ds.split.train);
  const std::string name = std::string(lpa ? "gcn-lpa" : "gcn") + "_layers" + std::to_string(layers) + ".tsv";
  export_embeddings(ds, params, cfg, static_cast<std::size_t>(layers - 1), dir / name);
  return r;
}

int cmd_karate(const KarateFlags& f, std::ostream& out) {
  Dataset ds = karate_club();
  if (f.noise > 0) ds = add_noise_edges(ds, f.noise, f.seed);
  const std::size_t n = ds.n_nodes();
  ds.split = Split{std::vector<bool>(n, true), std::vector<bool>(n, false), std::vector<bool>(n, false), f.seed};
  const fs::path dir = f.out;
  fs::create_directories(dir);
  for (int layers : f.layers) {
    if (layers < 1) throw UsageError("--layers entries must be positive");
    for (bool lpa : {false, true}) {
      const auto r = karate_model(ds, layers, lpa, f, dir);
      out << "model=" << (lpa ? "gcn-lpa" : "gcn") << " layers=" << layers << " noise=" << f.noise
          << " probe_acc=" << shortest(r.probe_acc) << " train_acc=" << shortest(r.train_acc) << '\n';
    }
  }
  return kOk;
}

// ---- replay --------------------------------------------------------------

std::vector<std::string> replay_args(const std::string& manifest, const std::string& out_dir) {
  std::ifstream f(manifest);
  if (!f) throw IoError("cannot read " + manifest);
  const auto j = nlohmann::json::parse(f);
  auto args = j.at("argv").get<std::vector<std::string>>();
  if (out_dir.empty()) return args;
  std::vector<std::string> rewritten;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--out" && i + 1 < args.size()) {
      ++i;
      continue;
    }
    if (args[i].rfind("--out=", 0) == 0) continue;
    rewritten.push_back(args[i]);
  }
  rewritten.push_back("--out");
  rewritten.push_back(out_dir);
  return rewritten;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Label propagation, GCN and GCN-LPA toolkit", "graphflow"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  TrainFlags tf;
  auto* train_cmd = app.add_subcommand("train", "Train a model and write metrics.jsonl and manifest.json");
  const TrainOptions topts = add_train_options(train_cmd, tf);

  VerifyFlags vf;
  auto* verify_cmd = app.add_subcommand("verify", "Run the influence and smoothing oracle sweeps");
  verify_cmd->add_option("--suite", vf.suite, "lemmas, theorems or all")
      ->check(CLI::IsMember({"lemmas", "theorems", "all"}))
      ->capture_default_str();
  verify_cmd->add_option("--seed", vf.seed, "Sweep seed")->capture_default_str();
  verify_cmd->add_option("--instances", vf.instances, "Instances per check")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  verify_cmd->add_option("--trials", vf.trials, "Monte Carlo trials for theorem2")
      ->check(CLI::Range(std::size_t{2}, std::size_t{100000000}))
      ->capture_default_str();
  verify_cmd->add_option("--check", vf.check, "Run a single check")
      ->check(CLI::IsMember({"lemma1", "lemma2", "theorem1", "theorem2", "theorem3", "theorem4"}));
  auto* instance_opt = verify_cmd->add_option("--instance", vf.instance, "Replay one instance index of --check");

  BenchFlags bf;
  auto* bench_cmd = app.add_subcommand("bench", "Time GCN and GCN-LPA epochs on random graphs");
  bench_cmd->add_option("--nodes", bf.nodes, "Node counts, ascending")->delimiter(',')->capture_default_str();
  bench_cmd->add_option("--avg-degree", bf.avg_degree, "Average degree")->capture_default_str();
  bench_cmd->add_option("--epochs", bf.epochs, "Epochs per model")->check(CLI::PositiveNumber)->capture_default_str();
  bench_cmd->add_option("--seed", bf.seed, "Seed")->capture_default_str();

  KarateFlags kf;
  auto* karate_cmd = app.add_subcommand("karate", "Karate club embeddings for GCN and GCN-LPA");
  karate_cmd->add_option("--noise", kf.noise, "Number of inter-class noise edges")->capture_default_str();
  karate_cmd->add_option("--layers", kf.layers, "Layer counts")->delimiter(',')->capture_default_str();
  karate_cmd->add_option("--seed", kf.seed, "Seed")->capture_default_str();
  karate_cmd->add_option("--epochs", kf.epochs, "Training epochs")->check(CLI::PositiveNumber)->capture_default_str();
  karate_cmd->add_option("--lambda", kf.lambda, "LPA loss weight")->check(CLI::NonNegativeNumber);
  karate_cmd->add_flag("--untrained", kf.untrained, "Random W, intra-class weights x10 stand in for GCN-LPA");
  karate_cmd->add_option("--out", kf.out, "Output directory")->capture_default_str();

  std::string manifest, replay_out;
  auto* replay_cmd = app.add_subcommand("replay", "Re-run the train command recorded in a manifest");
  replay_cmd->add_option("manifest", manifest, "manifest.json")->required();
  replay_cmd->add_option("--out", replay_out, "Output directory (default: the recorded one)");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*train_cmd) return cmd_train(tf, topts, args, out);
    if (*verify_cmd) {
      if (instance_opt->count() && vf.check.empty()) throw UsageError("--instance needs --check");
      return cmd_verify(vf, instance_opt->count() > 0, out);
    }
    if (*bench_cmd) return cmd_bench(bf, out);
    if (*karate_cmd) return cmd_karate(kf, out);
    if (*replay_cmd) return run_cli(replay_args(manifest, replay_out), out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}

}  // namespace graphflow
