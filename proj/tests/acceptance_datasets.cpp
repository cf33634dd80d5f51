// Accuracy criteria on Cora and Citeseer. Reads $GRAPHFLOW_DATA_DIR/{cora,citeseer}
// in the TSV layout (see tools/planetoid_to_tsv.py); exits 77 (skipped) when
// either directory is missing.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "graphflow/dataset.hpp"
#include "graphflow/lpa.hpp"
#include "graphflow/unified.hpp"

using namespace graphflow;
namespace fs = std::filesystem;

namespace {

constexpr int kSkip = 77;
const std::vector<std::uint64_t> kSeeds{0, 1, 2};

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const std::string& id, const std::string& name, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1fs", secs);
  std::cout << (o.pass ? "PASS" : "FAIL") << "  " << id << ". " << name << "  (" << o.detail << "; " << buf << ")"
            << std::endl;
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
  return buf;
}

Dataset load(const fs::path& dir) {
  Dataset ds = load_dataset(dir);
  ds.features = row_normalize_features(ds.features);
  return ds;
}

double mean_test_accuracy(Dataset ds, const std::function<void(ModelConfig&)>& tweak, std::string& runs) {
  double total = 0.0;
  runs.clear();
  for (auto seed : kSeeds) {
    ds.split = make_split(ds, {0.6, 0.2, 0.2}, seed);
    ModelConfig cfg = default_config(ds.name);
    cfg.seed = seed;
    tweak(cfg);
    const double acc = train(ds, cfg).report.test_acc.value();
    total += acc;
    runs += (runs.empty() ? "" : ",") + pct(acc);
  }
  return total / static_cast<double>(kSeeds.size());
}

}  // namespace

int main() {
  const char* root = std::getenv("GRAPHFLOW_DATA_DIR");
  if (!root) {
    std::cout << "SKIP  GRAPHFLOW_DATA_DIR is not set" << std::endl;
    return kSkip;
  }
  const fs::path cora_dir = fs::path(root) / "cora";
  const fs::path citeseer_dir = fs::path(root) / "citeseer";
  if (!fs::exists(cora_dir / "meta.json") || !fs::exists(citeseer_dir / "meta.json")) {
    std::cout << "SKIP  cora/ or citeseer/ missing under " << root << std::endl;
    return kSkip;
  }
  const Dataset cora = load(cora_dir);
  const Dataset citeseer = load(citeseer_dir);

  report("T1", "intra-class edge rates", [&] {
    const double a = intra_class_edge_rate(cora.graph, cora.labels);
    const double b = intra_class_edge_rate(citeseer.graph, citeseer.labels);
    const bool ok = std::abs(a - 0.810) <= 0.005 && std::abs(b - 0.736) <= 0.005;
    return Outcome{ok, "cora " + pct(a) + "%, citeseer " + pct(b) + "%"};
  });

  report("8", "LPA baseline on Cora", [&] {
    const auto t0 = std::chrono::steady_clock::now();
    Dataset ds = cora;
    double total = 0.0;
    std::string runs;
    for (auto seed : kSeeds) {
      ds.split = make_split(ds, {0.6, 0.2, 0.2}, seed);
      const auto op = uniform_adjacency(ds.graph);
      const auto y = lpa_infer(op, ds.labels, ds.n_classes, ds.split.train, 20);
      const double acc = accuracy(y.predict(), ds.labels, ds.split.test);
      total += acc;
      runs += (runs.empty() ? "" : ",") + pct(acc);
    }
    const double mean = total / static_cast<double>(kSeeds.size());
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return Outcome{std::abs(100.0 * mean - 85.3) <= 2.0 && secs < 60.0,
                   "mean test acc " + pct(mean) + "% [" + runs + "], band 85.3 +/- 2.0"};
  });

  double citeseer_lambda1 = 0.0;
  report("9a", "GCN-LPA on Citeseer", [&] {
    std::string runs;
    citeseer_lambda1 = mean_test_accuracy(citeseer, [](ModelConfig&) {}, runs);
    return Outcome{100.0 * citeseer_lambda1 >= 76.5, "mean " + pct(citeseer_lambda1) + "% [" + runs + "], need >= 76.5"};
  });

  report("9b", "GCN-LPA on Cora", [&] {
    std::string runs;
    const double m = mean_test_accuracy(cora, [](ModelConfig&) {}, runs);
    return Outcome{100.0 * m >= 86.0, "mean " + pct(m) + "% [" + runs + "], need >= 86.0"};
  });

  report("10", "label term helps on Citeseer", [&] {
    std::string runs0, runs1;
    const double m0 = mean_test_accuracy(citeseer, [](ModelConfig& c) { c.lambda = 0.0; }, runs0);
    const double m1 = mean_test_accuracy(citeseer, [](ModelConfig& c) { c.lambda = 1.0; }, runs1);
    return Outcome{m1 >= m0, "lambda=1 " + pct(m1) + "% [" + runs1 + "] vs lambda=0 " + pct(m0) + "% [" + runs0 + "]"};
  });

  report("12", "label ratio trend on Citeseer", [&] {
    std::string runs0, runs1;
    const double r0 = mean_test_accuracy(citeseer, [](ModelConfig& c) { c.lpa_label_ratio = 0.0; }, runs0);
    const double r1 = mean_test_accuracy(citeseer, [](ModelConfig& c) { c.lpa_label_ratio = 1.0; }, runs1);
    return Outcome{100.0 * (r1 - r0) >= 1.0,
                   "ratio 1.0 " + pct(r1) + "% [" + runs1 + "] vs ratio 0.0 " + pct(r0) + "% [" + runs0 + "]"};
  });

  std::cout << (failures == 0 ? "all dataset criteria passed" : std::to_string(failures) + " dataset criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
