#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "graphflow/graph.hpp"
#include "graphflow/random.hpp"

namespace graphflow {

// Random simple graph on n nodes, each pair present with probability p.
// With `connected`, a random spanning tree is added first.
SparseGraph random_graph(std::size_t n, double p, bool connected, Rng& rng);

// One weight per undirected uid, uniform in [lo, hi].
std::vector<double> random_weights(const SparseGraph& graph, Rng& rng, double lo = 0.1, double hi = 2.0);

struct CheckResult {
  std::string name;
  std::size_t instances = 0;
  double max_abs_err = 0.0;
  bool pass = true;
  std::string failing_instance;  // JSON of the first failing instance, empty when all pass
};

struct SweepOptions {
  std::size_t instances = 100;
  std::uint64_t seed = 0;
  // Run only this instance index (replay).
  std::optional<std::size_t> only;
  std::size_t theorem2_trials = 100000;
};

// Named checks: lemma1, lemma2, theorem1, theorem2, theorem3, theorem4.
// Instance i of a check is generated from (seed, name, i) alone, so a
// failure can be replayed in isolation. theorem2 always uses its 10 fixed
// instances, each at beta 0.3, 0.5 and 0.7.
CheckResult run_check(const std::string& name, const SweepOptions& options);

// Check names of a suite: lemmas, theorems or all. Throws InvalidArgument
// for an unknown suite.
std::vector<std::string> suite_checks(const std::string& suite);

std::string to_json(const CheckResult& result);

}  // namespace graphflow
