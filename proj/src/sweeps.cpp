#include "graphflow/sweeps.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <json.hpp>

#include "graphflow/error.hpp"
#include "graphflow/oracles.hpp"

namespace graphflow {

using nlohmann::ordered_json;

SparseGraph random_graph(std::size_t n, double p, bool connected, Rng& rng) {
  std::vector<Edge> edges;
  if (connected) {
    std::vector<NodeId> order(n);
    for (NodeId i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);
    for (std::size_t i = 1; i < n; ++i) {
      NodeId parent = order[rng.uniform_index(i)];
      edges.push_back({parent, order[i]});
    }
  }
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v)
      if (rng.bernoulli(p)) edges.push_back({u, v});
  return SparseGraph::from_edges(n, edges);
}

std::vector<double> random_weights(const SparseGraph& graph, Rng& rng, double lo, double hi) {
  std::vector<double> w(graph.n_undirected_edges());
  for (double& x : w) x = rng.uniform(lo, hi);
  return w;
}

namespace {

constexpr double kExactTol = 1e-10;
constexpr double kSlack = 1e-12;

std::uint64_t name_hash(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

Rng instance_rng(std::uint64_t seed, const std::string& name, std::size_t index) {
  Rng mix(seed ^ name_hash(name));
  for (std::size_t i = 0; i < 4; ++i) mix.next_u64();
  return Rng(mix.next_u64() + 0x9e3779b97f4a7c15ULL * (index + 1));
}

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.uniform_index(hi - lo + 1));
}

ordered_json describe(const SparseGraph& g, std::span<const double> w) {
  ordered_json j;
  j["n"] = g.n_nodes();
  ordered_json edges = ordered_json::array();
  for (const Edge& e : g.undirected_edges()) edges.push_back({e.u, e.v});
  j["edges"] = edges;
  j["weights"] = std::vector<double>(w.begin(), w.end());
  return j;
}

// Per-instance outcome: error measure, pass flag, and details for replay.
struct Outcome {
  double err = 0.0;
  bool pass = true;
  ordered_json detail;
};

Outcome lemma1_instance(Rng& rng) {
  const std::size_t n = pick(rng, 2, 8);
  const auto g = random_graph(n, rng.uniform(0.2, 0.8), rng.bernoulli(0.7), rng);
  const auto w = random_weights(g, rng);
  const int k = static_cast<int>(pick(rng, 1, 4));
  const auto a = static_cast<NodeId>(rng.uniform_index(n));
  const auto jac = feature_influence_row(g, w, k, a);
  Outcome o;
  for (NodeId b = 0; b < n; ++b) o.err = std::max(o.err, std::abs(jac[b] - walk_probability(g, w, k, a, b)));
  o.pass = o.err <= kExactTol;
  o.detail = describe(g, w);
  o.detail["k"] = k;
  o.detail["a"] = a;
  return o;
}

Outcome lemma2_instance(Rng& rng) {
  const std::size_t n = pick(rng, 2, 8);
  const auto g = random_graph(n, rng.uniform(0.2, 0.8), rng.bernoulli(0.7), rng);
  const auto w = random_weights(g, rng);
  const int k = static_cast<int>(pick(rng, 1, 4));
  const auto a = static_cast<NodeId>(rng.uniform_index(n));
  const double rate = rng.uniform(0.2, 0.8);
  std::vector<bool> labeled(n);
  for (std::size_t i = 0; i < n; ++i) labeled[i] = rng.bernoulli(rate);
  labeled[a] = false;
  if (std::none_of(labeled.begin(), labeled.end(), [](bool b) { return b; })) {
    labeled[(a + 1 + rng.uniform_index(n - 1)) % n] = true;
  }
  const auto grad = label_influence_row(g, w, k, a, labeled);
  Outcome o;
  for (NodeId b = 0; b < n; ++b) {
    if (!labeled[b]) continue;
    o.err = std::max(o.err, std::abs(grad[b] - unlabeled_path_sum(g, w, k, a, b, labeled)));
  }
  o.pass = o.err <= kExactTol;
  o.detail = describe(g, w);
  o.detail["k"] = k;
  o.detail["a"] = a;
  o.detail["labeled"] = std::vector<bool>(labeled);
  return o;
}

Outcome theorem1_instance(Rng& rng) {
  const std::size_t n = pick(rng, 2, 12);
  const std::size_t d = pick(rng, 1, 5);
  const auto g = random_graph(n, rng.uniform(0.1, 0.9), rng.bernoulli(0.5), rng);
  const auto w = random_weights(g, rng);
  std::vector<double> x(n * d), m(d);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  for (double& v : m) v = rng.uniform(-2.0, 2.0);
  const auto r = check_theorem1_linear(g, w, x, d, m);
  Outcome o;
  o.err = std::max(0.0, r.max_violation);
  o.pass = r.max_violation <= kSlack;
  o.detail = describe(g, w);
  o.detail["features"] = x;
  o.detail["w_map"] = m;
  return o;
}

Outcome theorem3_instance(Rng& rng) {
  const std::size_t n = pick(rng, 3, 7);
  const int c = static_cast<int>(pick(rng, 2, 4));
  const auto g = random_graph(n, rng.uniform(0.2, 0.8), rng.bernoulli(0.7), rng);
  const auto w = random_weights(g, rng);
  const int k = static_cast<int>(pick(rng, 1, 4));
  const auto a = static_cast<NodeId>(rng.uniform_index(n));
  std::vector<int> labels(n);
  std::vector<bool> labeled(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(c)));
    labeled[i] = rng.bernoulli(0.5);
  }
  labeled[a] = false;
  if (std::none_of(labeled.begin(), labeled.end(), [](bool b) { return b; })) {
    labeled[(a + 1 + rng.uniform_index(n - 1)) % n] = true;
  }
  const auto r = check_theorem3(g, w, k, a, labeled, labels, c);
  Outcome o;
  o.err = r.max_abs_err;
  o.pass = r.max_abs_err <= kExactTol;
  o.detail = describe(g, w);
  o.detail["k"] = k;
  o.detail["a"] = a;
  o.detail["labels"] = labels;
  o.detail["labeled"] = std::vector<bool>(labeled);
  o.detail["influence"] = r.influence;
  o.detail["lpa_mass"] = r.lpa_mass;
  return o;
}

Outcome theorem4_instance(Rng& rng) {
  const std::size_t n = pick(rng, 2, 12);
  const std::size_t d = pick(rng, 1, 4);
  const auto g = random_graph(n, rng.uniform(0.1, 0.9), rng.bernoulli(0.5), rng);
  const auto w = random_weights(g, rng, 0.01, 5.0);
  std::vector<double> x(n * d);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  const auto r = check_theorem4(g, w, x, d);
  Outcome o;
  o.err = std::max(0.0, r.after - r.before);
  o.pass = r.after <= r.before + kSlack;
  o.detail = describe(g, w);
  o.detail["x"] = x;
  o.detail["before"] = r.before;
  o.detail["after"] = r.after;
  return o;
}

// Connected graph with a pair at hop distance exactly k. Every a -> b walk
// of length <= k is then a shortest path, whose k nodes before b are
// distinct, so a labeling keeps it open with probability beta^k exactly.
Outcome theorem2_instance(Rng& rng, std::size_t index, std::size_t trials) {
  const int k = static_cast<int>(index % 3) + 1;
  for (;;) {
    const std::size_t n = pick(rng, 5, 8);
    const auto g = random_graph(n, rng.uniform(0.15, 0.45), true, rng);
    const auto a = static_cast<NodeId>(rng.uniform_index(n));
    const auto dist = hop_distances(g, a);
    std::vector<NodeId> candidates;
    for (NodeId b = 0; b < n; ++b)
      if (dist[b] == k) candidates.push_back(b);
    if (candidates.empty()) continue;
    const NodeId b = candidates[rng.uniform_index(candidates.size())];
    const auto w = random_weights(g, rng);
    Outcome o;
    o.detail = describe(g, w);
    o.detail["k"] = k;
    o.detail["a"] = a;
    o.detail["b"] = b;
    ordered_json runs = ordered_json::array();
    for (double beta : {0.3, 0.5, 0.7}) {
      Rng mc = rng.split();
      const auto r = check_theorem2(g, w, k, a, b, beta, trials, mc);
      const bool ok = r.abs_err <= 3.0 * r.std_err + kSlack;
      o.err = std::max(o.err, r.abs_err);
      o.pass = o.pass && ok;
      runs.push_back({{"beta", beta}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"std_err", r.std_err}, {"pass", ok}});
    }
    o.detail["runs"] = runs;
    return o;
  }
}

}  // namespace

std::vector<std::string> suite_checks(const std::string& suite) {
  if (suite == "lemmas") return {"lemma1", "lemma2"};
  if (suite == "theorems") return {"theorem1", "theorem2", "theorem3", "theorem4"};
  if (suite == "all") return {"lemma1", "lemma2", "theorem1", "theorem2", "theorem3", "theorem4"};
  throw InvalidArgument("unknown suite '" + suite + "' (expected lemmas, theorems or all)");
}

CheckResult run_check(const std::string& name, const SweepOptions& options) {
  std::function<Outcome(Rng&, std::size_t)> gen;
  std::size_t count = options.instances;
  if (name == "lemma1") {
    gen = [](Rng& r, std::size_t) { return lemma1_instance(r); };
  } else if (name == "lemma2") {
    gen = [](Rng& r, std::size_t) { return lemma2_instance(r); };
  } else if (name == "theorem1") {
    gen = [](Rng& r, std::size_t) { return theorem1_instance(r); };
  } else if (name == "theorem2") {
    count = 10;
    gen = [&options](Rng& r, std::size_t i) { return theorem2_instance(r, i, options.theorem2_trials); };
  } else if (name == "theorem3") {
    gen = [](Rng& r, std::size_t) { return theorem3_instance(r); };
  } else if (name == "theorem4") {
    gen = [](Rng& r, std::size_t) { return theorem4_instance(r); };
  } else {
    throw InvalidArgument("unknown check '" + name + "'");
  }

  CheckResult res;
  res.name = name;
  std::size_t first = 0, last = count;
  if (options.only) {
    if (*options.only >= count) throw InvalidArgument("instance index out of range");
    first = *options.only;
    last = first + 1;
  }
  for (std::size_t i = first; i < last; ++i) {
    Rng rng = instance_rng(options.seed, name, i);
    Outcome o = gen(rng, i);
    ++res.instances;
    res.max_abs_err = std::max(res.max_abs_err, o.err);
    if (!o.pass && res.pass) {
      res.pass = false;
      ordered_json j;
      j["check"] = name;
      j["seed"] = options.seed;
      j["index"] = i;
      j["err"] = o.err;
      j["instance"] = o.detail;
      res.failing_instance = j.dump();
    }
  }
  return res;
}

std::string to_json(const CheckResult& r) {
  ordered_json j;
  j["name"] = r.name;
  j["instances"] = r.instances;
  j["max_abs_err"] = r.max_abs_err;
  j["pass"] = r.pass;
  if (!r.failing_instance.empty()) j["failing_instance"] = ordered_json::parse(r.failing_instance);
  return j.dump();
}

}  // namespace graphflow
