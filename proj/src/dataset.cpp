#include "graphflow/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string_view>
#include <unordered_set>

#include "graphflow/error.hpp"
#include "graphflow/random.hpp"
#include "json.hpp"

namespace graphflow {
namespace fs = std::filesystem;

std::size_t count(const std::vector<bool>& mask) {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t p = line.find('\t', start);
    if (p == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, p - start));
    start = p + 1;
  }
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// Calls fn(fields, line_no) for every non-empty line with exactly `arity`
// fields.
template <typename Fn>
void read_tsv(const fs::path& path, std::size_t arity, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != arity) {
      throw ParseError(path.string(), line_no,
                       "expected " + std::to_string(arity) + " tab-separated fields, got " +
                           std::to_string(fields.size()));
    }
    fn(fields, line_no);
  }
}

std::uint64_t parse_index(const fs::path& path, std::size_t line_no, std::string_view s) {
  std::uint64_t v = 0;
  if (!parse_number(s, v)) throw ParseError(path.string(), line_no, "invalid index '" + std::string(s) + "'");
  return v;
}

void check_bound(const fs::path& path, std::size_t line_no, std::uint64_t v, std::uint64_t bound,
                 const char* what) {
  if (v >= bound) {
    throw BoundsError(path.string() + ":" + std::to_string(line_no) + ": " + what + " " + std::to_string(v) +
                      " out of range [0, " + std::to_string(bound) + ")");
  }
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

Dataset load_dataset(const fs::path& dir) {
  Dataset ds;
  ds.name = dir.filename().string();
  if (ds.name.empty()) ds.name = dir.parent_path().filename().string();

  const fs::path meta_path = dir / "meta.json";
  std::ifstream meta_in(meta_path);
  if (!meta_in) throw IoError("cannot open " + meta_path.string());
  nlohmann::json meta;
  try {
    meta_in >> meta;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(meta_path.string(), 1, e.what());
  }
  for (const char* key : {"n", "d", "c"}) {
    if (!meta.contains(key) || !meta[key].is_number_integer() || meta[key].get<long long>() < 0) {
      throw ParseError(meta_path.string(), 1, std::string("missing or invalid integer key '") + key + "'");
    }
  }
  const std::size_t n = meta["n"].get<std::size_t>();
  const std::size_t d = meta["d"].get<std::size_t>();
  const long long c = meta["c"].get<long long>();
  if (c < 2) throw InvalidArgument("invalid meta: c must be at least 2, got " + std::to_string(c));
  if (meta.contains("name") && meta["name"].is_string()) ds.name = meta["name"].get<std::string>();
  ds.n_classes = static_cast<int>(c);

  std::vector<Edge> edges;
  const fs::path edge_path = dir / "edges.tsv";
  read_tsv(edge_path, 2, [&](const auto& f, std::size_t ln) {
    auto u = parse_index(edge_path, ln, f[0]);
    auto v = parse_index(edge_path, ln, f[1]);
    check_bound(edge_path, ln, u, n, "node");
    check_bound(edge_path, ln, v, n, "node");
    edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v)});
  });
  ds.graph = SparseGraph::from_edges(n, edges);

  std::vector<FeatureMatrix::Entry> entries;
  std::unordered_set<std::uint64_t> seen;
  const fs::path feat_path = dir / "features.tsv";
  read_tsv(feat_path, 3, [&](const auto& f, std::size_t ln) {
    auto node = parse_index(feat_path, ln, f[0]);
    auto dim = parse_index(feat_path, ln, f[1]);
    double value = 0.0;
    if (!parse_number(f[2], value) || !std::isfinite(value)) {
      throw ParseError(feat_path.string(), ln, "invalid value '" + std::string(f[2]) + "'");
    }
    check_bound(feat_path, ln, node, n, "node");
    check_bound(feat_path, ln, dim, d, "dimension");
    if (!seen.insert(node * d + dim).second) throw ParseError(feat_path.string(), ln, "duplicate entry");
    entries.push_back({node, dim, value});
  });
  ds.features = FeatureMatrix::from_entries(n, d, std::move(entries));

  ds.labels.assign(n, kUnknownLabel);
  const fs::path label_path = dir / "labels.tsv";
  if (fs::exists(label_path)) {
    read_tsv(label_path, 2, [&](const auto& f, std::size_t ln) {
      auto node = parse_index(label_path, ln, f[0]);
      auto cls = parse_index(label_path, ln, f[1]);
      check_bound(label_path, ln, node, n, "node");
      check_bound(label_path, ln, cls, static_cast<std::uint64_t>(c), "class");
      ds.labels[node] = static_cast<int>(cls);
    });
  }
  return ds;
}

void save_dataset(const Dataset& ds, const fs::path& dir) {
  fs::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw IoError("cannot write " + (dir / name).string());
    return out;
  };
  {
    nlohmann::json meta = {{"n", ds.n_nodes()}, {"d", ds.feature_dim()}, {"c", ds.n_classes}};
    auto out = open("meta.json");
    out << meta.dump() << '\n';
  }
  {
    auto out = open("edges.tsv");
    for (const Edge& e : ds.graph.non_loop_edges()) out << e.u << '\t' << e.v << '\n';
  }
  {
    auto out = open("features.tsv");
    const auto& f = ds.features;
    for (std::size_t i = 0; i < f.rows; ++i)
      for (std::size_t p = f.row_ptr[i]; p < f.row_ptr[i + 1]; ++p)
        out << i << '\t' << f.col_idx[p] << '\t' << format_double(f.values[p]) << '\n';
  }
  {
    auto out = open("labels.tsv");
    for (std::size_t i = 0; i < ds.labels.size(); ++i)
      if (ds.labels[i] != kUnknownLabel) out << i << '\t' << ds.labels[i] << '\n';
  }
}

namespace {

std::vector<NodeId> labeled_nodes(const Dataset& ds) {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < ds.labels.size(); ++i)
    if (ds.labels[i] != kUnknownLabel) out.push_back(static_cast<NodeId>(i));
  return out;
}

Split assign(std::size_t n, const std::vector<NodeId>& order, std::size_t n_train, std::size_t n_val,
             std::uint64_t seed) {
  Split s;
  s.seed = seed;
  s.train.assign(n, false);
  s.val.assign(n, false);
  s.test.assign(n, false);
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k < n_train)
      s.train[order[k]] = true;
    else if (k < n_train + n_val)
      s.val[order[k]] = true;
    else
      s.test[order[k]] = true;
  }
  return s;
}

}  // namespace

Split make_split(const Dataset& ds, std::array<double, 3> ratios, std::uint64_t seed) {
  for (double r : ratios) {
    if (!(r > 0.0)) throw InvalidArgument("split ratios must be positive");
  }
  if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) {
    throw InvalidArgument("split ratios must sum to 1");
  }
  auto order = labeled_nodes(ds);
  const std::size_t m = order.size();
  if (m < 3) throw InvalidArgument("need at least 3 labeled nodes to split, got " + std::to_string(m));
  Rng rng(seed);
  rng.shuffle(order);
  auto portion = [m](double r) { return static_cast<std::size_t>(std::floor(r * static_cast<double>(m) + 1e-9)); };
  const std::size_t n_val = portion(ratios[1]);
  const std::size_t n_test = portion(ratios[2]);
  return assign(ds.n_nodes(), order, m - n_val - n_test, n_val, seed);
}

Split make_split_counts(const Dataset& ds, std::size_t n_train, std::size_t n_val, std::uint64_t seed) {
  auto order = labeled_nodes(ds);
  if (n_train == 0 || n_train + n_val > order.size()) {
    throw InvalidArgument("split sizes exceed the labeled node count");
  }
  Rng rng(seed);
  rng.shuffle(order);
  return assign(ds.n_nodes(), order, n_train, n_val, seed);
}

Dataset synth_random_graph(std::size_t n, double avg_degree, std::uint64_t seed) {
  if (n < 2) throw InvalidArgument("synthetic graph needs at least 2 nodes");
  if (!(avg_degree >= 1.0)) throw InvalidArgument("average degree must be at least 1");
  const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  const auto m = static_cast<std::uint64_t>(std::floor(static_cast<double>(n) * avg_degree / 2.0));
  if (m > total) {
    throw InvalidArgument("requested " + std::to_string(m) + " edges but only " + std::to_string(total) +
                          " pairs exist");
  }
  Rng rng(seed);
  std::vector<Edge> edges;
  edges.reserve(m);
  if (2 * m > total) {
    std::vector<Edge> all;
    all.reserve(total);
    for (NodeId u = 0; u < n; ++u)
      for (NodeId v = u + 1; v < n; ++v) all.push_back({u, v});
    rng.shuffle(all);
    edges.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(m));
  } else {
    std::unordered_set<std::uint64_t> used;
    used.reserve(2 * m);
    while (edges.size() < m) {
      auto u = static_cast<NodeId>(rng.uniform_index(n));
      auto v = static_cast<NodeId>(rng.uniform_index(n));
      if (u == v) continue;
      if (u > v) std::swap(u, v);
      if (used.insert(static_cast<std::uint64_t>(u) * n + v).second) edges.push_back({u, v});
    }
  }
  Dataset ds;
  ds.name = "synthetic";
  ds.graph = SparseGraph::from_edges(n, edges);
  ds.features = FeatureMatrix::identity(n);
  ds.labels.assign(n, 0);
  ds.n_classes = 2;
  return ds;
}

Dataset karate_club() {
  static constexpr NodeId kEdges[78][2] = {
      {0, 1},   {0, 2},   {0, 3},   {0, 4},   {0, 5},   {0, 6},   {0, 7},   {0, 8},   {0, 10},  {0, 11},
      {0, 12},  {0, 13},  {0, 17},  {0, 19},  {0, 21},  {0, 31},  {1, 2},   {1, 3},   {1, 7},   {1, 13},
      {1, 17},  {1, 19},  {1, 21},  {1, 30},  {2, 3},   {2, 7},   {2, 8},   {2, 9},   {2, 13},  {2, 27},
      {2, 28},  {2, 32},  {3, 7},   {3, 12},  {3, 13},  {4, 6},   {4, 10},  {5, 6},   {5, 10},  {5, 16},
      {6, 16},  {8, 30},  {8, 32},  {8, 33},  {9, 33},  {13, 33}, {14, 32}, {14, 33}, {15, 32}, {15, 33},
      {18, 32}, {18, 33}, {19, 33}, {20, 32}, {20, 33}, {22, 32}, {22, 33}, {23, 25}, {23, 27}, {23, 29},
      {23, 32}, {23, 33}, {24, 25}, {24, 27}, {24, 31}, {25, 31}, {26, 29}, {26, 33}, {27, 33}, {28, 31},
      {28, 33}, {29, 32}, {29, 33}, {30, 32}, {30, 33}, {31, 32}, {31, 33}, {32, 33}};
  // 0: Mr. Hi's faction, 1: the officer's faction.
  static constexpr int kFaction[34] = {0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 1, 0,
                                       0, 1, 0, 1, 0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
  std::vector<Edge> edges;
  for (const auto& e : kEdges) edges.push_back({e[0], e[1]});
  Dataset ds;
  ds.name = "karate";
  ds.graph = SparseGraph::from_edges(34, edges);
  ds.features = FeatureMatrix::identity(34);
  ds.labels.assign(std::begin(kFaction), std::end(kFaction));
  ds.n_classes = 2;
  return ds;
}

Dataset add_noise_edges(const Dataset& ds, std::size_t count, std::uint64_t seed) {
  if (count == 0) return ds;
  const std::size_t n = ds.n_nodes();
  std::vector<std::size_t> class_size(static_cast<std::size_t>(std::max(ds.n_classes, 0)), 0);
  std::size_t labeled = 0;
  for (int y : ds.labels) {
    if (y == kUnknownLabel) continue;
    ++class_size[static_cast<std::size_t>(y)];
    ++labeled;
  }
  std::size_t same_pairs = 0;
  for (std::size_t s : class_size) same_pairs += s * (s - 1) / 2;
  std::size_t existing = 0;
  for (const Edge& e : ds.graph.non_loop_edges()) {
    int a = ds.labels[e.u], b = ds.labels[e.v];
    if (a != kUnknownLabel && b != kUnknownLabel && a != b) ++existing;
  }
  const std::size_t available = labeled * (labeled - (labeled > 0 ? 1 : 0)) / 2 - same_pairs - existing;
  if (count > available) {
    throw InvalidArgument("only " + std::to_string(available) + " absent inter-class pairs, requested " +
                          std::to_string(count));
  }
  auto is_candidate = [&](NodeId u, NodeId v) {
    int a = ds.labels[u], b = ds.labels[v];
    return a != kUnknownLabel && b != kUnknownLabel && a != b && !ds.graph.has_edge(u, v);
  };

  Rng rng(seed);
  std::vector<Edge> added;
  if (2 * count > available) {
    std::vector<Edge> pool;
    for (NodeId u = 0; u < n; ++u)
      for (NodeId v = u + 1; v < n; ++v)
        if (is_candidate(u, v)) pool.push_back({u, v});
    rng.shuffle(pool);
    added.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(count));
  } else {
    std::unordered_set<std::uint64_t> used;
    while (added.size() < count) {
      auto u = static_cast<NodeId>(rng.uniform_index(n));
      auto v = static_cast<NodeId>(rng.uniform_index(n));
      if (u > v) std::swap(u, v);
      if (u == v || !is_candidate(u, v)) continue;
      if (used.insert(static_cast<std::uint64_t>(u) * n + v).second) added.push_back({u, v});
    }
  }
  std::vector<Edge> edges = ds.graph.non_loop_edges();
  edges.insert(edges.end(), added.begin(), added.end());
  Dataset out = ds;
  out.graph = SparseGraph::from_edges(n, edges);
  return out;
}

}  // namespace graphflow
