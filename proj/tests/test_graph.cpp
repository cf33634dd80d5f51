#include <doctest.h>

#include <fstream>
#include <set>

#include "graphflow/adjacency.hpp"
#include "graphflow/dataset.hpp"
#include "graphflow/error.hpp"
#include "support.hpp"

using namespace graphflow;
namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

fs::path tiny_dataset(const std::string& name, const std::string& edges, const std::string& meta = "") {
  auto dir = test::temp_dir(name);
  write_file(dir / "meta.json", meta.empty() ? R"({"n": 3, "d": 2, "c": 2})" : meta);
  write_file(dir / "edges.tsv", edges);
  write_file(dir / "features.tsv", "0\t0\t1\n1\t1\t2.5\n");
  write_file(dir / "labels.tsv", "0\t0\n1\t1\n");
  return dir;
}

void check_invariants(const SparseGraph& g) {
  const auto rp = g.row_ptr();
  const auto col = g.col_idx();
  const auto uid = g.edge_uid();
  const auto rev = g.reverse_entry();
  for (NodeId i = 0; i < g.n_nodes(); ++i) {
    CHECK(g.has_edge(i, i));
    for (std::size_t p = rp[i]; p < rp[i + 1]; ++p) {
      if (p + 1 < rp[i + 1]) CHECK(col[p] < col[p + 1]);
      const std::size_t q = rev[p];
      CHECK(col[q] == i);
      CHECK(uid[q] == uid[p]);
      const Edge e = g.undirected_edges()[uid[p]];
      CHECK(e.u == std::min<NodeId>(i, col[p]));
      CHECK(e.v == std::max<NodeId>(i, col[p]));
    }
  }
}

}  // namespace

TEST_CASE("from_edges adds loops and mirrors") {
  std::vector<Edge> edges{{0, 1}};
  auto g = SparseGraph::from_edges(2, edges);
  CHECK(g.nnz() == 4);
  CHECK(g.n_undirected_edges() == 3);
  CHECK(g.n_non_loop_edges() == 1);
  check_invariants(g);

  std::vector<Edge> dup{{0, 1}, {1, 0}, {0, 1}};
  CHECK(SparseGraph::from_edges(2, dup) == g);
  std::vector<Edge> loop{{0, 0}, {1, 0}};
  CHECK(SparseGraph::from_edges(2, loop) == g);
}

TEST_CASE("from_edges rejects out-of-range ids") {
  std::vector<Edge> edges{{0, 5}};
  CHECK_THROWS_AS(SparseGraph::from_edges(3, edges), BoundsError);
}

TEST_CASE("isolated node keeps only its loop") {
  std::vector<Edge> edges{{0, 1}};
  auto g = SparseGraph::from_edges(3, edges);
  CHECK(g.row_end(2) - g.row_begin(2) == 1);
  auto op = uniform_adjacency(g);
  CHECK(op.at(2, 2) == 1.0);
}

TEST_CASE("karate club") {
  auto ds = karate_club();
  CHECK(ds.n_nodes() == 34);
  CHECK(ds.graph.n_non_loop_edges() == 78);
  CHECK(ds.graph.nnz() == 34 + 156);
  CHECK(ds.n_classes == 2);
  int zeros = 0;
  for (int y : ds.labels) zeros += y == 0;
  CHECK(zeros == 17);
  check_invariants(ds.graph);
}

TEST_CASE("load_dataset reads the TSV layout") {
  auto dir = tiny_dataset("load_ok", "0\t1\n1\t2\n2\t1\n");
  auto ds = load_dataset(dir);
  CHECK(ds.n_nodes() == 3);
  CHECK(ds.feature_dim() == 2);
  CHECK(ds.graph.n_non_loop_edges() == 2);
  CHECK(ds.labels == std::vector<int>{0, 1, kUnknownLabel});
  CHECK(ds.features.to_dense() == std::vector<double>{1, 0, 0, 2.5, 0, 0});
}

TEST_CASE("load_dataset reports the failing line") {
  auto dir = tiny_dataset("load_bad_line", "0\t1\n1\tx\n");
  try {
    load_dataset(dir);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("load_dataset rejects out-of-range node ids") {
  auto dir = tiny_dataset("load_bounds", "0\t7\n");
  CHECK_THROWS_AS(load_dataset(dir), BoundsError);
}

TEST_CASE("load_dataset requires at least two classes") {
  auto dir = tiny_dataset("load_classes", "0\t1\n", R"({"n": 3, "d": 2, "c": 1})");
  CHECK_THROWS_AS(load_dataset(dir), InvalidArgument);
}

TEST_CASE("load_dataset missing directory") {
  CHECK_THROWS_AS(load_dataset(test::temp_dir("load_missing") / "nope"), IoError);
}

TEST_CASE("save then load round trip") {
  auto ds = karate_club();
  auto dir = test::temp_dir("round_trip");
  save_dataset(ds, dir);
  auto back = load_dataset(dir);
  CHECK(back.graph == ds.graph);
  CHECK(back.features == ds.features);
  CHECK(back.labels == ds.labels);
  CHECK(back.n_classes == ds.n_classes);
}

TEST_CASE("make_split sizes") {
  auto ds = synth_random_graph(2708, 2.0, 1);
  auto s = make_split(ds, {0.6, 0.2, 0.2}, 3);
  CHECK(count(s.train) == 1626);
  CHECK(count(s.val) == 541);
  CHECK(count(s.test) == 541);
  for (std::size_t i = 0; i < ds.n_nodes(); ++i) CHECK(int(s.train[i]) + int(s.val[i]) + int(s.test[i]) == 1);

  auto small = synth_random_graph(10, 2.0, 1);
  auto t = make_split(small, {0.6, 0.2, 0.2}, 3);
  CHECK(count(t.train) == 6);
  CHECK(count(t.val) == 2);
  CHECK(count(t.test) == 2);
}

TEST_CASE("make_split is seeded") {
  auto ds = karate_club();
  auto a = make_split(ds, {0.6, 0.2, 0.2}, 11);
  auto b = make_split(ds, {0.6, 0.2, 0.2}, 11);
  auto c = make_split(ds, {0.6, 0.2, 0.2}, 12);
  CHECK(a.train == b.train);
  CHECK(a.val == b.val);
  CHECK(a.train != c.train);
}

TEST_CASE("make_split validation") {
  auto ds = karate_club();
  CHECK_THROWS_AS(make_split(ds, {0.5, 0.5, 0.5}, 0), InvalidArgument);
  CHECK_THROWS_AS(make_split(ds, {1.0, 0.0, 0.0}, 0), InvalidArgument);
  ds.labels.assign(ds.n_nodes(), kUnknownLabel);
  ds.labels[0] = 0;
  ds.labels[1] = 1;
  CHECK_THROWS_AS(make_split(ds, {0.6, 0.2, 0.2}, 0), InvalidArgument);
}

TEST_CASE("unlabeled nodes stay out of every split") {
  auto ds = karate_club();
  ds.labels[5] = kUnknownLabel;
  auto s = make_split(ds, {0.6, 0.2, 0.2}, 0);
  CHECK_FALSE(s.train[5]);
  CHECK_FALSE(s.val[5]);
  CHECK_FALSE(s.test[5]);
}

TEST_CASE("row normalization") {
  std::vector<double> dense{1, 3, 0, 0, 0, 2};
  auto x = row_normalize_features(FeatureMatrix::from_dense(3, 2, dense));
  CHECK(x.to_dense() == std::vector<double>{0.25, 0.75, 0, 0, 0, 1});
  std::vector<double> neg{-1, 1};
  CHECK_THROWS_AS(row_normalize_features(FeatureMatrix::from_dense(1, 2, neg)), InvalidArgument);
}

TEST_CASE("normalized adjacency") {
  std::vector<Edge> edges{{0, 1}, {1, 2}};
  auto g = SparseGraph::from_edges(3, edges);
  auto u = uniform_adjacency(g);
  CHECK(u.at(0, 0) == doctest::Approx(0.5));
  CHECK(u.at(1, 0) == doctest::Approx(1.0 / 3));
  CHECK(u.at(0, 2) == 0.0);

  Rng rng(4);
  auto w = test::random_values(g.n_undirected_edges(), rng, 0.1, 3.0);
  auto op = normalized_adjacency(g, w);
  auto dense = op.to_dense();
  for (int i = 0; i < 3; ++i) {
    double s = 0;
    for (int j = 0; j < 3; ++j) s += dense[i * 3 + j];
    CHECK(s == doctest::Approx(1.0).epsilon(1e-15));
  }
  auto w2 = w;
  for (auto& x : w2) x *= 7.5;
  auto dense2 = normalized_adjacency(g, w2).to_dense();
  for (std::size_t i = 0; i < dense.size(); ++i) CHECK(dense2[i] == doctest::Approx(dense[i]).epsilon(1e-14));

  w[0] = 0.0;
  CHECK_THROWS_AS(normalized_adjacency(g, w), InvalidArgument);
  std::vector<double> short_w{1.0};
  CHECK_THROWS_AS(normalized_adjacency(g, short_w), InvalidArgument);
}

TEST_CASE("intra-class edge rate") {
  std::vector<Edge> edges{{0, 1}, {1, 2}, {2, 3}};
  auto g = SparseGraph::from_edges(4, edges);
  std::vector<int> same{0, 0, 0, 0};
  CHECK(intra_class_edge_rate(g, same) == 1.0);
  std::vector<int> mixed{0, 0, 1, 1};
  CHECK(intra_class_edge_rate(g, mixed) == doctest::Approx(2.0 / 3));
  auto lonely = SparseGraph::from_edges(2, std::vector<Edge>{});
  std::vector<int> two{0, 1};
  CHECK_THROWS_AS(intra_class_edge_rate(lonely, two), InvalidArgument);
}

TEST_CASE("synthetic random graph") {
  auto ds = synth_random_graph(1000, 5.0, 9);
  CHECK(ds.graph.n_non_loop_edges() == 2500);
  CHECK(ds.n_classes == 2);
  CHECK(ds.features.nnz() == 1000);
  check_invariants(ds.graph);
  CHECK(synth_random_graph(1000, 5.0, 9).graph == ds.graph);
  CHECK(synth_random_graph(2, 1.0, 0).graph.n_non_loop_edges() == 1);
  CHECK_THROWS_AS(synth_random_graph(3, 10.0, 0), InvalidArgument);
}

TEST_CASE("noise edges") {
  auto ds = karate_club();
  auto noisy = add_noise_edges(ds, 20, 5);
  CHECK(noisy.graph.n_non_loop_edges() == 98);
  check_invariants(noisy.graph);
  std::set<Edge> before;
  for (auto e : ds.graph.non_loop_edges()) before.insert(e);
  for (auto e : noisy.graph.non_loop_edges()) {
    if (before.count(e)) continue;
    CHECK(ds.labels[e.u] != ds.labels[e.v]);
  }
  CHECK(add_noise_edges(ds, 0, 5).graph == ds.graph);
  CHECK(add_noise_edges(ds, 20, 5).graph == noisy.graph);
  CHECK_THROWS_AS(add_noise_edges(ds, 1000, 5), InvalidArgument);
}

TEST_CASE("permuted graph keeps structure") {
  auto ds = karate_club();
  std::vector<NodeId> perm(34);
  for (NodeId i = 0; i < 34; ++i) perm[i] = (i * 7 + 3) % 34;
  auto g = ds.graph.permuted(perm);
  check_invariants(g);
  for (auto e : ds.graph.non_loop_edges()) CHECK(g.has_edge(perm[e.u], perm[e.v]));
  CHECK(g.n_non_loop_edges() == 78);
}
