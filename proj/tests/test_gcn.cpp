#include <doctest.h>

#include <cmath>
#include <limits>

#include "graphflow/dataset.hpp"
#include "graphflow/error.hpp"
#include "graphflow/gcn.hpp"
#include "support.hpp"

using namespace graphflow;

namespace {

GcnParams identity_params(std::size_t d) {
  std::vector<double> eye(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) eye[i * d + i] = 1.0;
  return {{Tensor::parameter(d, d, eye)}};
}

SparseGraph ring8() {
  std::vector<Edge> edges;
  for (NodeId i = 0; i < 8; ++i) edges.push_back({i, static_cast<NodeId>((i + 1) % 8)});
  edges.push_back({0, 4});
  edges.push_back({2, 6});
  return SparseGraph::from_edges(8, edges);
}

}  // namespace

TEST_CASE("one layer with identity weights is the operator") {
  Rng rng(0);
  auto g = ring8();
  auto w = test::random_values(g.n_undirected_edges(), rng, 0.2, 2);
  auto op = normalized_adjacency(g, w);
  auto x = std::make_shared<const FeatureMatrix>(FeatureMatrix::identity(8));
  auto out = gcn_forward(op, x, identity_params(8), {}, rng);
  auto dense = op.to_dense();
  for (std::size_t i = 0; i < 64; ++i) CHECK(out.values()[i] == doctest::Approx(dense[i]).epsilon(1e-15));
}

TEST_CASE("two nodes average") {
  Rng rng(0);
  auto g = SparseGraph::from_edges(2, std::vector<Edge>{{0, 1}});
  auto x = std::make_shared<const FeatureMatrix>(FeatureMatrix::from_dense(2, 2, std::vector<double>{1, 0, 0, 1}));
  auto out = gcn_forward(uniform_adjacency(g), x, identity_params(2), {}, rng);
  for (double v : out.values()) CHECK(v == 0.5);
}

TEST_CASE("predict") {
  CHECK(predict(Tensor::constant(3, 2, {1, 2, 5, -1, 3, 3})) == std::vector<int>{1, 0, 0});
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(predict(Tensor::constant(1, 2, {nan, 1})), InvalidArgument);
}

TEST_CASE("layer shapes") {
  Rng rng(1);
  auto params = init_gcn_params(5, 4, 3, 3, rng);
  CHECK(params.n_layers() == 3);
  CHECK(params.weights[0].rows() == 5);
  CHECK(params.weights[0].cols() == 4);
  CHECK(params.weights[1].rows() == 4);
  CHECK(params.weights[2].cols() == 3);
  auto g = ring8();
  auto x = std::make_shared<const FeatureMatrix>(FeatureMatrix::from_dense(8, 5, test::random_values(40, rng)));
  auto layers = gcn_layers(uniform_adjacency(g), x, params, {}, rng);
  CHECK(layers.size() == 3);
  CHECK(layers[0].cols() == 4);
  CHECK(layers[2].cols() == 3);
  for (double v : layers[0].values()) CHECK(v >= 0.0);
  CHECK_THROWS_AS(init_gcn_params(5, 4, 3, 0, rng), InvalidArgument);
  auto wrong = std::make_shared<const FeatureMatrix>(FeatureMatrix::identity(5));
  CHECK_THROWS_AS(gcn_forward(uniform_adjacency(g), wrong, params, {}, rng), ShapeError);
}

TEST_CASE("gradients through two layers") {
  Rng rng(2);
  auto g = ring8();
  auto x = std::make_shared<const FeatureMatrix>(FeatureMatrix::from_dense(8, 3, test::random_values(24, rng)));
  auto params = init_gcn_params(3, 4, 2, 2, rng);
  auto theta = Tensor::parameter(g.n_undirected_edges(), 1, test::random_values(g.n_undirected_edges(), rng));
  std::vector<int> labels{0, 1, 0, 1, 1, 0, 0, 1};
  std::vector<bool> mask{true, true, true, false, true, false, true, true};
  for (auto act : {Activation::kRelu, Activation::kSigmoid}) {
    GcnOptions opt{.activation = act};
    auto f = [&] {
      auto op = normalized_adjacency(g, softplus(theta));
      return masked_softmax_cross_entropy(gcn_forward(op, x, params, opt, rng), labels, mask);
    };
    std::vector<Tensor> all = params.weights;
    all.push_back(theta);
    CHECK(test::gradient_error(all, f) <= 1e-4);
  }
}

TEST_CASE("permutation equivariance") {
  Rng rng(3);
  auto g = ring8();
  auto w = test::random_values(g.n_undirected_edges(), rng, 0.2, 2);
  auto feats = FeatureMatrix::from_dense(8, 3, test::random_values(24, rng));
  auto params = init_gcn_params(3, 4, 2, 2, rng);
  std::vector<NodeId> perm{3, 7, 0, 5, 1, 6, 2, 4};

  auto pg = g.permuted(perm);
  std::vector<double> pw(pg.n_undirected_edges());
  for (std::size_t uid = 0; uid < g.n_undirected_edges(); ++uid) {
    auto e = g.undirected_edges()[uid];
    pw[pg.edge_uid()[pg.find_entry(perm[e.u], perm[e.v])]] = w[uid];
  }
  auto a = gcn_forward(normalized_adjacency(g, w), std::make_shared<const FeatureMatrix>(feats), params, {}, rng);
  auto b = gcn_forward(normalized_adjacency(pg, pw), std::make_shared<const FeatureMatrix>(feats.permuted_rows(perm)),
                       params, {}, rng);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(b.at(perm[i], j) == doctest::Approx(a.at(i, j)).epsilon(1e-12));
}

TEST_CASE("constant features are a fixed point of aggregation") {
  Rng rng(4);
  auto g = ring8();
  auto op = normalized_adjacency(g, test::random_values(g.n_undirected_edges(), rng, 0.2, 2));
  std::vector<double> v;
  for (int i = 0; i < 8; ++i) v.insert(v.end(), {0.5, -2.0});
  auto h = aggregate_step(op, Tensor::constant(8, 2, v));
  for (std::size_t i = 0; i < 16; ++i) CHECK(h.values()[i] == doctest::Approx(v[i]).epsilon(1e-14));
}

TEST_CASE("forward is bit reproducible") {
  auto run = [] {
    Rng rng(5);
    auto ds = karate_club();
    auto params = init_gcn_params(34, 8, 2, 2, rng);
    auto x = std::make_shared<const FeatureMatrix>(ds.features);
    auto out = gcn_forward(uniform_adjacency(ds.graph), x, params, {.dropout_rate = 0.3, .training = true}, rng);
    return std::vector<double>(out.values().begin(), out.values().end());
  };
  CHECK(run() == run());
}
