#include <doctest.h>

#include <cmath>

#include "graphflow/optim.hpp"
#include "support.hpp"

using namespace graphflow;

TEST_CASE("glorot range and mean") {
  Rng rng(1);
  auto w = glorot_init(200, 100, rng);
  const double s = std::sqrt(6.0 / 300.0);
  double mean = 0.0;
  for (double v : w.values()) {
    CHECK(std::abs(v) <= s);
    mean += v;
  }
  mean /= static_cast<double>(w.size());
  CHECK(std::abs(mean) < 0.01 * s);
  CHECK(w.requires_grad());
  Rng again(1);
  auto w2 = glorot_init(200, 100, again);
  CHECK(std::equal(w.values().begin(), w.values().end(), w2.values().begin()));
}

TEST_CASE("adam first step moves by the learning rate") {
  auto p = Tensor::parameter(1, 3, {1.0, 1.0, 1.0});
  backward(sum(matmul(p, Tensor::constant(3, 1, {2.0, -0.5, 1e-3}))));
  Adam adam({.learning_rate = 0.1});
  std::vector<Tensor> params{p};
  adam.step(params);
  CHECK(p.values()[0] == doctest::Approx(0.9).epsilon(1e-6));
  CHECK(p.values()[1] == doctest::Approx(1.1).epsilon(1e-6));
  CHECK(p.values()[2] == doctest::Approx(0.9).epsilon(1e-4));
  CHECK(adam.steps() == 1);
}

TEST_CASE("adam leaves zero-gradient parameters alone") {
  auto p = Tensor::parameter(1, 2, {0.5, -0.5});
  Adam adam({.learning_rate = 0.1});
  std::vector<Tensor> params{p};
  adam.step(params);
  CHECK(p.values()[0] == 0.5);
  CHECK(p.values()[1] == -0.5);
}

TEST_CASE("adam is invariant to gradient scale") {
  auto run = [](double k) {
    auto p = Tensor::parameter(1, 2, {1.0, 2.0});
    Adam adam({.learning_rate = 0.05, .epsilon = 0.0});
    std::vector<Tensor> params{p};
    for (int i = 0; i < 20; ++i) {
      p.zero_grad();
      backward(scale(squared_norm(p), k));
      adam.step(params);
    }
    return std::vector<double>(p.values().begin(), p.values().end());
  };
  auto a = run(1.0);
  auto b = run(1000.0);
  CHECK(a[0] == doctest::Approx(b[0]).epsilon(1e-12));
  CHECK(a[1] == doctest::Approx(b[1]).epsilon(1e-12));
  CHECK(run(1.0) == a);
}

TEST_CASE("adam converges on a quadratic") {
  auto p = Tensor::parameter(1, 1, {4.0});
  Adam adam({.learning_rate = 0.1});
  std::vector<Tensor> params{p};
  for (int i = 0; i < 500; ++i) {
    p.zero_grad();
    backward(squared_norm(add(p, Tensor::scalar(-1.0))));
    adam.step(params);
  }
  CHECK(p.item() == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("l2 penalty") {
  std::vector<Tensor> ws{Tensor::parameter(1, 2, {1.0, 2.0}), Tensor::parameter(1, 1, {-2.0})};
  CHECK(l2_penalty(ws, 1e-4).item() == doctest::Approx(9e-4));
  CHECK(l2_penalty(ws, 0.0).item() == 0.0);
  CHECK(test::gradient_error(ws, [&] { return l2_penalty(ws, 0.5); }) <= 1e-8);
}
