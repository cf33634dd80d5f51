#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "graphflow/tensor.hpp"

namespace test {

// Largest relative gap between tape gradients and central differences
// over every entry of every parameter. Gradients below `floor` in
// magnitude are compared on an absolute scale of `floor`.
inline double gradient_error(std::vector<graphflow::Tensor> params, const std::function<graphflow::Tensor()>& loss,
                             double h = 1e-5, double floor = 1e-4) {
  for (auto& p : params) p.zero_grad();
  graphflow::backward(loss());
  std::vector<std::vector<double>> analytic;
  for (auto& p : params) {
    auto g = p.grad();
    analytic.emplace_back(g.begin(), g.end());
    if (analytic.back().empty()) analytic.back().assign(p.size(), 0.0);
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto v = params[k].mutable_values();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double keep = v[i];
      v[i] = keep + h;
      const double up = loss().item();
      v[i] = keep - h;
      const double down = loss().item();
      v[i] = keep;
      const double numeric = (up - down) / (2.0 * h);
      const double scale = std::max({std::abs(numeric), std::abs(analytic[k][i]), floor});
      worst = std::max(worst, std::abs(numeric - analytic[k][i]) / scale);
    }
  }
  return worst;
}

inline std::vector<double> random_values(std::size_t n, graphflow::Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("graphflow_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace test
