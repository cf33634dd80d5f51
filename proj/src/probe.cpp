#include "graphflow/probe.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "graphflow/error.hpp"
#include "graphflow/tensor.hpp"

namespace graphflow {
namespace {

constexpr double kRidge = 1e-6;

// Solves A z = b in place (A is m x m, row-major) with partial pivoting.
std::vector<double> solve(std::vector<double> a, std::vector<double> b, std::size_t m) {
  for (std::size_t c = 0; c < m; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < m; ++r)
      if (std::abs(a[r * m + c]) > std::abs(a[piv * m + c])) piv = r;
    if (a[piv * m + c] == 0.0) throw InvalidArgument("logistic probe: singular system");
    if (piv != c) {
      for (std::size_t k = 0; k < m; ++k) std::swap(a[c * m + k], a[piv * m + k]);
      std::swap(b[c], b[piv]);
    }
    for (std::size_t r = c + 1; r < m; ++r) {
      const double f = a[r * m + c] / a[c * m + c];
      for (std::size_t k = c; k < m; ++k) a[r * m + k] -= f * a[c * m + k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> z(m);
  for (std::size_t c = m; c-- > 0;) {
    double s = b[c];
    for (std::size_t k = c + 1; k < m; ++k) s -= a[c * m + k] * z[k];
    z[c] = s / a[c * m + c];
  }
  return z;
}

double margin(std::span<const double> x, std::size_t d, std::size_t i, const std::vector<double>& w) {
  double z = w[d];
  for (std::size_t j = 0; j < d; ++j) z += w[j] * x[i * d + j];
  return z;
}

// Penalized negative log-likelihood.
double objective(std::span<const double> x, std::size_t n, std::size_t d, std::span<const int> y,
                 const std::vector<double>& w) {
  double f = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = margin(x, d, i, w);
    f += y[i] == 1 ? softplus(-z) : softplus(z);
  }
  for (std::size_t j = 0; j < d; ++j) f += 0.5 * kRidge * w[j] * w[j];
  return f;
}

}  // namespace

ProbeResult logistic_probe(std::span<const double> x, std::size_t n, std::size_t d, std::span<const int> labels,
                           int max_iters) {
  if (x.size() != n * d || labels.size() != n) throw ShapeError("logistic probe: shape mismatch");
  if (n == 0) throw InvalidArgument("logistic probe: no rows");
  for (int y : labels)
    if (y != 0 && y != 1) throw InvalidArgument("logistic probe expects labels 0/1");

  const std::size_t m = d + 1;
  ProbeResult res;
  res.weights.assign(m, 0.0);
  auto& w = res.weights;
  double f = objective(x, n, d, labels, w);
  for (int it = 0; it < max_iters; ++it) {
    std::vector<double> grad(m, 0.0), hess(m * m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double p = 1.0 / (1.0 + std::exp(-margin(x, d, i, w)));
      const double r = p - labels[i];
      const double s = p * (1.0 - p);
      for (std::size_t a = 0; a < m; ++a) {
        const double xa = a < d ? x[i * d + a] : 1.0;
        grad[a] += r * xa;
        for (std::size_t b = 0; b < m; ++b) hess[a * m + b] += s * xa * (b < d ? x[i * d + b] : 1.0);
      }
    }
    for (std::size_t j = 0; j < m; ++j) {
      const double ridge = j < d ? kRidge : 1e-12;
      grad[j] += (j < d ? kRidge * w[j] : 0.0);
      hess[j * m + j] += ridge;
    }
    const auto step = solve(hess, grad, m);
    // Backtracking keeps Newton monotone far from the optimum.
    double t = 1.0;
    std::vector<double> next(m);
    double f_next = f;
    for (int ls = 0; ls < 50; ++ls) {
      for (std::size_t j = 0; j < m; ++j) next[j] = w[j] - t * step[j];
      f_next = objective(x, n, d, labels, next);
      if (f_next <= f) break;
      t *= 0.5;
    }
    res.iterations = it + 1;
    if (f_next > f) break;
    double moved = 0.0;
    for (std::size_t j = 0; j < m; ++j) moved = std::max(moved, std::abs(next[j] - w[j]));
    w = next;
    const double drop = f - f_next;
    f = f_next;
    if (moved < 1e-10 || drop < 1e-14) break;
  }
  std::size_t hit = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const int pred = margin(x, d, i, w) > 0.0 ? 1 : 0;
    if (pred == labels[i]) ++hit;
  }
  res.accuracy = static_cast<double>(hit) / static_cast<double>(n);
  return res;
}

}  // namespace graphflow
