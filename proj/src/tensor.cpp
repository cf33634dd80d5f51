#include "graphflow/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_set>

#include "graphflow/error.hpp"

namespace graphflow {
namespace {

std::uint64_t next_seq() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}

std::string shape_str(const Tensor& t) { return std::to_string(t.rows()) + "x" + std::to_string(t.cols()); }

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " + shape_str(b));
  }
}

constexpr double kDistributionFloor = 1e-12;

}  // namespace

double softplus(double x) {
  if (x > 30.0) return x + std::log1p(std::exp(-x));
  // Floored at the smallest normal double so the result stays positive.
  if (x < -30.0) return std::max(std::exp(x), std::numeric_limits<double>::min());
  return std::log1p(std::exp(x));
}

double softplus_inverse(double y) {
  if (!(y > 0.0)) throw InvalidArgument("softplus_inverse needs a positive argument");
  if (y > 30.0) return y + std::log(-std::expm1(-y));
  return std::log(std::expm1(y));
}

Tensor::Tensor() : node_(std::make_shared<detail::Node>()) { node_->seq = next_seq(); }

Tensor Tensor::constant(std::size_t rows, std::size_t cols, std::vector<double> values) {
  if (values.size() != rows * cols) {
    throw ShapeError("buffer of " + std::to_string(values.size()) + " values for a " + std::to_string(rows) + "x" +
                     std::to_string(cols) + " tensor");
  }
  auto n = std::make_shared<detail::Node>();
  n->rows = rows;
  n->cols = cols;
  n->value = std::move(values);
  n->seq = next_seq();
  return Tensor(std::move(n));
}

Tensor Tensor::zeros(std::size_t rows, std::size_t cols) {
  return constant(rows, cols, std::vector<double>(rows * cols, 0.0));
}

Tensor Tensor::parameter(std::size_t rows, std::size_t cols, std::vector<double> values) {
  Tensor t = constant(rows, cols, std::move(values));
  t.node_->requires_grad = true;
  return t;
}

Tensor Tensor::scalar(double v) { return constant(1, 1, {v}); }

double Tensor::item() const {
  if (size() != 1) throw ShapeError("item() on a " + shape_str(*this) + " tensor");
  return node_->value[0];
}

void Tensor::zero_grad() { std::fill(node_->grad.begin(), node_->grad.end(), 0.0); }

Tensor Tensor::detach() const { return constant(rows(), cols(), node_->value); }

Tensor Tensor::make_result(std::size_t rows, std::size_t cols, std::vector<double> values,
                           std::vector<Tensor> inputs, std::function<void(detail::Node&)> backward) {
  Tensor t = constant(rows, cols, std::move(values));
  bool any = std::any_of(inputs.begin(), inputs.end(), [](const Tensor& i) { return i.requires_grad(); });
  if (!any) return t;
  auto& n = *t.node_;
  n.requires_grad = true;
  for (auto& i : inputs) n.parents.push_back(i.node_);
  n.backward = std::move(backward);
  return t;
}

void backward(const Tensor& loss) {
  if (loss.size() != 1) throw ShapeError("backward() needs a scalar loss, got " + shape_str(loss));
  if (!loss.requires_grad()) return;

  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> seen;
  std::vector<detail::Node*> stack{&loss.node()};
  seen.insert(&loss.node());
  while (!stack.empty()) {
    detail::Node* n = stack.back();
    stack.pop_back();
    order.push_back(n);
    for (auto& p : n->parents) {
      if (p->requires_grad && seen.insert(p.get()).second) stack.push_back(p.get());
    }
  }
  std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->seq > b->seq; });
  for (auto* n : order) {
    if (!n->is_leaf()) n->grad.assign(n->value.size(), 0.0);
  }
  loss.node().grad_buffer()[0] += 1.0;
  for (auto* n : order) {
    if (n->is_leaf()) continue;
    n->backward(*n);
    n->grad.clear();
    n->grad.shrink_to_fit();
  }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions differ " + shape_str(a) + " * " + shape_str(b));
  }
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  std::vector<double> out(m * n, 0.0);
  auto av = a.values(), bv = b.values();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      double aip = av[i * k + p];
      if (aip == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += aip * bv[p * n + j];
    }
  auto an = a.node_ptr(), bn = b.node_ptr();
  return Tensor::make_result(m, n, std::move(out), {a, b}, [an, bn, m, k, n](detail::Node& self) {
    const auto& g = self.grad;
    if (an->requires_grad) {
      auto& ga = an->grad_buffer();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double s = 0.0;
          for (std::size_t j = 0; j < n; ++j) s += g[i * n + j] * bn->value[p * n + j];
          ga[i * k + p] += s;
        }
    }
    if (bn->requires_grad) {
      auto& gb = bn->grad_buffer();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double aip = an->value[i * k + p];
          if (aip == 0.0) continue;
          for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += aip * g[i * n + j];
        }
    }
  });
}

Tensor sparse_matmul(std::shared_ptr<const FeatureMatrix> x, const Tensor& w) {
  if (x->cols != w.rows()) {
    throw ShapeError("sparse_matmul: inner dimensions differ " + std::to_string(x->rows) + "x" +
                     std::to_string(x->cols) + " * " + shape_str(w));
  }
  const std::size_t m = x->rows, n = w.cols();
  std::vector<double> out(m * n, 0.0);
  auto wv = w.values();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = x->row_ptr[i]; p < x->row_ptr[i + 1]; ++p) {
      double xv = x->values[p];
      const double* wr = &wv[static_cast<std::size_t>(x->col_idx[p]) * n];
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += xv * wr[j];
    }
  auto wn = w.node_ptr();
  return Tensor::make_result(m, n, std::move(out), {w}, [x, wn, m, n](detail::Node& self) {
    auto& gw = wn->grad_buffer();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t p = x->row_ptr[i]; p < x->row_ptr[i + 1]; ++p) {
        double xv = x->values[p];
        double* gr = &gw[static_cast<std::size_t>(x->col_idx[p]) * n];
        for (std::size_t j = 0; j < n; ++j) gr[j] += xv * self.grad[i * n + j];
      }
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] + b.values()[i];
  auto an = a.node_ptr(), bn = b.node_ptr();
  return Tensor::make_result(a.rows(), a.cols(), std::move(out), {a, b}, [an, bn](detail::Node& self) {
    for (auto* p : {an.get(), bn.get()}) {
      if (!p->requires_grad) continue;
      auto& g = p->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

namespace {

// Elementwise op whose derivative is a function of the input value.
template <typename F, typename D>
Tensor unary(const Tensor& x, F&& f, D&& df) {
  std::vector<double> out(x.size());
  auto xv = x.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(xv[i]);
  auto xn = x.node_ptr();
  return Tensor::make_result(x.rows(), x.cols(), std::move(out), {x}, [xn, df](detail::Node& self) {
    auto& g = xn->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * df(xn->value[i]);
  });
}

double logistic(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  double e = std::exp(v);
  return e / (1.0 + e);
}

}  // namespace

Tensor scale(const Tensor& a, double s) {
  return unary(
      a, [s](double v) { return v * s; }, [s](double) { return s; });
}

Tensor relu(const Tensor& x) {
  return unary(
      x, [](double v) { return v > 0.0 ? v : 0.0; }, [](double v) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor sigmoid(const Tensor& x) {
  return unary(x, logistic, [](double v) {
    double s = logistic(v);
    return s * (1.0 - s);
  });
}

Tensor softplus(const Tensor& x) {
  return unary(x, [](double v) { return softplus(v); }, logistic);
}

Tensor sum(const Tensor& x) {
  double s = 0.0;
  for (double v : x.values()) s += v;
  auto xn = x.node_ptr();
  return Tensor::make_result(1, 1, {s}, {x}, [xn](detail::Node& self) {
    auto& g = xn->grad_buffer();
    for (double& gi : g) gi += self.grad[0];
  });
}

Tensor squared_norm(const Tensor& x) {
  double s = 0.0;
  for (double v : x.values()) s += v * v;
  auto xn = x.node_ptr();
  return Tensor::make_result(1, 1, {s}, {x}, [xn](detail::Node& self) {
    auto& g = xn->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += 2.0 * xn->value[i] * self.grad[0];
  });
}

Tensor pick(const Tensor& x, std::size_t row, std::size_t col) {
  if (row >= x.rows() || col >= x.cols()) {
    throw ShapeError("pick(" + std::to_string(row) + ", " + std::to_string(col) + ") out of " + shape_str(x));
  }
  const std::size_t idx = row * x.cols() + col;
  auto xn = x.node_ptr();
  return Tensor::make_result(1, 1, {x.values()[idx]}, {x},
                             [xn, idx](detail::Node& self) { xn->grad_buffer()[idx] += self.grad[0]; });
}

Tensor reset_rows(const Tensor& x, const std::vector<bool>& mask, const Tensor& source) {
  require_same_shape(x, source, "reset_rows");
  if (mask.size() != x.rows()) throw ShapeError("reset_rows: mask length differs from row count");
  const std::size_t cols = x.cols();
  std::vector<double> out(x.values().begin(), x.values().end());
  for (std::size_t i = 0; i < x.rows(); ++i)
    if (mask[i])
      std::copy_n(source.values().begin() + static_cast<std::ptrdiff_t>(i * cols), cols,
                  out.begin() + static_cast<std::ptrdiff_t>(i * cols));
  auto xn = x.node_ptr(), sn = source.node_ptr();
  return Tensor::make_result(x.rows(), cols, std::move(out), {x, source}, [xn, sn, mask, cols](detail::Node& self) {
    for (std::size_t i = 0; i < mask.size(); ++i) {
      detail::Node* target = mask[i] ? sn.get() : xn.get();
      if (!target->requires_grad) continue;
      auto& g = target->grad_buffer();
      for (std::size_t j = 0; j < cols; ++j) g[i * cols + j] += self.grad[i * cols + j];
    }
  });
}

Tensor dropout(const Tensor& x, double rate, bool training, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw InvalidArgument("dropout rate must be in [0, 1)");
  if (!training || rate == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> factor(x.size());
  for (double& f : factor) f = rng.uniform01() < rate ? 0.0 : keep_scale;
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.values()[i] * factor[i];
  auto xn = x.node_ptr();
  return Tensor::make_result(x.rows(), x.cols(), std::move(out), {x},
                             [xn, factor = std::move(factor)](detail::Node& self) {
                               auto& g = xn->grad_buffer();
                               for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * factor[i];
                             });
}

FeatureMatrix dropout(const FeatureMatrix& x, double rate, bool training, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw InvalidArgument("dropout rate must be in [0, 1)");
  if (!training || rate == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - rate);
  FeatureMatrix out;
  out.rows = x.rows;
  out.cols = x.cols;
  out.row_ptr.assign(x.rows + 1, 0);
  out.col_idx.reserve(x.nnz());
  out.values.reserve(x.nnz());
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t p = x.row_ptr[i]; p < x.row_ptr[i + 1]; ++p) {
      if (rng.uniform01() < rate) continue;
      out.col_idx.push_back(x.col_idx[p]);
      out.values.push_back(x.values[p] * keep_scale);
    }
    out.row_ptr[i + 1] = out.values.size();
  }
  return out;
}

namespace {

std::vector<std::size_t> masked_rows(const Tensor& t, std::span<const int> labels, const std::vector<bool>& mask,
                                     const char* op) {
  if (labels.size() != t.rows() || mask.size() != t.rows()) {
    throw ShapeError(std::string(op) + ": labels/mask length differs from row count");
  }
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= t.cols()) {
      throw InvalidArgument(std::string(op) + ": masked row " + std::to_string(i) + " has no valid label");
    }
    rows.push_back(i);
  }
  if (rows.empty()) throw InvalidArgument(std::string(op) + ": empty mask");
  return rows;
}

}  // namespace

Tensor masked_softmax_cross_entropy(const Tensor& logits, std::span<const int> labels,
                                    const std::vector<bool>& mask) {
  auto rows = masked_rows(logits, labels, mask, "masked_softmax_cross_entropy");
  const std::size_t c = logits.cols();
  const double inv_m = 1.0 / static_cast<double>(rows.size());
  std::vector<double> probs(rows.size() * c);
  std::vector<int> targets(rows.size());
  double loss = 0.0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double* z = &logits.values()[rows[r] * c];
    double mx = *std::max_element(z, z + c);
    double se = 0.0;
    for (std::size_t j = 0; j < c; ++j) se += std::exp(z[j] - mx);
    double lse = mx + std::log(se);
    targets[r] = labels[rows[r]];
    loss += lse - z[targets[r]];
    for (std::size_t j = 0; j < c; ++j) probs[r * c + j] = std::exp(z[j] - lse);
  }
  auto ln = logits.node_ptr();
  return Tensor::make_result(
      1, 1, {loss * inv_m}, {logits},
      [ln, rows = std::move(rows), probs = std::move(probs), targets = std::move(targets), c,
       inv_m](detail::Node& self) {
        auto& g = ln->grad_buffer();
        const double s = self.grad[0] * inv_m;
        for (std::size_t r = 0; r < rows.size(); ++r) {
          double* gr = &g[rows[r] * c];
          for (std::size_t j = 0; j < c; ++j) gr[j] += s * probs[r * c + j];
          gr[targets[r]] -= s;
        }
      });
}

Tensor masked_distribution_cross_entropy(const Tensor& probs, std::span<const int> labels,
                                         const std::vector<bool>& mask) {
  auto rows = masked_rows(probs, labels, mask, "masked_distribution_cross_entropy");
  const std::size_t c = probs.cols();
  const double inv_m = 1.0 / static_cast<double>(rows.size());
  const double eps = kDistributionFloor;
  double loss = 0.0;
  for (std::size_t i : rows) {
    const double* p = &probs.values()[i * c];
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      if (p[j] < 0.0) throw InvalidArgument("masked_distribution_cross_entropy: negative mass");
      s += p[j];
    }
    loss += std::log(s + static_cast<double>(c) * eps) - std::log(p[labels[i]] + eps);
  }
  auto pn = probs.node_ptr();
  std::vector<int> lab(labels.begin(), labels.end());
  return Tensor::make_result(
      1, 1, {loss * inv_m}, {probs}, [pn, rows = std::move(rows), lab = std::move(lab), c, inv_m, eps](detail::Node& self) {
        auto& g = pn->grad_buffer();
        const double s = self.grad[0] * inv_m;
        for (std::size_t i : rows) {
          const double* p = &pn->value[i * c];
          double tot = 0.0;
          for (std::size_t j = 0; j < c; ++j) tot += p[j];
          const double d_sum = 1.0 / (tot + static_cast<double>(c) * eps);
          for (std::size_t j = 0; j < c; ++j) g[i * c + j] += s * d_sum;
          g[i * c + static_cast<std::size_t>(lab[i])] -= s / (p[lab[i]] + eps);
        }
      });
}

}  // namespace graphflow
