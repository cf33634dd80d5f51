#pragma once

#include <span>
#include <vector>

namespace graphflow {

struct ProbeResult {
  double accuracy = 0.0;
  std::vector<double> weights;  // one per column, then the bias
  int iterations = 0;
};

// Binary logistic regression with a bias, fit by Newton's method on all
// rows of a row-major n x d matrix, then scored on the same rows. Labels
// must be 0 or 1. A tiny ridge term keeps the Hessian invertible when
// the classes are separable, in which case the weights grow until the
// iteration cap but accuracy has already settled.
ProbeResult logistic_probe(std::span<const double> x, std::size_t n, std::size_t d, std::span<const int> labels,
                           int max_iters = 100);

}  // namespace graphflow
