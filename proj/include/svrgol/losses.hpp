#pragma once

#include <limits>

#include "svrgol/data.hpp"
#include "svrgol/sparse_linalg.hpp"

namespace svrgol {

// Problem constants: G bounds the gradient norm, L the gradient Lipschitz
// constant, D the domain diameter (infinity = unconstrained, which routes
// learners through bias compensation instead of projection).
struct ProblemMeta {
  double G = 0.0;
  double L = 0.0;
  double D = std::numeric_limits<double>::infinity();
  std::uint32_t dim = 0;
};

// sigma(z) = 1/(1+e^-z), stable on both tails.
double stable_sigmoid(double z);

// log(1 + exp(-y w.x)) via log1p on the safe branch; no overflow for any
// margin.
double logistic_loss(const DenseVector& w, const Example& e);

// -y sigma(-y w.x) x; support equals the support of x.
SparseVector logistic_grad(const DenseVector& w, const Example& e);

// The scalar -y sigma(-y w.x); grad f = scale * x. Lets hot loops skip the
// SparseVector materialization.
double logistic_grad_scale(const DenseVector& w, const Example& e);

// G = max ||x||, L = max ||x||^2 / 4 over the dataset; D comes from config.
ProblemMeta estimate_constants(const Dataset& d,
                               double diameter = std::numeric_limits<double>::infinity());

// Exact mean gradient over the full dataset, ascending example order.
DenseVector mean_gradient(const DenseVector& w, const Dataset& d);

}  // namespace svrgol
