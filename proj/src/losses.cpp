#include "svrgol/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace svrgol {

double stable_sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logistic_loss(const DenseVector& w, const Example& e) {
  const double margin = static_cast<double>(e.label) * dot(e.features, w);
  // log(1 + exp(-margin)) without overflow: branch on the sign.
  if (margin >= 0.0) return std::log1p(std::exp(-margin));
  return -margin + std::log1p(std::exp(margin));
}

double logistic_grad_scale(const DenseVector& w, const Example& e) {
  const double margin = static_cast<double>(e.label) * dot(e.features, w);
  return -static_cast<double>(e.label) * stable_sigmoid(-margin);
}

SparseVector logistic_grad(const DenseVector& w, const Example& e) {
  const double scale = logistic_grad_scale(w, e);
  std::vector<SparseEntry> entries;
  entries.reserve(e.features.nnz());
  for (const SparseEntry& ent : e.features.entries())
    entries.push_back({ent.index, scale * ent.value});
  return SparseVector::from_sorted(e.features.dim(), std::move(entries));
}

ProblemMeta estimate_constants(const Dataset& d, double diameter) {
  if (d.empty()) throw std::invalid_argument("estimate_constants: empty dataset");
  double max_sq = 0.0;
  for (const Example& e : d.examples) {
    double sq = 0.0;
    for (const SparseEntry& ent : e.features.entries())
      sq += ent.value * ent.value;
    if (sq > max_sq) max_sq = sq;
  }
  ProblemMeta meta;
  meta.G = std::sqrt(max_sq);
  meta.L = max_sq / 4.0;
  meta.D = diameter;
  meta.dim = d.dim;
  return meta;
}

DenseVector mean_gradient(const DenseVector& w, const Dataset& d) {
  if (d.empty()) throw std::invalid_argument("mean_gradient: empty dataset");
  DenseVector sum(w.dim());
  for (const Example& e : d.examples) axpy_sparse(1.0, logistic_grad(w, e), sum);
  const double inv = 1.0 / static_cast<double>(d.size());
  for (double& x : sum.values()) x *= inv;
  return sum;
}

}  // namespace svrgol
