#include "svrgol/sparse_linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace svrgol {

bool DenseVector::all_finite() const {
  for (double x : v_) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

SparseVector::SparseVector(std::size_t dim, std::vector<SparseEntry> raw)
    : dim_(dim) {
  std::stable_sort(raw.begin(), raw.end(),
                   [](const SparseEntry& a, const SparseEntry& b) {
                     return a.index < b.index;
                   });
  entries_.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size();) {
    const std::uint32_t idx = raw[i].index;
    if (idx >= dim_) throw std::invalid_argument("sparse index out of range");
    double sum = 0.0;
    for (; i < raw.size() && raw[i].index == idx; ++i) sum += raw[i].value;
    if (sum != 0.0) entries_.push_back({idx, sum});
  }
}

SparseVector SparseVector::from_sorted(std::size_t dim,
                                       std::vector<SparseEntry> sorted) {
  SparseVector out(dim);
  out.entries_.reserve(sorted.size());
  for (const SparseEntry& e : sorted) {
    if (e.index >= dim) throw std::invalid_argument("sparse index out of range");
    if (!out.entries_.empty() && e.index <= out.entries_.back().index)
      throw std::invalid_argument("sparse indices not strictly increasing");
    if (e.value != 0.0) out.entries_.push_back(e);
  }
  return out;
}

DenseVector SparseVector::to_dense() const {
  DenseVector out(dim_);
  for (const SparseEntry& e : entries_) out[e.index] = e.value;
  return out;
}

double dot(const SparseVector& a, const DenseVector& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("dot: dimension mismatch");
  double sum = 0.0;
  for (const SparseEntry& e : a.entries()) sum += e.value * b[e.index];
  return sum;
}

void axpy_sparse(double alpha, const SparseVector& x, DenseVector& y) {
  if (x.dim() != y.dim())
    throw std::invalid_argument("axpy_sparse: dimension mismatch");
  for (const SparseEntry& e : x.entries()) y[e.index] += alpha * e.value;
}

double l2_norm(const DenseVector& v) {
  double sum = 0.0;
  for (double x : v.values()) sum += x * x;
  return std::sqrt(sum);
}

}  // namespace svrgol
