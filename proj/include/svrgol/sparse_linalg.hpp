#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace svrgol {

// Fixed-dimension dense vector of doubles. Dimension is set at construction
// and matches the model dimension for the whole run.
class DenseVector {
 public:
  DenseVector() = default;
  explicit DenseVector(std::size_t dim, double fill = 0.0) : v_(dim, fill) {}
  explicit DenseVector(std::vector<double> values) : v_(std::move(values)) {}

  std::size_t dim() const { return v_.size(); }
  double& operator[](std::size_t i) { return v_[i]; }
  double operator[](std::size_t i) const { return v_[i]; }
  const std::vector<double>& values() const { return v_; }
  std::vector<double>& values() { return v_; }
  bool all_finite() const;

  bool operator==(const DenseVector& o) const { return v_ == o.v_; }

 private:
  std::vector<double> v_;
};

struct SparseEntry {
  std::uint32_t index;
  double value;
  bool operator==(const SparseEntry& o) const {
    return index == o.index && value == o.value;
  }
};

// Sparse vector with strictly increasing indices, all below dim, and no
// stored zeros. The canonicalizing constructor sorts arbitrary (index, value)
// pairs, sums duplicates (hash collisions land here) and drops exact zeros.
class SparseVector {
 public:
  SparseVector() = default;
  explicit SparseVector(std::size_t dim) : dim_(dim) {}
  SparseVector(std::size_t dim, std::vector<SparseEntry> raw);

  // Fast path: caller guarantees indices strictly increasing and < dim.
  // Exact zeros are still dropped.
  static SparseVector from_sorted(std::size_t dim, std::vector<SparseEntry> sorted);

  std::size_t dim() const { return dim_; }
  std::size_t nnz() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<SparseEntry>& entries() const { return entries_; }

  DenseVector to_dense() const;

  bool operator==(const SparseVector& o) const {
    return dim_ == o.dim_ && entries_ == o.entries_;
  }

 private:
  std::vector<SparseEntry> entries_;
  std::size_t dim_ = 0;
};

// sum_i a_i * b_i over a's support, ascending index order.
double dot(const SparseVector& a, const DenseVector& b);

// y += alpha * x; touches only x's support.
void axpy_sparse(double alpha, const SparseVector& x, DenseVector& y);

double l2_norm(const DenseVector& v);

}  // namespace svrgol
