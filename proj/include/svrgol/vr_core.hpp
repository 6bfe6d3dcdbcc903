#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "svrgol/data.hpp"
#include "svrgol/losses.hpp"
#include "svrgol/sparse_linalg.hpp"

namespace svrgol {

// Anchor point v_k with its approximate batch gradient.
struct AnchorState {
  DenseVector v;
  DenseVector batch_grad;
  int epoch = 0;
  std::uint64_t batch_size_used = 1;
};

// Per-coordinate nonzero frequencies gathered during the batch phase; the
// importance weights for the sparse combine are 1/p_hat(i).
struct FeatureStats {
  std::vector<std::uint32_t> nonzero_counts;
  std::uint64_t total = 0;
  double p_floor = 1.0;

  double p_hat(std::uint32_t i) const {
    const double p =
        static_cast<double>(nonzero_counts[i]) / static_cast<double>(total);
    return p > p_floor ? p : p_floor;
  }
};

// grad_w - grad_anchor + batch_grad, evaluated coordinatewise so that equal
// grad_w and grad_anchor yield batch_grad bit-exactly.
DenseVector combine_dense(const SparseVector& grad_w,
                          const SparseVector& grad_anchor,
                          const DenseVector& batch_grad);

// Sparse variant: the dense batch gradient is importance-sampled onto the
// support of grad_w with weights 1/p_hat(i), keeping the estimate unbiased
// while the update stays as sparse as the sample. Requires
// support(grad_anchor) within support(grad_w) (same sample, linear loss).
SparseVector combine_sparse(const SparseVector& grad_w,
                            const SparseVector& grad_anchor,
                            const DenseVector& batch_grad,
                            const FeatureStats& stats);

struct BatchGradient {
  DenseVector grad;
  FeatureStats stats;
};

// Mean logistic gradient over `samples` at anchor v, computed by `workers`
// threads. Samples are split into fixed-size blocks; block partial sums are
// combined by a binary tree whose shape depends only on the block count, so
// the result is bitwise identical for every worker count.
BatchGradient batch_gradient(const DenseVector& v,
                             std::span<const Example* const> samples,
                             int workers, std::size_t block_size = 4096);

// Smallest batch size N for which the Hoeffding accuracy bound
// sqrt((2 G^2 log(K/delta) + G^2) / N) drops to eps.
std::uint64_t required_batch_size(double G, std::uint64_t K, double delta,
                                  double eps);

struct VarianceReport {
  double estimate = 0.0;      // Monte-Carlo mean of ||g_t||^2
  double bound = 0.0;         // 8L(F(w)-F*) + 8L(F(v)-F*) + 2||b||^2
  double bias_norm = 0.0;     // ||batch_grad - exact grad F(v)||
  bool degenerate = false;    // estimate below noise floor, trivially fine
  bool pass = false;
};

// Monte-Carlo check of the variance-reduction bound at slack 1.5. w_star must
// be a (near-)optimum of the finite dataset objective.
VarianceReport monte_carlo_variance_check(const DenseVector& w,
                                          const AnchorState& anchor,
                                          const Dataset& d,
                                          std::uint64_t n_samples,
                                          const DenseVector& w_star,
                                          std::uint64_t seed = 1);

}  // namespace svrgol
