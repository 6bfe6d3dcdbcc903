#pragma once

#include <cstdint>
#include <vector>

#include "svrgol/data.hpp"
#include "svrgol/sparse_linalg.hpp"

namespace svrgol {

// Mean logistic loss over the dataset, one pass in example order.
double average_loss(const DenseVector& w, const Dataset& d);

// Mann-Whitney AUC: (#concordant pairs + 0.5 #ties) / (#pos #neg), computed
// by rank sums in O(n log n). Throws on single-class input.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

// Scores w.x over a dataset plus its labels; feed for auc().
void score_dataset(const DenseVector& w, const Dataset& d,
                   std::vector<double>& scores, std::vector<int>& labels);

// F(w) - F(w_star); may go slightly negative within oracle tolerance.
double suboptimality(const DenseVector& w, const Dataset& d,
                     const DenseVector& w_star);

struct OracleResult {
  DenseVector w;
  double grad_norm = 0.0;
  std::uint64_t iterations = 0;
  bool converged = false;
};

// Deterministic full-batch solver (Barzilai-Borwein steps with a halving
// safeguard) run until ||grad F|| <= tol. Reference optimum for synthetic
// runs and the acceptance suite.
OracleResult solve_logistic(const Dataset& d, double tol = 1e-10,
                            std::uint64_t max_iterations = 200000);

}  // namespace svrgol
