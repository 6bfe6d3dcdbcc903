#include "svrgol/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "svrgol/losses.hpp"

namespace svrgol {

double average_loss(const DenseVector& w, const Dataset& d) {
  if (d.empty()) throw std::invalid_argument("average_loss: empty dataset");
  double sum = 0.0;
  for (const Example& e : d.examples) sum += logistic_loss(w, e);
  return sum / static_cast<double>(d.size());
}

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("auc: scores/labels size mismatch");
  std::size_t pos = 0, neg = 0;
  for (const int y : labels) (y > 0 ? pos : neg) += 1;
  if (pos == 0 || neg == 0)
    throw std::invalid_argument("auc: needs both classes");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  // Average ranks across tie groups; the positive rank sum then counts
  // concordant pairs plus half the ties.
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]] > 0) rank_sum_pos += avg_rank;
    i = j;
  }
  const double p = static_cast<double>(pos);
  return (rank_sum_pos - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

void score_dataset(const DenseVector& w, const Dataset& d,
                   std::vector<double>& scores, std::vector<int>& labels) {
  scores.clear();
  labels.clear();
  scores.reserve(d.size());
  labels.reserve(d.size());
  for (const Example& e : d.examples) {
    scores.push_back(dot(e.features, w));
    labels.push_back(e.label);
  }
}

double suboptimality(const DenseVector& w, const Dataset& d,
                     const DenseVector& w_star) {
  return average_loss(w, d) - average_loss(w_star, d);
}

namespace {

// In-place lower-triangular Cholesky; false when not positive definite.
bool cholesky(std::vector<double>& a, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) diag -= a[j * n + k] * a[j * n + k];
    if (!(diag > 0.0) || !std::isfinite(diag)) return false;
    const double root = std::sqrt(diag);
    a[j * n + j] = root;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) v -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = v / root;
    }
  }
  return true;
}

void cholesky_solve(const std::vector<double>& L, std::size_t n,
                    std::vector<double>& x) {
  for (std::size_t i = 0; i < n; ++i) {
    double v = x[i];
    for (std::size_t k = 0; k < i; ++k) v -= L[i * n + k] * x[k];
    x[i] = v / L[i * n + i];
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double v = x[ii];
    for (std::size_t k = ii + 1; k < n; ++k) v -= L[k * n + ii] * x[k];
    x[ii] = v / L[ii * n + ii];
  }
}

// Newton direction -H^-1 g with an escalating ridge; true on success.
bool newton_direction(const Dataset& d, const DenseVector& w,
                      const DenseVector& grad, std::vector<double>& dir) {
  const std::size_t n = w.dim();
  std::vector<double> hess(n * n, 0.0);
  for (const Example& e : d.examples) {
    const double p = stable_sigmoid(dot(e.features, w));
    const double curv = p * (1.0 - p);
    for (const SparseEntry& a : e.features.entries())
      for (const SparseEntry& b : e.features.entries())
        hess[a.index * n + b.index] += curv * a.value * b.value;
  }
  const double inv = 1.0 / static_cast<double>(d.size());
  double trace = 0.0;
  for (std::size_t i = 0; i < n * n; ++i) hess[i] *= inv;
  for (std::size_t i = 0; i < n; ++i) trace += hess[i * n + i];

  double ridge = 1e-12 * (1.0 + trace / static_cast<double>(n));
  for (int attempt = 0; attempt < 8; ++attempt) {
    std::vector<double> factor = hess;
    for (std::size_t i = 0; i < n; ++i) factor[i * n + i] += ridge;
    if (cholesky(factor, n)) {
      dir.assign(grad.values().begin(), grad.values().end());
      cholesky_solve(factor, n, dir);
      for (double& x : dir) x = -x;
      return true;
    }
    ridge *= 100.0;
  }
  return false;
}

}  // namespace

OracleResult solve_logistic(const Dataset& d, double tol,
                            std::uint64_t max_iterations) {
  const ProblemMeta meta = estimate_constants(d);
  const double eta0 = meta.L > 0.0 ? 1.0 / meta.L : 1.0;
  const bool use_newton = d.dim <= 256;

  OracleResult res;
  res.w = DenseVector(d.dim);
  DenseVector grad = mean_gradient(res.w, d);
  double loss = average_loss(res.w, d);
  DenseVector prev_w = res.w;
  DenseVector prev_grad = grad;
  bool have_prev = false;
  std::vector<double> dir(d.dim);

  for (res.iterations = 0; res.iterations < max_iterations; ++res.iterations) {
    res.grad_norm = l2_norm(grad);
    if (res.grad_norm <= tol) {
      res.converged = true;
      return res;
    }

    bool have_dir = use_newton && newton_direction(d, res.w, grad, dir);
    if (!have_dir) {
      // BB1 step <dw,dw>/<dw,dg> on the negative gradient, clamped.
      double eta = eta0;
      if (have_prev) {
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < grad.dim(); ++i) {
          const double dw = res.w[i] - prev_w[i];
          const double dg = grad[i] - prev_grad[i];
          num += dw * dw;
          den += dw * dg;
        }
        if (den > 0.0 && std::isfinite(num / den))
          eta = std::clamp(num / den, 1e-12, 1e12);
      }
      for (std::size_t i = 0; i < d.dim; ++i) dir[i] = -eta * grad[i];
    }

    prev_w = res.w;
    prev_grad = grad;

    // Full step first: near the optimum loss differences underflow while the
    // gradient norm still contracts, so judge the step by the gradient.
    DenseVector trial = res.w;
    for (std::size_t i = 0; i < d.dim; ++i) trial[i] += dir[i];
    DenseVector trial_grad = mean_gradient(trial, d);
    if (l2_norm(trial_grad) < res.grad_norm) {
      res.w = std::move(trial);
      grad = std::move(trial_grad);
      loss = average_loss(res.w, d);
      have_prev = true;
      continue;
    }

    double t = 1.0;
    double trial_loss;
    for (int halvings = 0;; ++halvings) {
      for (std::size_t i = 0; i < d.dim; ++i)
        trial[i] = prev_w[i] + t * dir[i];
      trial_loss = average_loss(trial, d);
      if (trial_loss <= loss || halvings >= 60) break;
      t *= 0.5;
    }
    res.w = trial;
    loss = trial_loss;
    grad = mean_gradient(res.w, d);
    have_prev = true;
  }
  res.grad_norm = l2_norm(grad);
  res.converged = res.grad_norm <= tol;
  return res;
}

}  // namespace svrgol
