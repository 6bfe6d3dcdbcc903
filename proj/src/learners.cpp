#include "svrgol/learners.hpp"

#include <cmath>
#include <stdexcept>

namespace svrgol {
namespace {

double ball_radius(double diameter) {
  if (std::isinf(diameter)) return diameter;
  if (diameter <= 0.0) throw std::invalid_argument("diameter must be positive");
  return diameter / 2.0;
}

// In-place projection onto the origin-centered ball. Learners start at the
// origin, so the constraint ball is centered there.
void project_origin_ball(DenseVector& w, double radius) {
  if (std::isinf(radius)) return;
  const double norm = l2_norm(w);
  if (norm <= radius) return;
  const double scale = radius / norm;
  for (double& x : w.values()) x *= scale;
}

void check_dim(std::size_t got, std::size_t want) {
  if (got != want) throw std::invalid_argument("gradient dimension mismatch");
}

}  // namespace

AdaGradLearner::AdaGradLearner(const LearnerConfig& cfg)
    : w_(cfg.dim),
      s_(cfg.dim, 0.0),
      eps_(cfg.epsilon),
      radius_(ball_radius(cfg.diameter)) {
  if (cfg.dim == 0) throw std::invalid_argument("learner dim must be >= 1");
  if (eps_ <= 0.0) throw std::invalid_argument("epsilon must be positive");
  eta_ = std::isnan(cfg.eta)
             ? (std::isinf(radius_) ? 1.0 : cfg.diameter / std::sqrt(2.0))
             : cfg.eta;
}

void AdaGradLearner::step_coord(std::uint32_t i, double g) {
  if (g == 0.0) return;
  s_[i] += g * g;
  w_[i] -= eta_ * g / (std::sqrt(s_[i]) + eps_);
}

void AdaGradLearner::finish_step() { project_origin_ball(w_, radius_); }

void AdaGradLearner::step(const SparseVector& g) {
  check_dim(g.dim(), w_.dim());
  for (const SparseEntry& e : g.entries()) step_coord(e.index, e.value);
  finish_step();
}

void AdaGradLearner::step(const DenseVector& g) {
  check_dim(g.dim(), w_.dim());
  for (std::size_t i = 0; i < g.dim(); ++i)
    step_coord(static_cast<std::uint32_t>(i), g[i]);
  finish_step();
}

CoinBettingLearner::CoinBettingLearner(const LearnerConfig& cfg)
    : w_(cfg.dim),
      wealth_(cfg.dim, 1.0),
      grad_sum_(cfg.dim, 0.0),
      is_active_(cfg.dim, 0),
      scale_(std::max(cfg.scale, 1e-12)),
      radius_(ball_radius(cfg.diameter)) {
  if (cfg.dim == 0) throw std::invalid_argument("learner dim must be >= 1");
}

void CoinBettingLearner::absorb_coord(std::uint32_t i, double g) {
  if (g > scale_) {
    g = scale_;
    ++clips_;
  } else if (g < -scale_) {
    g = -scale_;
    ++clips_;
  }
  if (g == 0.0) return;
  // The wealth bet uses the point actually played this round.
  wealth_[i] -= g * w_[i];
  grad_sum_[i] += g;
  if (!is_active_[i]) {
    is_active_[i] = 1;
    active_.push_back(i);
  }
}

void CoinBettingLearner::finish_step() {
  ++t_;
  // w_i = beta_i * wealth_i with beta_i = -grad_sum_i / (G^2 (t+1)): one G
  // normalizes the cumulative sum, the other the incoming gradient, keeping
  // |g_i beta_i| < 1 and hence wealth positive for any admissible sequence.
  const double factor =
      -1.0 / (scale_ * scale_ * static_cast<double>(t_ + 1));
  for (const std::uint32_t i : active_) w_[i] = factor * grad_sum_[i] * wealth_[i];
  project_origin_ball(w_, radius_);
}

void CoinBettingLearner::step(const SparseVector& g) {
  check_dim(g.dim(), w_.dim());
  for (const SparseEntry& e : g.entries()) absorb_coord(e.index, e.value);
  finish_step();
}

void CoinBettingLearner::step(const DenseVector& g) {
  check_dim(g.dim(), w_.dim());
  for (std::size_t i = 0; i < g.dim(); ++i)
    absorb_coord(static_cast<std::uint32_t>(i), g[i]);
  finish_step();
}

ConstantStepLearner::ConstantStepLearner(const LearnerConfig& cfg)
    : w_(cfg.dim), eta_(cfg.eta), radius_(ball_radius(cfg.diameter)) {
  if (cfg.dim == 0) throw std::invalid_argument("learner dim must be >= 1");
  if (std::isnan(eta_))
    throw std::invalid_argument("constant-step learner requires eta");
}

void ConstantStepLearner::step(const SparseVector& g) {
  check_dim(g.dim(), w_.dim());
  axpy_sparse(-eta_, g, w_);
  project_origin_ball(w_, radius_);
}

void ConstantStepLearner::step(const DenseVector& g) {
  check_dim(g.dim(), w_.dim());
  for (std::size_t i = 0; i < g.dim(); ++i) w_[i] -= eta_ * g[i];
  project_origin_ball(w_, radius_);
}

std::unique_ptr<OnlineLearner> make_learner(const LearnerConfig& cfg) {
  switch (cfg.type) {
    case LearnerType::adagrad:
      return std::make_unique<AdaGradLearner>(cfg);
    case LearnerType::coin_betting:
      return std::make_unique<CoinBettingLearner>(cfg);
    case LearnerType::constant_step:
      return std::make_unique<ConstantStepLearner>(cfg);
  }
  throw std::invalid_argument("unknown learner type");
}

namespace {

void add_compensation(DenseVector& out, const DenseVector& w, double B) {
  if (B < 0.0) throw std::invalid_argument("bias bound B must be >= 0");
  if (out.dim() != w.dim())
    throw std::invalid_argument("bias_compensate: dimension mismatch");
  if (B == 0.0) return;
  const double norm = l2_norm(w);
  if (norm == 0.0) return;  // w/||w|| taken as 0 at the origin
  const double scale = B / norm;
  for (std::size_t i = 0; i < out.dim(); ++i) out[i] += scale * w[i];
}

}  // namespace

DenseVector bias_compensate(const SparseVector& g, const DenseVector& w,
                            double B) {
  DenseVector out = g.to_dense();
  add_compensation(out, w, B);
  return out;
}

DenseVector bias_compensate(const DenseVector& g, const DenseVector& w,
                            double B) {
  DenseVector out = g;
  add_compensation(out, w, B);
  return out;
}

DenseVector project_ball(DenseVector w, const DenseVector& center,
                         double radius) {
  if (radius <= 0.0) throw std::invalid_argument("radius must be positive");
  if (w.dim() != center.dim())
    throw std::invalid_argument("project_ball: dimension mismatch");
  double sq = 0.0;
  for (std::size_t i = 0; i < w.dim(); ++i) {
    const double d = w[i] - center[i];
    sq += d * d;
  }
  const double norm = std::sqrt(sq);
  if (norm <= radius) return w;
  const double scale = radius / norm;
  for (std::size_t i = 0; i < w.dim(); ++i)
    w[i] = center[i] + scale * (w[i] - center[i]);
  return w;
}

}  // namespace svrgol
