#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <vector>

#include "svrgol/sparse_linalg.hpp"

namespace svrgol {

enum class LearnerType { adagrad, coin_betting, constant_step };

struct LearnerConfig {
  LearnerType type = LearnerType::adagrad;
  std::size_t dim = 0;
  // NaN means "use the learner default" (AdaGrad: D/sqrt(2) when D is finite,
  // else 1). Constant-step requires an explicit value.
  double eta = std::numeric_limits<double>::quiet_NaN();
  // Ball constraint of diameter D around the origin; infinity = unconstrained.
  double diameter = std::numeric_limits<double>::infinity();
  double epsilon = 1e-12;
  // Coin betting gradient scale G; per-coordinate clipping keeps |g_i| <= G.
  double scale = 1.0;
};

// Uniform contract the driver sees: emit the current iterate, absorb a
// gradient. Gradients may arrive sparse or dense; the two forms must produce
// identical states for identical values.
class OnlineLearner {
 public:
  virtual ~OnlineLearner() = default;
  virtual const DenseVector& current() const = 0;
  virtual void step(const SparseVector& g) = 0;
  virtual void step(const DenseVector& g) = 0;
  virtual std::uint64_t clip_count() const { return 0; }
};

// Diagonal AdaGrad: s_i += g_i^2, w_i -= eta g_i / (sqrt(s_i) + eps).
class AdaGradLearner final : public OnlineLearner {
 public:
  explicit AdaGradLearner(const LearnerConfig& cfg);
  const DenseVector& current() const override { return w_; }
  void step(const SparseVector& g) override;
  void step(const DenseVector& g) override;
  const std::vector<double>& accumulators() const { return s_; }

 private:
  void step_coord(std::uint32_t i, double g);
  void finish_step();
  DenseVector w_;
  std::vector<double> s_;
  double eta_;
  double eps_;
  double radius_;
};

// Per-coordinate Krichevsky-Trofimov coin betting. Each coordinate bets a
// signed fraction of its wealth: after t rounds,
//   w_i = -sum_of_gradients_i / (G^2 (t+1)) * wealth_i,
// with wealth_i starting at 1 and updated by wealth_i -= g_i w_i. Gradient
// coordinates beyond +-G are clipped and counted, which preserves positive
// wealth.
class CoinBettingLearner final : public OnlineLearner {
 public:
  explicit CoinBettingLearner(const LearnerConfig& cfg);
  const DenseVector& current() const override { return w_; }
  void step(const SparseVector& g) override;
  void step(const DenseVector& g) override;
  std::uint64_t clip_count() const override { return clips_; }
  const std::vector<double>& wealth() const { return wealth_; }

 private:
  void absorb_coord(std::uint32_t i, double g);
  void finish_step();
  DenseVector w_;
  std::vector<double> wealth_;
  std::vector<double> grad_sum_;
  std::vector<std::uint32_t> active_;
  std::vector<char> is_active_;
  std::uint64_t t_ = 0;
  std::uint64_t clips_ = 0;
  double scale_;
  double radius_;
};

// w -= eta g. The non-adaptive baseline.
class ConstantStepLearner final : public OnlineLearner {
 public:
  explicit ConstantStepLearner(const LearnerConfig& cfg);
  const DenseVector& current() const override { return w_; }
  void step(const SparseVector& g) override;
  void step(const DenseVector& g) override;

 private:
  DenseVector w_;
  double eta_;
  double radius_;
};

std::unique_ptr<OnlineLearner> make_learner(const LearnerConfig& cfg);

// g + B w/||w||, with w/||w|| taken as 0 at w = 0. Compensates a known bias
// bound B on the gradient estimates.
DenseVector bias_compensate(const SparseVector& g, const DenseVector& w, double B);
DenseVector bias_compensate(const DenseVector& g, const DenseVector& w, double B);

// Euclidean projection onto the closed ball.
DenseVector project_ball(DenseVector w, const DenseVector& center, double radius);

}  // namespace svrgol
