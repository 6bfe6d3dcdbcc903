#include "svrgol/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "svrgol/errors.hpp"
#include "svrgol/losses.hpp"
#include "svrgol/metrics.hpp"
#include "svrgol/vr_core.hpp"

namespace svrgol {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kCap = 1000000000000000000ull;  // 1e18

std::uint64_t geometric_len(std::uint64_t t1, double rho, int k) {
  const double v = static_cast<double>(t1) * std::pow(rho, k - 1);
  if (v >= 1e18) return kCap;
  return static_cast<std::uint64_t>(std::llround(v));
}

// ceil with a relative nudge; keeps exact powers (T^2, T^(4/3)) from being
// bumped up by pow rounding.
std::uint64_t nudged_ceil(double x) {
  const double v = std::ceil(x - x * 1e-12);
  if (v >= 1e18) return kCap;
  return v < 1.0 ? 1 : static_cast<std::uint64_t>(v);
}

std::uint64_t planned_total_serial(const EpochSchedule& s,
                                   std::uint64_t sample_budget = 0) {
  if (s.planned_serial > 0) return s.planned_serial;
  std::uint64_t total = 0;
  for (int k = 1; k <= s.k_max; ++k) {
    const std::uint64_t tk = s.mode == ScheduleMode::practical
                                 ? s.t1
                                 : geometric_len(s.t1, s.rho, k);
    if (total >= kCap - tk) {
      total = kCap;
      break;
    }
    total += tk;
  }
  // Serial steps cannot exceed the total sample budget.
  if (sample_budget > 0 && total > sample_budget) total = sample_budget;
  return total;
}

// Hoeffding bound on ||grad-hat F(v) - grad F(v)|| at confidence 1 - delta.
double lemma1_bound(double G, double K, double delta, std::uint64_t nhat) {
  if (G <= 0.0 || nhat == 0) return 0.0;
  const double logterm = std::log(std::max(K / delta, 1.0));
  return std::sqrt((2.0 * G * G * logterm + G * G) /
                   static_cast<double>(nhat));
}

class Stopwatch {
 public:
  explicit Stopwatch(bool enabled) : enabled_(enabled) { reset(); }
  void reset() {
    if (enabled_) start_ = std::chrono::steady_clock::now();
  }
  double elapsed_ms() const {
    if (!enabled_) return 0.0;
    const auto d = std::chrono::steady_clock::now() - start_;
    return std::chrono::duration<double, std::milli>(d).count();
  }

 private:
  bool enabled_;
  std::chrono::steady_clock::time_point start_;
};

struct Evaluator {
  const Dataset& train;
  const Dataset* test;
  const DenseVector* w_star;
  bool train_two_class = false;
  bool test_two_class = false;
  std::vector<double> scores;
  std::vector<int> labels;

  Evaluator(const Dataset& tr, const Dataset* te, const DenseVector* ws)
      : train(tr), test(te), w_star(ws) {
    auto two_class = [](const Dataset& d) {
      bool pos = false, neg = false;
      for (const Example& e : d.examples) (e.label > 0 ? pos : neg) = true;
      return pos && neg;
    };
    train_two_class = two_class(train);
    if (test) test_two_class = two_class(*test);
  }

  void fill(const DenseVector& at, PhaseRecord& rec) {
    rec.train_loss = average_loss(at, train);
    rec.test_loss = test ? average_loss(at, *test) : kNaN;
    const Dataset* auc_ds = test ? test : &train;
    const bool ok = test ? test_two_class : train_two_class;
    if (ok) {
      score_dataset(at, *auc_ds, scores, labels);
      rec.auc = auc(scores, labels);
    } else {
      rec.auc = kNaN;
    }
    rec.subopt = w_star ? suboptimality(at, train, *w_star) : kNaN;
  }
};

// Shared bookkeeping: iterate averages, record emission, divergence checks.
class Runner {
 public:
  Runner(const RunParams& p, const Dataset& train, const Dataset* test,
         const DenseVector* w_star)
      : p_(p),
        train_(train),
        ev_(train, test, w_star),
        sampler_(train, p.seed),
        global_sum_(train.dim) {}

  StreamSampler& sampler() { return sampler_; }
  RunMetrics& metrics() { return m_; }
  std::uint64_t samples_seen() const {
    return sampler_.samples_drawn() + enumerated_;
  }
  void add_enumerated(std::uint64_t n) { enumerated_ += n; }

  void observe_iterate(const DenseVector& w) {
    if (p_.on_iterate) p_.on_iterate(w);
    for (std::size_t i = 0; i < w.dim(); ++i) global_sum_[i] += w[i];
    ++global_count_;
  }

  DenseVector average_point(const DenseVector& fallback) const {
    if (global_count_ == 0) return fallback;
    DenseVector out = global_sum_;
    const double inv = 1.0 / static_cast<double>(global_count_);
    for (double& x : out.values()) x *= inv;
    return out;
  }

  const PhaseRecord& emit(const char* phase, int epoch, const DenseVector& at,
                          double wall_ms) {
    PhaseRecord rec;
    rec.phase = phase;
    rec.epoch = epoch;
    rec.rounds = m_.rounds;
    rec.samples_seen = samples_seen();
    rec.wall_ms = wall_ms;
    ev_.fill(at, rec);
    m_.records.push_back(std::move(rec));
    if (p_.on_record) p_.on_record(m_.records.back());
    return m_.records.back();
  }

  void set_initial_loss(double loss) { initial_loss_ = loss; }

  void check_loss(double loss) const {
    if (!std::isfinite(loss) || loss > 10.0 * std::max(initial_loss_, 1e-12))
      throw DivergenceError("train loss " + std::to_string(loss) +
                            " exceeds 10x initial " +
                            std::to_string(initial_loss_));
  }

  // Cheap per-step guard at small dimension, periodic otherwise.
  void check_finite(const DenseVector& w, std::uint64_t step) const {
    if (w.dim() > 4096 && (step & 255u) != 0) return;
    if (!w.all_finite())
      throw DivergenceError("non-finite iterate at serial step " +
                            std::to_string(step));
  }

  RunResult finish(const OnlineLearner& learner, int last_epoch) {
    return finish_at(learner, last_epoch, average_point(learner.current()));
  }

  // Baseline variant: the final model is the last iterate.
  RunResult finish_current(const OnlineLearner& learner, int last_epoch) {
    return finish_at(learner, last_epoch, learner.current());
  }

 private:
  RunResult finish_at(const OnlineLearner& learner, int last_epoch,
                      DenseVector point) {
    m_.clip_count = learner.clip_count();
    RunResult res;
    res.w_bar = std::move(point);
    emit("final", last_epoch, res.w_bar, 0.0);
    m_.samples_seen = samples_seen();
    res.metrics = std::move(m_);
    return res;
  }

  const RunParams& p_;
  const Dataset& train_;
  Evaluator ev_;
  StreamSampler sampler_;
  RunMetrics m_;
  DenseVector global_sum_;
  std::uint64_t global_count_ = 0;
  std::uint64_t enumerated_ = 0;
  double initial_loss_ = 0.0;
};

RunResult run_svrg_impl(RunParams p, const Dataset& train, const Dataset* test,
                        const DenseVector* w_star) {
  if (train.empty()) throw std::invalid_argument("run: empty dataset");
  const ProblemMeta meta = estimate_constants(train, p.learner.diameter);

  const std::uint64_t planned_T = std::max<std::uint64_t>(
      planned_total_serial(p.schedule, p.sample_budget), 1);
  const double planned_K = static_cast<double>(std::max(p.schedule.k_max, 1));
  const double delta = 1.0 / static_cast<double>(planned_T);

  const auto first = next_epoch(p.schedule, 1);
  if (!first) throw std::invalid_argument("run: k_max must be >= 1");
  const std::uint64_t nhat1 =
      p.enumerate_batch ? train.size() : first->batch_size;

  p.learner.dim = train.dim;
  // Coin-betting clip scale: the variance-reduced gradient norm is bounded by
  // 2G plus the batch bias bound.
  p.learner.scale = 2.0 * meta.G + lemma1_bound(meta.G, planned_K, delta, nhat1);
  auto learner = make_learner(p.learner);

  Runner run(p, train, test, w_star);
  run.set_initial_loss(average_loss(learner->current(), train));

  DenseVector v = learner->current();  // v_1 = w_1
  std::vector<const Example*> batch;
  int last_epoch = 0;

  for (int k = 1;; ++k) {
    const auto plan = next_epoch(p.schedule, k);
    if (!plan) break;
    if (p.serial_budget && run.metrics().serial_steps >= p.serial_budget) break;

    const std::uint64_t nhat =
        p.enumerate_batch ? train.size() : plan->batch_size;
    if (p.sample_budget && run.samples_seen() + nhat > p.sample_budget) {
      run.metrics().budget_exhausted = true;
      break;
    }
    last_epoch = k;

    // Batch phase: high-accuracy anchor gradient, the one parallel step.
    Stopwatch timer(p.timing);
    batch.clear();
    batch.reserve(nhat);
    if (p.enumerate_batch) {
      for (const Example& e : train.examples) batch.push_back(&e);
      run.add_enumerated(train.size());
    } else {
      for (std::uint64_t i = 0; i < nhat; ++i) batch.push_back(&run.sampler().next());
    }
    BatchGradient bg = batch_gradient(v, batch, p.workers, p.block_size);
    run.metrics().rounds += 1;
    AnchorState anchor{std::move(v), std::move(bg.grad), k, nhat};
    const double B =
        p.compensate ? lemma1_bound(meta.G, planned_K, delta, nhat) : 0.0;

    const PhaseRecord& brec =
        run.emit("batch", k, run.average_point(learner->current()), timer.elapsed_ms());
    run.check_loss(brec.train_loss);

    // Serial phase: T_k online-learner steps on variance-reduced gradients.
    timer.reset();
    DenseVector epoch_sum(train.dim);
    std::uint64_t epoch_count = 0;
    for (std::uint64_t t = 0; t < plan->serial_len; ++t) {
      if (p.serial_budget && run.metrics().serial_steps >= p.serial_budget) break;
      if (p.sample_budget && run.samples_seen() >= p.sample_budget) {
        run.metrics().budget_exhausted = true;
        break;
      }
      const Example& e = run.sampler().next();
      const DenseVector& w_t = learner->current();
      run.observe_iterate(w_t);
      for (std::size_t i = 0; i < w_t.dim(); ++i) epoch_sum[i] += w_t[i];
      ++epoch_count;

      const SparseVector gw = logistic_grad(w_t, e);
      // The gradient scale underflows to exact zero only at margins beyond
      // ~7e2, i.e. after the iterate has already blown up.
      if (gw.nnz() != e.features.nnz())
        throw DivergenceError("gradient underflow at extreme margin");
      const SparseVector ga = logistic_grad(anchor.v, e);
      if (p.sparse_combine) {
        const SparseVector g = combine_sparse(gw, ga, anchor.batch_grad, bg.stats);
        if (B > 0.0)
          learner->step(bias_compensate(g, w_t, B));
        else
          learner->step(g);
      } else {
        const DenseVector g = combine_dense(gw, ga, anchor.batch_grad);
        if (B > 0.0)
          learner->step(bias_compensate(g, w_t, B));
        else
          learner->step(g);
      }
      run.metrics().serial_steps += 1;
      run.check_finite(learner->current(), run.metrics().serial_steps);
    }

    // v_{k+1}: mean of this epoch's iterates.
    if (epoch_count > 0) {
      const double inv = 1.0 / static_cast<double>(epoch_count);
      for (double& x : epoch_sum.values()) x *= inv;
      v = std::move(epoch_sum);
    } else {
      v = anchor.v;
    }

    const PhaseRecord& srec =
        run.emit("serial", k, run.average_point(learner->current()), timer.elapsed_ms());
    run.check_loss(srec.train_loss);
    run.check_loss(average_loss(learner->current(), train));
  }

  return run.finish(*learner, last_epoch);
}

}  // namespace

std::optional<EpochPlan> next_epoch(const EpochSchedule& s, int k) {
  if (k < 1) throw std::invalid_argument("next_epoch: k must be >= 1");
  if (k > s.k_max) return std::nullopt;
  EpochPlan plan;
  const std::uint64_t planned_T = planned_total_serial(s);
  switch (s.mode) {
    case ScheduleMode::practical:
      plan.serial_len = s.t1;
      plan.batch_size = s.nhat_override
                            ? s.nhat_override
                            : static_cast<std::uint64_t>(k) * std::max<std::uint64_t>(s.c, 1);
      break;
    case ScheduleMode::theory:
      plan.serial_len = geometric_len(s.t1, s.rho, k);
      plan.batch_size =
          s.nhat_override
              ? s.nhat_override
              : nudged_ceil(static_cast<double>(planned_T) * static_cast<double>(planned_T));
      break;
    case ScheduleMode::theory_firstorder:
      plan.serial_len = geometric_len(s.t1, s.rho, k);
      plan.batch_size =
          s.nhat_override
              ? s.nhat_override
              : nudged_ceil(std::pow(static_cast<double>(planned_T), 4.0 / 3.0));
      break;
  }
  if (plan.batch_size == 0) plan.batch_size = 1;
  return plan;
}

DenseVector anchor_average(std::span<const DenseVector> iterates) {
  if (iterates.empty())
    throw std::invalid_argument("anchor_average: empty sequence");
  DenseVector out(iterates.front().dim());
  for (const DenseVector& w : iterates) {
    if (w.dim() != out.dim())
      throw std::invalid_argument("anchor_average: dimension mismatch");
    for (std::size_t i = 0; i < out.dim(); ++i) out[i] += w[i];
  }
  const double inv = 1.0 / static_cast<double>(iterates.size());
  for (double& x : out.values()) x *= inv;
  return out;
}

RunResult run_svrg_ol(const RunParams& p, const Dataset& train,
                      const Dataset* test, const DenseVector* w_star) {
  return run_svrg_impl(p, train, test, w_star);
}

RunResult run_classic_svrg(const RunParams& p, const Dataset& train,
                           const Dataset* test, const DenseVector* w_star) {
  RunParams q = p;
  q.learner.type = LearnerType::constant_step;
  q.compensate = false;
  return run_svrg_impl(std::move(q), train, test, w_star);
}

RunResult run_sgd(const RunParams& p, const Dataset& train,
                  const Dataset* test, const DenseVector* w_star) {
  if (train.empty()) throw std::invalid_argument("run: empty dataset");
  if (p.sample_budget == 0 && p.serial_budget == 0)
    throw UsageError("sgd requires a sample or serial budget");
  const ProblemMeta meta = estimate_constants(train, p.learner.diameter);

  RunParams q = p;
  q.learner.dim = train.dim;
  q.learner.scale = meta.G;
  auto learner = make_learner(q.learner);

  Runner run(q, train, test, w_star);
  run.set_initial_loss(average_loss(learner->current(), train));

  std::uint64_t next_eval = q.eval_every;
  int row = 0;
  Stopwatch timer(q.timing);
  for (;;) {
    if (q.sample_budget && run.samples_seen() >= q.sample_budget) break;
    if (q.serial_budget && run.metrics().serial_steps >= q.serial_budget) break;
    const Example& e = run.sampler().next();
    const DenseVector& w_t = learner->current();
    run.observe_iterate(w_t);
    learner->step(logistic_grad(w_t, e));
    run.metrics().serial_steps += 1;
    run.check_finite(learner->current(), run.metrics().serial_steps);
    if (run.samples_seen() >= next_eval) {
      // Baselines report the live model, not the averaged iterate.
      const PhaseRecord& rec =
          run.emit("serial", ++row, learner->current(), timer.elapsed_ms());
      run.check_loss(rec.train_loss);
      next_eval += q.eval_every;
      timer.reset();
    }
  }
  return run.finish_current(*learner, row);
}

RunResult run_minibatch_sgd(const RunParams& p, const Dataset& train,
                            const Dataset* test, const DenseVector* w_star) {
  if (train.empty()) throw std::invalid_argument("run: empty dataset");
  if (p.minibatch < 1) throw std::invalid_argument("minibatch size must be >= 1");
  if (p.sample_budget == 0)
    throw UsageError("minibatch requires a sample budget");
  const ProblemMeta meta = estimate_constants(train, p.learner.diameter);

  RunParams q = p;
  q.learner.dim = train.dim;
  q.learner.scale = meta.G;
  auto learner = make_learner(q.learner);

  Runner run(q, train, test, w_star);
  run.set_initial_loss(average_loss(learner->current(), train));

  std::vector<const Example*> batch;
  std::uint64_t next_eval = q.eval_every;
  int row = 0;
  Stopwatch timer(q.timing);
  while (run.samples_seen() < q.sample_budget) {
    batch.clear();
    if (q.enumerate_batch) {
      for (const Example& e : train.examples) batch.push_back(&e);
      run.add_enumerated(train.size());
    } else {
      const std::uint64_t b = std::min<std::uint64_t>(
          q.minibatch, q.sample_budget - run.samples_seen());
      batch.reserve(b);
      for (std::uint64_t i = 0; i < b; ++i) batch.push_back(&run.sampler().next());
    }

    const DenseVector& w_t = learner->current();
    run.observe_iterate(w_t);
    const BatchGradient bg = batch_gradient(w_t, batch, q.workers, q.block_size);
    learner->step(bg.grad);
    run.metrics().rounds += 1;
    run.metrics().serial_steps += 1;
    run.check_finite(learner->current(), run.metrics().rounds);

    if (run.samples_seen() >= next_eval) {
      const PhaseRecord& rec =
          run.emit("round", ++row, learner->current(), timer.elapsed_ms());
      run.check_loss(rec.train_loss);
      while (next_eval <= run.samples_seen()) next_eval += q.eval_every;
      timer.reset();
    }
  }
  return run.finish_current(*learner, row);
}

}  // namespace svrgol
