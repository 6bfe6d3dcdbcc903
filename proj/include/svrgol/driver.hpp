#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "svrgol/data.hpp"
#include "svrgol/learners.hpp"
#include "svrgol/sparse_linalg.hpp"

namespace svrgol {

enum class ScheduleMode { theory, practical, theory_firstorder };

// theory: T_k doubles each epoch, one fixed batch size (default T^2).
// practical: constant T_k = T1 with growing batches Nhat_k = k C.
// theory_firstorder: doubling T_k with Nhat = ceil(T^(4/3)), sized for
// learners with first-order regret.
struct EpochSchedule {
  ScheduleMode mode = ScheduleMode::practical;
  std::uint64_t t1 = 64;
  int k_max = 16;
  std::uint64_t c = 64;
  double rho = 2.0;
  std::uint64_t nhat_override = 0;   // 0 -> mode default
  std::uint64_t planned_serial = 0;  // planned T; feeds theory-mode defaults
};

struct EpochPlan {
  std::uint64_t serial_len = 0;
  std::uint64_t batch_size = 0;
};

// Plan for epoch k (1-based); nullopt once k exceeds k_max.
std::optional<EpochPlan> next_epoch(const EpochSchedule& s, int k);

// Coordinatewise mean in sequence order.
DenseVector anchor_average(std::span<const DenseVector> iterates);

struct PhaseRecord {
  std::string phase;  // "batch" | "serial" | "round" | "final"
  int epoch = 0;
  std::uint64_t rounds = 0;
  std::uint64_t samples_seen = 0;
  double train_loss = 0.0;
  double test_loss = 0.0;  // NaN when absent
  double auc = 0.0;        // NaN when absent
  double subopt = 0.0;     // NaN when absent
  double wall_ms = 0.0;
};

struct RunMetrics {
  std::uint64_t rounds = 0;
  std::uint64_t samples_seen = 0;
  std::uint64_t serial_steps = 0;
  std::uint64_t clip_count = 0;
  bool budget_exhausted = false;
  std::vector<PhaseRecord> records;
};

struct RunParams {
  EpochSchedule schedule;
  // learner.scale is derived internally from the data constants; other
  // learner fields are honored as given.
  LearnerConfig learner;
  bool compensate = true;
  bool sparse_combine = true;
  int workers = 1;
  std::size_t block_size = 4096;
  std::uint64_t sample_budget = 0;  // total samples incl. batches; 0 = none
  std::uint64_t serial_budget = 0;  // total serial steps; 0 = none
  std::uint64_t minibatch = 256;    // run_minibatch_sgd only
  std::uint64_t eval_every = 4096;  // sgd/minibatch record cadence
  std::uint64_t seed = 1;
  bool timing = false;
  // Test hook: the batch phase consumes the whole dataset in order instead of
  // sampling, making grad-hat exact.
  bool enumerate_batch = false;
  std::function<void(const DenseVector&)> on_iterate;
  std::function<void(const PhaseRecord&)> on_record;
};

struct RunResult {
  DenseVector w_bar;  // average of all serial-phase iterates
  RunMetrics metrics;
};

// Algorithm: per epoch, a parallel batch-gradient phase at the anchor v_k
// followed by T_k serial online-learner steps on variance-reduced gradients;
// v_{k+1} is the epoch's iterate average.
RunResult run_svrg_ol(const RunParams& p, const Dataset& train,
                      const Dataset* test = nullptr,
                      const DenseVector* w_star = nullptr);

// Plain serial SGD on unbiased sample gradients.
RunResult run_sgd(const RunParams& p, const Dataset& train,
                  const Dataset* test = nullptr,
                  const DenseVector* w_star = nullptr);

// Each round averages `minibatch` fresh gradients at the current point (in
// parallel) and takes one learner step; every round is a communication round.
RunResult run_minibatch_sgd(const RunParams& p, const Dataset& train,
                            const Dataset* test = nullptr,
                            const DenseVector* w_star = nullptr);

// The non-adaptive baseline: same loop as run_svrg_ol with the learner pinned
// to constant-step SGD and no bias compensation.
RunResult run_classic_svrg(const RunParams& p, const Dataset& train,
                           const Dataset* test = nullptr,
                           const DenseVector* w_star = nullptr);

}  // namespace svrgol
