#include "svrgol/vr_core.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "svrgol/rng.hpp"

namespace svrgol {

DenseVector combine_dense(const SparseVector& grad_w,
                          const SparseVector& grad_anchor,
                          const DenseVector& batch_grad) {
  if (grad_w.dim() != batch_grad.dim() || grad_anchor.dim() != batch_grad.dim())
    throw std::invalid_argument("combine_dense: dimension mismatch");
  DenseVector out = batch_grad;
  // (grad_w_i - grad_anchor_i) + batch_i over the union of supports; this
  // order makes the w == anchor case return batch_grad bit-exactly.
  const auto& a = grad_w.entries();
  const auto& b = grad_anchor.entries();
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    std::uint32_t idx;
    double va = 0.0, vb = 0.0;
    if (j >= b.size() || (i < a.size() && a[i].index < b[j].index)) {
      idx = a[i].index;
      va = a[i].value;
      ++i;
    } else if (i >= a.size() || b[j].index < a[i].index) {
      idx = b[j].index;
      vb = b[j].value;
      ++j;
    } else {
      idx = a[i].index;
      va = a[i].value;
      vb = b[j].value;
      ++i;
      ++j;
    }
    out[idx] = (va - vb) + batch_grad[idx];
  }
  return out;
}

SparseVector combine_sparse(const SparseVector& grad_w,
                            const SparseVector& grad_anchor,
                            const DenseVector& batch_grad,
                            const FeatureStats& stats) {
  if (grad_w.dim() != batch_grad.dim() || grad_anchor.dim() != batch_grad.dim())
    throw std::invalid_argument("combine_sparse: dimension mismatch");
  if (stats.total == 0)
    throw std::logic_error(
        "combine_sparse: empty feature stats (batch phase must run first)");
  if (stats.nonzero_counts.size() != batch_grad.dim())
    throw std::invalid_argument("combine_sparse: stats dimension mismatch");

  const auto& a = grad_w.entries();
  const auto& b = grad_anchor.entries();
  std::vector<SparseEntry> out;
  out.reserve(a.size());
  std::size_t j = 0;
  for (const SparseEntry& ea : a) {
    if (j < b.size() && b[j].index < ea.index)
      throw std::invalid_argument(
          "combine_sparse: anchor gradient support escapes sample support");
    double vb = 0.0;
    if (j < b.size() && b[j].index == ea.index) {
      vb = b[j].value;
      ++j;
    }
    const double value =
        (ea.value - vb) + batch_grad[ea.index] / stats.p_hat(ea.index);
    out.push_back({ea.index, value});
  }
  if (j < b.size())
    throw std::invalid_argument(
        "combine_sparse: anchor gradient support escapes sample support");
  return SparseVector::from_sorted(grad_w.dim(), std::move(out));
}

namespace {

struct BlockEntry {
  std::uint32_t index;
  double sum;
  std::uint32_t count;
};
using BlockPartial = std::vector<BlockEntry>;

// Per-thread accumulator reused across blocks. Dense scratch for small
// dimensions; a hash map above 2^21 keeps memory proportional to the data.
class BlockAccumulator {
 public:
  explicit BlockAccumulator(std::size_t dim) : dense_(dim <= (1u << 21)) {
    if (dense_) {
      sums_.assign(dim, 0.0);
      counts_.assign(dim, 0);
    }
  }

  void add(std::uint32_t index, double value) {
    if (dense_) {
      if (counts_[index] == 0) touched_.push_back(index);
      sums_[index] += value;
      counts_[index] += 1;
    } else {
      auto& slot = map_[index];
      slot.first += value;
      slot.second += 1;
    }
  }

  BlockPartial extract_and_reset() {
    BlockPartial out;
    if (dense_) {
      std::sort(touched_.begin(), touched_.end());
      out.reserve(touched_.size());
      for (const std::uint32_t i : touched_) {
        out.push_back({i, sums_[i], counts_[i]});
        sums_[i] = 0.0;
        counts_[i] = 0;
      }
      touched_.clear();
    } else {
      out.reserve(map_.size());
      for (const auto& [i, slot] : map_)
        out.push_back({i, slot.first, slot.second});
      std::sort(out.begin(), out.end(),
                [](const BlockEntry& a, const BlockEntry& b) {
                  return a.index < b.index;
                });
      map_.clear();
    }
    return out;
  }

 private:
  bool dense_;
  std::vector<double> sums_;
  std::vector<std::uint32_t> counts_;
  std::vector<std::uint32_t> touched_;
  std::unordered_map<std::uint32_t, std::pair<double, std::uint32_t>> map_;
};

BlockPartial compute_block(const DenseVector& v,
                           std::span<const Example* const> samples,
                           std::size_t begin, std::size_t end,
                           BlockAccumulator& acc) {
  for (std::size_t s = begin; s < end; ++s) {
    const Example& e = *samples[s];
    const double scale = logistic_grad_scale(v, e);
    for (const SparseEntry& ent : e.features.entries())
      acc.add(ent.index, scale * ent.value);
  }
  return acc.extract_and_reset();
}

BlockPartial merge_partials(const BlockPartial& a, const BlockPartial& b) {
  BlockPartial out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].index < b[j].index) {
      out.push_back(a[i++]);
    } else if (b[j].index < a[i].index) {
      out.push_back(b[j++]);
    } else {
      out.push_back({a[i].index, a[i].sum + b[j].sum, a[i].count + b[j].count});
      ++i;
      ++j;
    }
  }
  while (i < a.size()) out.push_back(a[i++]);
  while (j < b.size()) out.push_back(b[j++]);
  return out;
}

}  // namespace

BatchGradient batch_gradient(const DenseVector& v,
                             std::span<const Example* const> samples,
                             int workers, std::size_t block_size) {
  if (samples.empty())
    throw std::invalid_argument("batch_gradient: empty sample set");
  if (workers < 1) throw std::invalid_argument("batch_gradient: workers < 1");
  if (block_size < 1) throw std::invalid_argument("batch_gradient: block_size < 1");

  const std::size_t n = samples.size();
  const std::size_t dim = v.dim();
  const std::size_t blocks = (n + block_size - 1) / block_size;
  std::vector<BlockPartial> partials(blocks);

  auto run_range = [&](BlockAccumulator& acc, std::size_t b) {
    const std::size_t begin = b * block_size;
    const std::size_t end = std::min(begin + block_size, n);
    partials[b] = compute_block(v, samples, begin, end, acc);
  };

  if (workers == 1 || blocks == 1) {
    BlockAccumulator acc(dim);
    for (std::size_t b = 0; b < blocks; ++b) run_range(acc, b);
  } else {
    std::atomic<std::size_t> next{0};
    const int nthreads = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(workers), blocks));
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t) {
      pool.emplace_back([&] {
        BlockAccumulator acc(dim);
        for (;;) {
          const std::size_t b = next.fetch_add(1);
          if (b >= blocks) break;
          run_range(acc, b);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }

  // Fixed-shape pairwise reduction over block order; independent of which
  // worker produced which partial.
  std::vector<BlockPartial> level = std::move(partials);
  while (level.size() > 1) {
    std::vector<BlockPartial> up;
    up.reserve((level.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < level.size(); i += 2)
      up.push_back(merge_partials(level[i], level[i + 1]));
    if (level.size() % 2 == 1) up.push_back(std::move(level.back()));
    level = std::move(up);
  }

  BatchGradient out;
  out.grad = DenseVector(dim);
  out.stats.nonzero_counts.assign(dim, 0);
  out.stats.total = n;
  out.stats.p_floor = 1.0 / static_cast<double>(n);
  const double inv = 1.0 / static_cast<double>(n);
  for (const BlockEntry& e : level.front()) {
    out.grad[e.index] = e.sum * inv;
    out.stats.nonzero_counts[e.index] = e.count;
  }
  return out;
}

std::uint64_t required_batch_size(double G, std::uint64_t K, double delta,
                                  double eps) {
  if (!(G > 0.0) || K < 1 || !(delta > 0.0 && delta < 1.0) || !(eps > 0.0))
    throw std::invalid_argument("required_batch_size: invalid arguments");
  const double v =
      (2.0 * G * G * std::log(static_cast<double>(K) / delta) + G * G) /
      (eps * eps);
  // Relative nudge tolerates rounding when the closed form lands on an
  // integer (e.g. log(K/delta) == 1 exactly).
  const double n = std::ceil(v - v * 1e-12);
  if (!(n >= 1.0)) return 1;
  if (n >= 9.2e18) throw std::overflow_error("required_batch_size: overflow");
  return static_cast<std::uint64_t>(n);
}

VarianceReport monte_carlo_variance_check(const DenseVector& w,
                                          const AnchorState& anchor,
                                          const Dataset& d,
                                          std::uint64_t n_samples,
                                          const DenseVector& w_star,
                                          std::uint64_t seed) {
  const ProblemMeta meta = estimate_constants(d);
  const auto mean_loss = [&](const DenseVector& at) {
    double sum = 0.0;
    for (const Example& e : d.examples) sum += logistic_loss(at, e);
    return sum / static_cast<double>(d.size());
  };

  const DenseVector exact_grad = mean_gradient(anchor.v, d);
  double bias_sq = 0.0;
  for (std::size_t i = 0; i < exact_grad.dim(); ++i) {
    const double diff = anchor.batch_grad[i] - exact_grad[i];
    bias_sq += diff * diff;
  }

  const double f_w = mean_loss(w);
  const double f_v = mean_loss(anchor.v);
  const double f_star = mean_loss(w_star);

  VarianceReport rep;
  rep.bias_norm = std::sqrt(bias_sq);
  rep.bound = 8.0 * meta.L * (f_w - f_star) + 8.0 * meta.L * (f_v - f_star) +
              2.0 * bias_sq;

  StreamSampler sampler(d, seed);
  double acc = 0.0;
  for (std::uint64_t s = 0; s < n_samples; ++s) {
    const Example& e = sampler.next();
    const DenseVector g = combine_dense(logistic_grad(w, e),
                                        logistic_grad(anchor.v, e),
                                        anchor.batch_grad);
    const double norm = l2_norm(g);
    acc += norm * norm;
  }
  rep.estimate = n_samples > 0 ? acc / static_cast<double>(n_samples) : 0.0;
  rep.degenerate = rep.estimate < 1e-6 * meta.G * meta.G;
  rep.pass = rep.degenerate || rep.estimate <= 1.5 * rep.bound;
  return rep;
}

}  // namespace svrgol
