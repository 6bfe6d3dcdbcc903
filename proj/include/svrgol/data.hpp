#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "svrgol/rng.hpp"
#include "svrgol/sparse_linalg.hpp"

namespace svrgol {

// One labeled data point; the sample f drawn from the data distribution.
struct Example {
  SparseVector features;
  int label = 1;  // +1 or -1

  bool operator==(const Example& o) const {
    return label == o.label && features == o.features;
  }
};

struct Dataset {
  std::vector<Example> examples;
  std::uint32_t dim = 0;

  std::size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }
};

// Deterministic feature hash into [0, 2^hash_bits). hash_bits in [1, 31].
std::uint32_t hash_feature(std::uint64_t raw_index, int hash_bits);

// Parses one LibSVM line "<label> <idx>:<val> ...". Label tokens 1/+1 map to
// +1 and 0/-1 map to -1; indices are hashed; colliding indices are summed.
// Text after '#' is ignored. Throws ParseError with the offending token.
Example parse_libsvm_line(std::string_view line, int hash_bits);

// Same grammar, but indices are taken verbatim (already in hashed space).
// Pairs with Example::to_libsvm() below for exact round trips.
Example parse_canonical_line(std::string_view line, std::uint32_t dim);

// Canonical text form over hashed indices; %.17g values round-trip exactly.
std::string to_libsvm(const Example& e);

// Loads a LibSVM file, skipping blank and comment-only lines.
Dataset load_libsvm(const std::string& path, int hash_bits);

// Uniform-with-replacement sampler over a dataset: the i.i.d. stream oracle.
// Identical seed gives an identical draw sequence.
class StreamSampler {
 public:
  StreamSampler(const Dataset& dataset, std::uint64_t seed);

  const Example& next();
  std::uint64_t samples_drawn() const { return samples_drawn_; }

 private:
  const Dataset* dataset_;
  Rng rng_;
  std::uint64_t samples_drawn_ = 0;
};

// Synthetic sparse logistic problem: each example picks `sparsity` distinct
// coordinates uniformly, values standard normal; label is +1 with probability
// sigma(w_true . x). Deterministic given the seed.
Dataset gen_synthetic(std::uint32_t dim, std::size_t n, std::uint32_t sparsity,
                      const DenseVector& w_true, std::uint64_t seed);

}  // namespace svrgol
