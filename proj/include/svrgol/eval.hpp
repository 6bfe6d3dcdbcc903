#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

#include "svrgol/data.hpp"
#include "svrgol/driver.hpp"

namespace svrgol {

// Flat key=value experiment configuration; every knob is also a CLI flag.
struct RunConfig {
  std::string algo = "svrg-ol";     // svrg-ol | sgd | minibatch | svrg-const
  std::string learner = "adagrad";  // adagrad | coin | const
  std::string schedule = "practical";  // theory | practical | theory-firstorder
  std::uint64_t t1 = 64;
  std::uint64_t c = 0;  // practical batch constant; 0 -> t1
  int kmax = 16;
  std::uint64_t nhat = 0;  // 0 -> schedule default
  double eta = std::numeric_limits<double>::quiet_NaN();  // NaN -> default
  double diameter = 0.0;                                  // 0 -> unbounded
  double epsilon = 1e-12;
  int workers = 1;
  int hash_bits = 23;
  std::uint64_t seed = 1;
  bool compensate = true;
  bool sparse_combine = true;
  std::string data;       // LibSVM training file
  std::string test;       // LibSVM test file
  std::string synthetic;  // "dim=20,n=16384,sparsity=5,wnorm=3[,ntest=0]"
  std::string out;        // CSV path; empty -> stdout
  std::uint64_t budget = 0;         // total sample budget; 0 = none
  std::uint64_t serial_budget = 0;  // total serial steps; 0 = none
  std::uint64_t eval_every = 4096;  // sgd/minibatch record cadence
  std::uint64_t batch = 256;        // minibatch size
  std::uint64_t block_size = 4096;
  bool timing = false;  // off keeps CSVs byte-identical across runs
  std::string weights_out;
  bool enumerate_batch = false;  // test hook
};

struct SyntheticSpec {
  std::uint32_t dim = 20;
  std::uint64_t n = 16384;
  std::uint32_t sparsity = 5;
  double wnorm = 3.0;
  std::uint64_t ntest = 0;
};

SyntheticSpec parse_synthetic_spec(const std::string& spec);

// Assigns one key; throws UsageError on unknown keys or unparsable values.
void set_config_key(RunConfig& cfg, std::string_view key, std::string_view value);

// Plain-text key=value file, '#' comments.
void load_config_file(RunConfig& cfg, const std::string& path);

// Throws UsageError on invalid or inconsistent settings.
void validate_config(const RunConfig& cfg);

struct ExperimentData {
  Dataset train;
  std::optional<Dataset> test;
  std::optional<DenseVector> w_star;  // oracle optimum, synthetic runs only
};

ExperimentData prepare_data(const RunConfig& cfg);

// Full experiment: load or generate data, run the configured algorithm, write
// the CSV (one row per phase boundary plus a final row). Returns 0 on
// success, 2 on config errors, 3 on I/O errors, 4 on divergence (with the
// partial CSV flushed). A failure message lands in *error when given.
int run_experiment(const RunConfig& cfg, std::string* error = nullptr);

}  // namespace svrgol
