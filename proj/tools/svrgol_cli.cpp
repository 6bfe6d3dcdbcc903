// Experiment CLI. Thin shell over the C API: flags become config keys, the
// run writes a CSV of per-phase metrics.
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "svrgol/svrgol.h"

namespace {

struct ConfigDeleter {
  void operator()(svrgol_config* c) const { svrgol_config_free(c); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"svrgol: parallel variance-reduced stochastic optimization"};
  app.set_version_flag("--version", svrgol_version());

  std::string config_file;
  app.add_option("--config", config_file, "key=value config file loaded first");

  // Every flag maps 1:1 onto a config key; only flags the user passes are
  // forwarded so library defaults stay in charge.
  std::vector<std::pair<std::string, std::string>> kv;
  const auto add = [&](const std::string& flag, const std::string& key,
                       const std::string& help) {
    app.add_option_function<std::string>(
           flag,
           [&kv, key](const std::string& v) { kv.emplace_back(key, v); }, help)
        ->expected(1);
  };

  add("--algo", "algo", "svrg-ol | sgd | minibatch | svrg-const");
  add("--learner", "learner", "adagrad | coin | const");
  add("--schedule", "schedule", "theory | practical | theory-firstorder");
  add("--t1", "t1", "first (or constant) serial phase length");
  add("--c", "c", "practical-mode batch constant (default t1)");
  add("--kmax", "kmax", "maximum number of epochs");
  add("--nhat", "nhat", "batch size override (0 = schedule default)");
  add("--eta", "eta", "step size (const learner; optional for adagrad)");
  add("--diameter", "diameter", "domain diameter (0 = unbounded)");
  add("--epsilon", "epsilon", "adagrad denominator offset");
  add("--workers", "workers", "batch-phase worker threads");
  add("--hash-bits", "hash_bits", "feature hashing bits (default 23)");
  add("--seed", "seed", "RNG seed");
  add("--compensate", "compensate", "bias compensation on/off");
  add("--sparse-combine", "sparse_combine", "sparse VR combine on/off");
  add("--data", "data", "LibSVM training file");
  add("--test", "test", "LibSVM test file");
  add("--synthetic", "synthetic",
      "synthetic problem spec, e.g. dim=20,n=16384,sparsity=5,wnorm=3");
  add("--out", "out", "CSV output path (default stdout)");
  add("--budget", "budget", "total sample budget");
  add("--serial-budget", "serial_budget", "total serial-step budget");
  add("--eval-every", "eval_every", "sgd/minibatch metric cadence in samples");
  add("--batch", "batch", "minibatch size");
  add("--block-size", "block_size", "batch aggregation leaf block size");
  add("--timing", "timing", "record wall times in the CSV (breaks byte determinism)");
  add("--weights-out", "weights_out", "plain-text weight dump path");

  CLI11_PARSE(app, argc, argv);

  std::unique_ptr<svrgol_config, ConfigDeleter> cfg(svrgol_config_new());
  if (!cfg) {
    std::fprintf(stderr, "error: %s\n", svrgol_last_error());
    return 1;
  }

  if (!config_file.empty()) {
    const int rc = svrgol_config_load_file(cfg.get(), config_file.c_str());
    if (rc != SVRGOL_OK) {
      std::fprintf(stderr, "error: %s\n", svrgol_last_error());
      return rc;
    }
  }
  for (const auto& [key, value] : kv) {
    const int rc = svrgol_config_set(cfg.get(), key.c_str(), value.c_str());
    if (rc != SVRGOL_OK) {
      std::fprintf(stderr, "error: %s\n", svrgol_last_error());
      return rc;
    }
  }

  const int rc = svrgol_run_experiment(cfg.get());
  if (rc != SVRGOL_OK)
    std::fprintf(stderr, "error (%s): %s\n", svrgol_strerror(rc),
                 svrgol_last_error());
  return rc;
}
