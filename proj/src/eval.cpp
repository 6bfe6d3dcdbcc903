#include "svrgol/eval.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>

#include "svrgol/errors.hpp"
#include "svrgol/metrics.hpp"
#include "svrgol/rng.hpp"

namespace svrgol {
namespace {

const std::set<std::string> kAlgos = {"svrg-ol", "sgd", "minibatch", "svrg-const"};
const std::set<std::string> kLearners = {"adagrad", "coin", "const"};
const std::set<std::string> kSchedules = {"theory", "practical", "theory-firstorder"};

std::uint64_t parse_u64(std::string_view v, std::string_view key) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw UsageError("bad integer for " + std::string(key) + ": '" +
                     std::string(v) + "'");
  return out;
}

double parse_f64(std::string_view v, std::string_view key) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw UsageError("bad number for " + std::string(key) + ": '" +
                     std::string(v) + "'");
  return out;
}

bool parse_bool(std::string_view v, std::string_view key) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw UsageError("bad boolean for " + std::string(key) + ": '" +
                   std::string(v) + "'");
}

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  const auto res =
      std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

class CsvWriter {
 public:
  void open(const std::string& path) {
    if (path.empty()) {
      os_ = &std::cout;
      return;
    }
    file_.open(path, std::ios::binary | std::ios::trunc);
    if (!file_) throw IoError("cannot open output '" + path + "'");
    os_ = &file_;
  }

  void header() {
    *os_ << "phase,epoch,rounds,samples_seen,train_loss,test_loss,auc,subopt,"
            "wall_ms\n";
    os_->flush();
  }

  void row(const PhaseRecord& r) {
    *os_ << r.phase << ',' << r.epoch << ',' << r.rounds << ','
         << r.samples_seen << ',' << format_double(r.train_loss) << ','
         << format_double(r.test_loss) << ',' << format_double(r.auc) << ','
         << format_double(r.subopt) << ',' << format_double(r.wall_ms) << '\n';
    os_->flush();
  }

 private:
  std::ostream* os_ = nullptr;
  std::ofstream file_;
};

DenseVector synthesize_w_true(std::uint32_t dim, double wnorm,
                              std::uint64_t seed) {
  DenseVector w(dim);
  Rng rng(seed);
  for (std::size_t i = 0; i < dim; ++i) w[i] = gaussian(rng);
  const double norm = l2_norm(w);
  if (wnorm <= 0.0 || norm == 0.0) return DenseVector(dim);
  const double scale = wnorm / norm;
  for (double& x : w.values()) x *= scale;
  return w;
}

void dump_weights(const DenseVector& w, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open weights output '" + path + "'");
  char buf[64];
  for (const double v : w.values()) {
    const auto res =
        std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    out.write(buf, res.ptr - buf);
    out.put('\n');
  }
}

}  // namespace

SyntheticSpec parse_synthetic_spec(const std::string& spec) {
  SyntheticSpec out;
  std::size_t i = 0;
  while (i < spec.size()) {
    std::size_t j = spec.find(',', i);
    if (j == std::string::npos) j = spec.size();
    const std::string_view item(spec.data() + i, j - i);
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos)
      throw UsageError("bad synthetic spec item '" + std::string(item) + "'");
    const std::string_view key = item.substr(0, eq);
    const std::string_view value = item.substr(eq + 1);
    if (key == "dim")
      out.dim = static_cast<std::uint32_t>(parse_u64(value, key));
    else if (key == "n")
      out.n = parse_u64(value, key);
    else if (key == "sparsity")
      out.sparsity = static_cast<std::uint32_t>(parse_u64(value, key));
    else if (key == "wnorm")
      out.wnorm = parse_f64(value, key);
    else if (key == "ntest")
      out.ntest = parse_u64(value, key);
    else
      throw UsageError("unknown synthetic key '" + std::string(key) + "'");
    i = j + 1;
  }
  if (out.dim < 1 || out.n < 1 || out.sparsity < 1 || out.sparsity > out.dim)
    throw UsageError("invalid synthetic sizes");
  return out;
}

void set_config_key(RunConfig& cfg, std::string_view key,
                    std::string_view value) {
  const std::string v(value);
  if (key == "algo") cfg.algo = v;
  else if (key == "learner") cfg.learner = v;
  else if (key == "schedule") cfg.schedule = v;
  else if (key == "t1") cfg.t1 = parse_u64(value, key);
  else if (key == "c") cfg.c = parse_u64(value, key);
  else if (key == "kmax") cfg.kmax = static_cast<int>(parse_u64(value, key));
  else if (key == "nhat") cfg.nhat = parse_u64(value, key);
  else if (key == "eta") cfg.eta = parse_f64(value, key);
  else if (key == "diameter") cfg.diameter = parse_f64(value, key);
  else if (key == "epsilon") cfg.epsilon = parse_f64(value, key);
  else if (key == "workers") cfg.workers = static_cast<int>(parse_u64(value, key));
  else if (key == "hash_bits") cfg.hash_bits = static_cast<int>(parse_u64(value, key));
  else if (key == "seed") cfg.seed = parse_u64(value, key);
  else if (key == "compensate") cfg.compensate = parse_bool(value, key);
  else if (key == "sparse_combine") cfg.sparse_combine = parse_bool(value, key);
  else if (key == "data") cfg.data = v;
  else if (key == "test") cfg.test = v;
  else if (key == "synthetic") cfg.synthetic = v;
  else if (key == "out") cfg.out = v;
  else if (key == "budget") cfg.budget = parse_u64(value, key);
  else if (key == "serial_budget") cfg.serial_budget = parse_u64(value, key);
  else if (key == "eval_every") cfg.eval_every = parse_u64(value, key);
  else if (key == "batch") cfg.batch = parse_u64(value, key);
  else if (key == "block_size") cfg.block_size = parse_u64(value, key);
  else if (key == "timing") cfg.timing = parse_bool(value, key);
  else if (key == "weights_out") cfg.weights_out = v;
  else if (key == "enumerate_batch") cfg.enumerate_batch = parse_bool(value, key);
  else throw UsageError("unknown config key '" + std::string(key) + "'");
}

void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::size_t b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    std::size_t e = line.find_last_not_of(" \t\r");
    const std::string_view body(line.data() + b, e - b + 1);
    const std::size_t eq = body.find('=');
    if (eq == std::string_view::npos)
      throw UsageError(path + ":" + std::to_string(lineno) +
                       ": expected key=value");
    try {
      set_config_key(cfg, body.substr(0, eq), body.substr(eq + 1));
    } catch (const UsageError& err) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": " + err.what());
    }
  }
}

void validate_config(const RunConfig& cfg) {
  if (!kAlgos.count(cfg.algo)) throw UsageError("unknown algo '" + cfg.algo + "'");
  if (!kLearners.count(cfg.learner))
    throw UsageError("unknown learner '" + cfg.learner + "'");
  if (!kSchedules.count(cfg.schedule))
    throw UsageError("unknown schedule '" + cfg.schedule + "'");
  if (cfg.hash_bits < 1 || cfg.hash_bits > 31)
    throw UsageError("hash_bits must be in [1, 31]");
  if (cfg.workers < 1) throw UsageError("workers must be >= 1");
  if (cfg.kmax < 1) throw UsageError("kmax must be >= 1");
  if (cfg.eval_every < 1) throw UsageError("eval_every must be >= 1");
  if (cfg.batch < 1) throw UsageError("batch must be >= 1");
  if (cfg.block_size < 1) throw UsageError("block_size must be >= 1");
  if (!(cfg.epsilon > 0.0)) throw UsageError("epsilon must be > 0");
  if (cfg.diameter < 0.0) throw UsageError("diameter must be >= 0");
  if (cfg.data.empty() == cfg.synthetic.empty())
    throw UsageError("exactly one of data and synthetic is required");
  if (!cfg.test.empty() && cfg.data.empty())
    throw UsageError("test requires data (use synthetic ntest= instead)");
  if (!cfg.synthetic.empty()) parse_synthetic_spec(cfg.synthetic);

  const bool const_learner = cfg.learner == "const" || cfg.algo == "svrg-const";
  if (const_learner && std::isnan(cfg.eta))
    throw UsageError("constant-step runs require eta");
  if (cfg.algo == "sgd" && cfg.budget == 0 && cfg.serial_budget == 0)
    throw UsageError("sgd requires budget or serial_budget");
  if (cfg.algo == "minibatch" && cfg.budget == 0)
    throw UsageError("minibatch requires budget");
}

ExperimentData prepare_data(const RunConfig& cfg) {
  ExperimentData out;
  if (!cfg.data.empty()) {
    out.train = load_libsvm(cfg.data, cfg.hash_bits);
    if (out.train.empty()) throw IoError("training data '" + cfg.data + "' is empty");
    if (!cfg.test.empty()) out.test = load_libsvm(cfg.test, cfg.hash_bits);
    return out;
  }
  const SyntheticSpec spec = parse_synthetic_spec(cfg.synthetic);
  const DenseVector w_true =
      synthesize_w_true(spec.dim, spec.wnorm, mix64(cfg.seed ^ 0x57a57a5ull));
  out.train = gen_synthetic(spec.dim, spec.n, spec.sparsity, w_true,
                            mix64(cfg.seed ^ 0xda7a5e7ull));
  if (spec.ntest > 0)
    out.test = gen_synthetic(spec.dim, spec.ntest, spec.sparsity, w_true,
                             mix64(cfg.seed ^ 0x7e575e7ull));
  const OracleResult oracle = solve_logistic(out.train, 1e-10, 100000);
  if (oracle.converged) out.w_star = oracle.w;
  return out;
}

int run_experiment(const RunConfig& cfg, std::string* error) {
  const auto fail = [&](int code, const std::string& msg) {
    if (error) *error = msg;
    return code;
  };
  try {
    validate_config(cfg);
  } catch (const UsageError& e) {
    return fail(2, e.what());
  }
  try {
    const ExperimentData data = prepare_data(cfg);

    RunParams p;
    p.schedule.mode = cfg.schedule == "theory"
                          ? ScheduleMode::theory
                          : (cfg.schedule == "practical"
                                 ? ScheduleMode::practical
                                 : ScheduleMode::theory_firstorder);
    p.schedule.t1 = cfg.t1;
    p.schedule.k_max = cfg.kmax;
    p.schedule.c = cfg.c > 0 ? cfg.c : cfg.t1;
    p.schedule.nhat_override = cfg.nhat;
    p.schedule.planned_serial = cfg.serial_budget;
    p.learner.type = cfg.learner == "adagrad"
                         ? LearnerType::adagrad
                         : (cfg.learner == "coin" ? LearnerType::coin_betting
                                                  : LearnerType::constant_step);
    p.learner.eta = cfg.eta;
    p.learner.diameter = cfg.diameter > 0.0
                             ? cfg.diameter
                             : std::numeric_limits<double>::infinity();
    p.learner.epsilon = cfg.epsilon;
    p.compensate = cfg.compensate;
    p.sparse_combine = cfg.sparse_combine;
    p.workers = cfg.workers;
    p.block_size = cfg.block_size;
    p.sample_budget = cfg.budget;
    p.serial_budget = cfg.serial_budget;
    p.minibatch = cfg.batch;
    p.eval_every = cfg.eval_every;
    p.seed = cfg.seed;
    p.timing = cfg.timing;
    p.enumerate_batch = cfg.enumerate_batch;

    CsvWriter csv;
    csv.open(cfg.out);
    csv.header();
    p.on_record = [&csv](const PhaseRecord& rec) { csv.row(rec); };

    const Dataset* test = data.test ? &*data.test : nullptr;
    const DenseVector* w_star = data.w_star ? &*data.w_star : nullptr;

    RunResult result;
    if (cfg.algo == "svrg-ol")
      result = run_svrg_ol(p, data.train, test, w_star);
    else if (cfg.algo == "svrg-const")
      result = run_classic_svrg(p, data.train, test, w_star);
    else if (cfg.algo == "sgd")
      result = run_sgd(p, data.train, test, w_star);
    else
      result = run_minibatch_sgd(p, data.train, test, w_star);

    if (!cfg.weights_out.empty()) dump_weights(result.w_bar, cfg.weights_out);
    return 0;
  } catch (const UsageError& e) {
    return fail(2, e.what());
  } catch (const DivergenceError& e) {
    return fail(4, e.what());
  } catch (const ParseError& e) {
    return fail(3, e.what());
  } catch (const IoError& e) {
    return fail(3, e.what());
  } catch (const std::exception& e) {
    return fail(1, e.what());
  }
}

}  // namespace svrgol
