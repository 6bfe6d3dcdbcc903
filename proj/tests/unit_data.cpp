#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "doctest.h"
#include "svrgol/data.hpp"
#include "svrgol/errors.hpp"
#include "svrgol/sparse_linalg.hpp"
#include "test_util.hpp"

using namespace svrgol;
namespace tu = svrgol::testutil;

TEST_SUITE_BEGIN("data_pipeline");

TEST_CASE("parse_libsvm_line format") {
  const Example e = parse_libsvm_line("1 3:0.5 7:1.2", 10);
  CHECK(e.label == 1);
  REQUIRE(e.features.nnz() == 2);
  std::set<std::uint32_t> idx;
  std::set<double> vals;
  for (const auto& ent : e.features.entries()) {
    idx.insert(ent.index);
    vals.insert(ent.value);
  }
  CHECK(idx == std::set<std::uint32_t>{hash_feature(3, 10), hash_feature(7, 10)});
  CHECK(vals == std::set<double>{0.5, 1.2});

  const Example neg = parse_libsvm_line("-1", 10);
  CHECK(neg.label == -1);
  CHECK(neg.features.empty());

  // duplicate indices merge by summation: 1 + 2 = 3
  const Example dup = parse_libsvm_line("0 5:1 5:2", 10);
  CHECK(dup.label == -1);
  REQUIRE(dup.features.nnz() == 1);
  CHECK(dup.features.entries()[0].index == hash_feature(5, 10));
  CHECK(dup.features.entries()[0].value == 3.0);

  CHECK(parse_libsvm_line("+1", 10).label == 1);
  CHECK(parse_libsvm_line("1 2:3 # trailing comment", 10).features.nnz() == 1);
}

TEST_CASE("parse_libsvm_line errors carry context") {
  CHECK_THROWS_AS(parse_libsvm_line("", 10), ParseError);
  CHECK_THROWS_AS(parse_libsvm_line("   ", 10), ParseError);
  CHECK_THROWS_AS(parse_libsvm_line("2 1:1", 10), ParseError);  // bad label
  CHECK_THROWS_AS(parse_libsvm_line("1 3:abc", 10), ParseError);
  CHECK_THROWS_AS(parse_libsvm_line("1 noidx", 10), ParseError);
  CHECK_THROWS_AS(parse_libsvm_line("1 4:", 10), ParseError);
  CHECK_THROWS_AS(parse_libsvm_line("1 :4", 10), ParseError);
  try {
    parse_libsvm_line("1 3:oops", 10);
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("oops") != std::string::npos);
  }
}

TEST_CASE("hash_feature range, determinism, spread") {
  for (std::uint64_t x : {0ull, 1ull, 999999937ull}) {
    const std::uint32_t h = hash_feature(x, 1);
    CHECK(h <= 1);
    CHECK(hash_feature(x, 1) == h);
  }
  // Spread: 1e5 consecutive indices into 2^10 buckets; max load < 3x mean.
  std::vector<int> buckets(1 << 10, 0);
  for (std::uint64_t i = 0; i < 100000; ++i) ++buckets[hash_feature(i, 10)];
  const double mean = 100000.0 / 1024.0;
  CHECK(*std::max_element(buckets.begin(), buckets.end()) < 3.0 * mean);
}

TEST_CASE("canonical serialize/parse round trip") {
  Rng rng(5);
  for (int it = 0; it < 200; ++it) {
    Example e;
    e.label = uniform_index(rng, 2) == 0 ? -1 : 1;
    e.features = tu::random_sparse(rng, 1 << 10, 12);
    const Example back = parse_canonical_line(to_libsvm(e), 1 << 10);
    CHECK(back == e);
  }
}

TEST_CASE("load_libsvm skips comments and reports line numbers") {
  const std::string path = "libsvm_test_tmp.txt";
  {
    std::ofstream f(path);
    f << "# header comment\n";
    f << "1 1:2.0 3:1\n";
    f << "\n";
    f << "0 2:0.5\n";
  }
  const Dataset d = load_libsvm(path, 4);
  CHECK(d.size() == 2);
  CHECK(d.dim == 16);
  CHECK(d.examples[0].label == 1);
  CHECK(d.examples[1].label == -1);

  {
    std::ofstream f(path);
    f << "1 1:1\n";
    f << "1 bad\n";
  }
  try {
    load_libsvm(path, 4);
    CHECK(false);
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_libsvm("does_not_exist.libsvm", 4), IoError);
}

TEST_CASE("sampler point mass and determinism") {
  Dataset one;
  one.dim = 4;
  one.examples.push_back({tu::sparse(4, {{1, 2.0}}), 1});
  StreamSampler s(one, 3);
  for (int i = 0; i < 10; ++i) CHECK(s.next() == one.examples[0]);
  CHECK(s.samples_drawn() == 10);

  Dataset ten;
  ten.dim = 4;
  for (int i = 0; i < 10; ++i)
    ten.examples.push_back({tu::sparse(4, {{0, 1.0 + i}}), i % 2 ? 1 : -1});
  StreamSampler a(ten, 77), b(ten, 77);
  for (int i = 0; i < 1000; ++i) CHECK(&a.next() == &b.next());

  const Dataset empty;
  StreamSampler bad(empty, 1);
  CHECK_THROWS_AS(bad.next(), std::logic_error);
}

TEST_CASE("sampler uniformity: binomial 5-sigma and chi-squared") {
  Dataset ten;
  ten.dim = 2;
  for (int i = 0; i < 10; ++i)
    ten.examples.push_back({tu::sparse(2, {{0, 1.0 + i}}), 1});
  StreamSampler s(ten, 2024);
  std::vector<int> count(10, 0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i)
    ++count[static_cast<int>(s.next().features.entries()[0].value - 1.0)];
  const double expect = draws / 10.0;
  const double sigma = std::sqrt(draws * 0.1 * 0.9);
  for (const int c : count) CHECK(std::abs(c - expect) < 5.0 * sigma);

  Dataset sixteen;
  sixteen.dim = 2;
  for (int i = 0; i < 16; ++i)
    sixteen.examples.push_back({tu::sparse(2, {{0, 1.0 + i}}), 1});
  StreamSampler s2(sixteen, 11);
  std::vector<int> c2(16, 0);
  for (int i = 0; i < 100000; ++i)
    ++c2[static_cast<int>(s2.next().features.entries()[0].value - 1.0)];
  double chi2 = 0.0;
  const double e16 = 100000.0 / 16.0;
  for (const int c : c2) chi2 += (c - e16) * (c - e16) / e16;
  // 99.9% critical value of chi-squared with 15 dof.
  CHECK(chi2 < 37.697);
}

TEST_CASE("gen_synthetic label statistics") {
  const std::uint32_t dim = 16;

  // w_true = 0: positives come up about half the time.
  const Dataset d0 = gen_synthetic(dim, 10000, 4, DenseVector(dim), 1);
  int pos = 0;
  for (const Example& e : d0.examples) pos += e.label > 0;
  CHECK(pos > 4500);
  CHECK(pos < 5500);

  // sparsity == dim: every example has full support.
  const Dataset dd = gen_synthetic(8, 50, 8, DenseVector(8), 2);
  for (const Example& e : dd.examples) CHECK(e.features.nnz() == 8);

  // Near-deterministic labels at ||w_true|| = 100 (dense support keeps the
  // full norm in every margin).
  Rng rng(3);
  DenseVector w = tu::random_dense(rng, dim);
  const double norm = l2_norm(w);
  for (double& x : w.values()) x *= 100.0 / norm;
  const Dataset dhard = gen_synthetic(dim, 10000, dim, w, 4);
  int match = 0;
  for (const Example& e : dhard.examples) {
    const double margin = dot(e.features, w);
    if ((margin > 0 ? 1 : -1) == e.label) ++match;
  }
  CHECK(match > 9900);

  // Determinism.
  const Dataset a = gen_synthetic(8, 32, 3, DenseVector(8), 9);
  const Dataset b = gen_synthetic(8, 32, 3, DenseVector(8), 9);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.examples[i] == b.examples[i]);

  CHECK_THROWS_AS(gen_synthetic(4, 10, 5, DenseVector(4), 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(gen_synthetic(4, 0, 2, DenseVector(4), 1),
                  std::invalid_argument);
}

TEST_SUITE_END();
