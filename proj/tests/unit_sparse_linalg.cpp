#include <stdexcept>

#include "doctest.h"
#include "svrgol/rng.hpp"
#include "svrgol/sparse_linalg.hpp"
#include "test_util.hpp"

using namespace svrgol;
namespace tu = svrgol::testutil;

TEST_SUITE_BEGIN("sparse_linalg");

TEST_CASE("dot basics") {
  CHECK(dot(SparseVector(2), tu::dense({1, 2})) == 0.0);
  CHECK(dot(tu::sparse(2, {{0, 1}}), tu::dense({3, 4})) == 3.0);
  // 0.5*2 + 2*0.25 = 1.5
  CHECK(dot(tu::sparse(3, {{0, 0.5}, {2, 2}}), tu::dense({2, 9, 0.25})) == 1.5);
  CHECK_THROWS_AS(dot(tu::sparse(2, {{0, 1}}), tu::dense({1, 2, 3})),
                  std::invalid_argument);
}

TEST_CASE("dot matches brute force densified product") {
  Rng rng(42);
  for (int it = 0; it < 500; ++it) {
    const std::size_t dim = 1 + uniform_index(rng, 64);
    const SparseVector a = tu::random_sparse(rng, dim, dim);
    const DenseVector b = tu::random_dense(rng, dim);
    // Identical summation order (ascending index), so exact equality holds.
    CHECK(dot(a, b) == tu::brute_force_dot(a, b));
  }
}

TEST_CASE("axpy_sparse basics") {
  DenseVector y = tu::dense({1, 1});
  axpy_sparse(0.0, tu::sparse(2, {{0, 5}}), y);
  CHECK(y == tu::dense({1, 1}));

  DenseVector y2 = tu::dense({0, 0});
  axpy_sparse(1.0, tu::sparse(2, {{1, 2}}), y2);
  CHECK(y2 == tu::dense({0, 2}));

  DenseVector y3 = tu::dense({5, 5});
  axpy_sparse(-2.0, tu::sparse(2, {{0, 1}, {1, 3}}), y3);
  CHECK(y3 == tu::dense({3, -1}));

  CHECK_THROWS_AS(axpy_sparse(1.0, tu::sparse(3, {{0, 1}}), y3),
                  std::invalid_argument);
}

TEST_CASE("axpy round trip restores y") {
  Rng rng(7);
  for (int it = 0; it < 200; ++it) {
    const std::size_t dim = 1 + uniform_index(rng, 32);
    const SparseVector x = tu::random_sparse(rng, dim, dim);
    const DenseVector y0 = tu::random_dense(rng, dim);
    const double alpha = 3.0 * gaussian(rng);
    DenseVector y = y0;
    axpy_sparse(alpha, x, y);
    axpy_sparse(-alpha, x, y);
    for (std::size_t i = 0; i < dim; ++i) CHECK(tu::near(y[i], y0[i], 1e-12));
  }
}

TEST_CASE("l2_norm") {
  CHECK(l2_norm(tu::dense({0, 0, 0})) == 0.0);
  CHECK(l2_norm(tu::dense({3, 4})) == 5.0);
  CHECK(l2_norm(tu::dense({1, 1, 1, 1})) == 2.0);
}

TEST_CASE("construction canonicalizes") {
  // Duplicates sum, zeros drop, order sorts.
  const SparseVector v =
      tu::sparse(8, {{5, 2.0}, {1, 1.0}, {5, -1.0}, {3, 0.0}, {1, 0.5}});
  REQUIRE(v.nnz() == 2);
  CHECK(v.entries()[0].index == 1);
  CHECK(v.entries()[0].value == 1.5);
  CHECK(v.entries()[1].index == 5);
  CHECK(v.entries()[1].value == 1.0);

  // Duplicates cancelling to exactly zero disappear.
  const SparseVector z = tu::sparse(4, {{2, 1.0}, {2, -1.0}});
  CHECK(z.empty());

  CHECK_THROWS_AS(tu::sparse(4, {{4, 1.0}}), std::invalid_argument);
}

TEST_CASE("construction invariants on random input") {
  Rng rng(99);
  for (int it = 0; it < 300; ++it) {
    const std::size_t dim = 1 + uniform_index(rng, 40);
    std::vector<SparseEntry> raw;
    const std::size_t n = uniform_index(rng, 20);
    for (std::size_t i = 0; i < n; ++i)
      raw.push_back({static_cast<std::uint32_t>(uniform_index(rng, dim)),
                     uniform_index(rng, 4) == 0 ? 0.0 : gaussian(rng)});
    const SparseVector v(dim, raw);
    for (std::size_t i = 0; i < v.nnz(); ++i) {
      CHECK(v.entries()[i].value != 0.0);
      CHECK(v.entries()[i].index < dim);
      if (i > 0) CHECK(v.entries()[i].index > v.entries()[i - 1].index);
    }
  }
}

TEST_SUITE_END();
