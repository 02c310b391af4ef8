#include <doctest.h>

#include <cmath>
#include <limits>

#include "sarah/errors.hpp"
#include "sarah/numkit.hpp"
#include "test_support.hpp"

using namespace sarah;
using testing_support::random_vector;

namespace {

SparseRow make_row(std::vector<std::uint32_t> idx, std::vector<double> val) {
  return SparseRow{std::move(idx), std::move(val)};
}

}  // namespace

TEST_CASE("dot examples") {
  DenseVector w{3, 9, 4};
  CHECK(dot(make_row({0, 2}, {1.0, 2.0}).view(), w) == 11.0);
  CHECK(dot(make_row({}, {}).view(), DenseVector{1, 1, 1}) == 0.0);
  CHECK(dot(make_row({1}, {-1.0}).view(), DenseVector{0, 5, 0}) == -5.0);
}

TEST_CASE("dot rejects out-of-range index") {
  CHECK_THROWS_AS(dot(make_row({3}, {1.0}).view(), DenseVector{1, 2, 3}),
                  DimensionMismatch);
}

TEST_CASE("axpy_sparse examples") {
  DenseVector w{0, 0};
  axpy_sparse(2.0, make_row({1}, {3.0}).view(), w);
  CHECK(w == DenseVector{0, 6});

  DenseVector u{1.5, -2.0};
  axpy_sparse(0.0, make_row({0, 1}, {7.0, 8.0}).view(), u);
  CHECK(u == DenseVector{1.5, -2.0});

  DenseVector v{1, 2};
  axpy_sparse(1.0, make_row({0, 1}, {1.0, 1.0}).view(), v);
  CHECK(v == DenseVector{2, 3});

  CHECK_THROWS_AS(axpy_sparse(1.0, make_row({2}, {1.0}).view(), v), DimensionMismatch);
}

TEST_CASE("norm_sq examples") {
  CHECK(norm_sq(DenseVector{3, 4}) == 25.0);
  CHECK(norm_sq(DenseVector(7, 0.0)) == 0.0);
  CHECK(norm_sq(DenseVector{-1, 1, 1, 1}) == 4.0);
}

TEST_CASE("property: dot is linear in w") {
  CounterRng rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 1 + rng.uniform_index(30);
    auto x = testing_support::random_csr(rng, 1, d, 0.6);
    const auto row = x.row(0);
    const auto w1 = random_vector(rng, d);
    const auto w2 = random_vector(rng, d);
    const double a = rng.normal();
    DenseVector comb(d);
    for (std::size_t j = 0; j < d; ++j) comb[j] = a * w1[j] + w2[j];
    const double lhs = dot(row, comb);
    const double rhs = a * dot(row, w1) + dot(row, w2);
    double scale = 0.0;
    for (std::size_t k = 0; k < row.nnz(); ++k) {
      scale += std::abs(row.values[k]) *
               (std::abs(a * w1[row.indices[k]]) + std::abs(w2[row.indices[k]]));
    }
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, scale));
  }
}

TEST_CASE("property: axpy_sparse with -alpha restores w exactly for power-of-two data") {
  CounterRng rng(202);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 1 + rng.uniform_index(20);
    DenseVector w(d);
    for (auto& x : w) x = std::ldexp(1.0, static_cast<int>(rng.uniform_index(10)) - 5);
    std::vector<std::uint32_t> idx;
    std::vector<double> val;
    for (std::size_t j = 0; j < d; ++j) {
      if (rng.uniform01() < 0.5) {
        idx.push_back(static_cast<std::uint32_t>(j));
        val.push_back(std::ldexp(1.0, static_cast<int>(rng.uniform_index(6)) - 3));
      }
    }
    const SparseRow row{idx, val};
    const double alpha = std::ldexp(1.0, static_cast<int>(rng.uniform_index(4)) - 2);
    const DenseVector before = w;
    axpy_sparse(alpha, row.view(), w);
    axpy_sparse(-alpha, row.view(), w);
    CHECK(bit_identical(before, w));
  }
}

TEST_CASE("property: norm_sq nonnegative and zero only for signed zeros") {
  CounterRng rng(303);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 1 + rng.uniform_index(10);
    auto w = random_vector(rng, d);
    CHECK(norm_sq(w) > 0.0);
    for (auto& x : w) x = rng.uniform01() < 0.5 ? 0.0 : -0.0;
    CHECK(norm_sq(w) == 0.0);
  }
}

TEST_CASE("kernels keep finite inputs finite") {
  DenseVector w{1e150, -1e150};
  axpy(1.0, DenseVector{1.0, 1.0}, w);
  CHECK(all_finite(w));
  CHECK_FALSE(all_finite(DenseVector{1.0, std::numeric_limits<double>::quiet_NaN()}));
}

TEST_CASE("csr construction validates structure") {
  CHECK_NOTHROW(CsrMatrix({0, 2, 3}, {0, 2, 1}, {1.0, 2.0, 3.0}, 3));
  CHECK_THROWS_AS(CsrMatrix({1, 2}, {0}, {1.0}, 3), InvalidArgument);
  CHECK_THROWS_AS(CsrMatrix({0, 2}, {2, 1}, {1.0, 2.0}, 3), InvalidArgument);
  CHECK_THROWS_AS(CsrMatrix({0, 1}, {3}, {1.0}, 3), InvalidArgument);
  CHECK_THROWS_AS(CsrMatrix({0, 2, 1}, {0, 1}, {1.0, 1.0}, 3), InvalidArgument);

  CsrMatrix m(4);
  const std::vector<std::uint32_t> idx{1, 3};
  const std::vector<double> val{0.5, -1.0};
  m.append_row(idx, val);
  m.append_row(std::span<const std::uint32_t>{}, std::span<const double>{});
  CHECK(m.rows() == 2);
  CHECK(m.nnz() == 2);
  CHECK(m.row(1).nnz() == 0);
  CHECK(m.row_offsets().back() == m.nnz());
  CHECK_THROWS_AS(m.set_cols(3), InvalidArgument);
  m.set_cols(10);
  CHECK(m.cols() == 10);
}

TEST_CASE("dense helpers") {
  CHECK(dense_dot(DenseVector{1, 2, 3}, DenseVector{4, 5, 6}) == 32.0);
  CHECK(dist_sq(DenseVector{1, 1}, DenseVector{4, 5}) == 25.0);
  CHECK_FALSE(bit_identical(DenseVector{0.0}, DenseVector{-0.0}));
  DenseVector y{1, 1};
  axpy(-2.0, DenseVector{1, 3}, y);
  CHECK(y == DenseVector{-1, -5});
}
