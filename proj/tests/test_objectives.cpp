#include <doctest.h>

#include <cmath>

#include "sarah/errors.hpp"
#include "sarah/harness.hpp"
#include "sarah/objectives.hpp"
#include "test_support.hpp"

using namespace sarah;
using namespace testing_support;

namespace {

ProblemInstance scalar_logistic(double x, double y, double lambda) {
  CsrMatrix m({0, 1}, {0}, {x}, 1);
  return ProblemInstance::logistic(m, {y}, lambda);
}

/// Central differences of f_i with a step scaled to each coordinate.
DenseVector fd_grad(const ProblemInstance& p, std::size_t i, DenseVector w) {
  DenseVector g(w.size());
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double h = 1e-5 * std::max(1.0, std::abs(w[j]));
    const double orig = w[j];
    w[j] = orig + h;
    const double up = p.component_loss(i, w);
    w[j] = orig - h;
    const double down = p.component_loss(i, w);
    w[j] = orig;
    g[j] = (up - down) / (2.0 * h);
  }
  return g;
}

std::vector<ProblemInstance> one_of_each(std::uint64_t seed) {
  std::vector<ProblemInstance> out;
  out.push_back(random_logistic(seed, 8, 5, 0.05));
  out.push_back(random_least_squares(seed, 8, 5, 0.05));
  out.push_back(random_quadratic(seed, 8, 5));
  return out;
}

}  // namespace

TEST_CASE("component_grad examples") {
  CsrMatrix zero(1);
  zero.append_row(SparseRow{});
  const auto p0 = ProblemInstance::logistic(zero, {1.0}, 0.0);
  CHECK(p0.component_grad(0, DenseVector{3.0}) == DenseVector{0.0});

  const auto p1 = scalar_logistic(1.0, 1.0, 0.0);
  CHECK(p1.component_grad(0, DenseVector{0.0})[0] == doctest::Approx(-0.5).epsilon(1e-15));

  CsrMatrix one({0, 1}, {0}, {1.0}, 1);
  const auto p2 = ProblemInstance::least_squares(one, {2.0}, 0.0);
  CHECK(p2.component_grad(0, DenseVector{2.0})[0] == 0.0);
}

TEST_CASE("component_grad argument errors") {
  const auto p = random_logistic(1, 4, 3, 0.1);
  CHECK_THROWS_AS(p.component_grad(4, DenseVector(3, 0.0)), InvalidArgument);
  CHECK_THROWS_AS(p.component_grad(0, DenseVector(2, 0.0)), DimensionMismatch);
  CHECK_THROWS_AS(p.full_grad(DenseVector(4, 0.0)), DimensionMismatch);
  CHECK_THROWS_AS(p.loss(DenseVector(4, 0.0)), DimensionMismatch);
}

TEST_CASE("full_grad examples") {
  const auto q = random_quadratic(5, 4, 3);
  const auto w_star = quadratic_minimizer(q);
  CHECK(std::sqrt(norm_sq(q.full_grad(w_star))) <= 1e-12);

  CounterRng rng(77);
  for (const auto& p : {random_logistic(3, 1, 4, 0.2), random_least_squares(3, 1, 4, 0.2)}) {
    const auto w = random_vector(rng, 4);
    CHECK(bit_identical(p.full_grad(w), p.component_grad(0, w)));
  }
  const auto q1 = random_quadratic(3, 1, 4);
  const auto w = random_vector(rng, 4);
  CHECK(bit_identical(q1.full_grad(w), q1.component_grad(0, w)));

  const auto two = identity_quadratic({{0.0}, {2.0}});
  CHECK(two.full_grad(DenseVector{0.0}) == DenseVector{-1.0});
}

TEST_CASE("loss examples") {
  const auto p = random_logistic(4, 10, 6, 0.3);
  CHECK(p.loss(DenseVector(6, 0.0)) == doctest::Approx(std::log(2.0)).epsilon(1e-15));

  CsrMatrix x({0, 1, 2}, {0, 1}, {1.0, 2.0}, 2);
  const auto ls = ProblemInstance::least_squares(x, {3.0, 4.0}, 0.0);
  CHECK(ls.loss(DenseVector{3.0, 2.0}) == 0.0);

  const auto q = identity_quadratic({{0.0, 0.0}});
  CHECK(q.loss(DenseVector{3.0, 4.0}) == 12.5);
}

TEST_CASE("logistic loss is stable at extreme margins") {
  const auto p = scalar_logistic(1.0, 1.0, 0.0);
  CHECK(p.loss(DenseVector{-1000.0}) == doctest::Approx(1000.0));
  CHECK(p.loss(DenseVector{1000.0}) >= 0.0);
  CHECK(std::isfinite(p.component_grad(0, DenseVector{-1000.0})[0]));
  CHECK(p.component_grad(0, DenseVector{-1000.0})[0] == doctest::Approx(-1.0));
}

TEST_CASE("smoothness examples") {
  CsrMatrix unit(3);
  CounterRng rng(5);
  const std::size_t n = 500;
  std::vector<double> labels;
  for (std::size_t i = 0; i < n; ++i) {
    auto v = random_vector(rng, 3);
    const double s = 1.0 / std::sqrt(norm_sq(v));
    for (auto& x : v) x *= s;
    unit.append_row(std::vector<std::uint32_t>{0, 1, 2}, v);
    labels.push_back(i % 2 ? 1.0 : -1.0);
  }
  const auto p = ProblemInstance::logistic(unit, labels, 1.0 / n);
  CHECK(p.smoothness().L == doctest::Approx(0.25 + 1.0 / n).epsilon(1e-12));
  CHECK(p.smoothness().mu == 1.0 / n);

  CsrMatrix zero(1);
  zero.append_row(SparseRow{});
  CHECK_THROWS_AS(ProblemInstance::logistic(zero, {1.0}, 0.0).smoothness(),
                  DegenerateProblem);

  const auto diag = ProblemInstance::quadratic_sum({{1.0, 0.0, 0.0, 9.0}}, {{0.0, 0.0}});
  CHECK(diag.smoothness().L == doctest::Approx(9.0).epsilon(1e-14));
  CHECK(diag.smoothness().mu == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(diag.smoothness().kappa() == doctest::Approx(9.0).epsilon(1e-14));

  CHECK_THROWS_AS((SmoothnessInfo{1.0, 0.0}.kappa()), DomainError);
}

TEST_CASE("constructor validation") {
  CsrMatrix x({0, 1}, {0}, {1.0}, 1);
  CHECK_THROWS_AS(ProblemInstance::logistic(x, {0.5}, 0.1), InvalidArgument);
  CHECK_THROWS_AS(ProblemInstance::logistic(x, {1.0, 1.0}, 0.1), DimensionMismatch);
  CHECK_THROWS_AS(ProblemInstance::logistic(x, {1.0}, -1.0), InvalidArgument);
  // Asymmetric Hessian.
  CHECK_THROWS_AS(ProblemInstance::quadratic_sum({{1.0, 1.0, 0.0, 1.0}}, {{0.0, 0.0}}),
                  InvalidArgument);
  // Indefinite Hessian.
  CHECK_THROWS_AS(ProblemInstance::quadratic_sum({{1.0, 0.0, 0.0, -1.0}}, {{0.0, 0.0}}),
                  InvalidArgument);
  // PSD components with a singular sum.
  CHECK_THROWS_AS(ProblemInstance::quadratic_sum({{1.0, 0.0, 0.0, 0.0}}, {{0.0, 0.0}}),
                  InvalidArgument);
}

TEST_CASE("test_error examples") {
  CsrMatrix x({0, 1, 2, 3, 4}, {0, 0, 0, 0}, {1.0, -1.0, 2.0, -2.0}, 1);
  const std::vector<double> y{1.0, -1.0, 1.0, -1.0};
  CHECK(test_error(x, y, DenseVector{0.0}) == 0.5);
  CHECK(test_error(x, y, DenseVector{1.0}) == 0.0);
  CHECK(test_error(x, y, DenseVector{-1.0}) == 1.0);
  CHECK_THROWS_AS(test_error(CsrMatrix(1), {}, DenseVector{1.0}), EmptyDataset);
  CHECK_THROWS_AS(test_error(x, y, DenseVector{1.0, 2.0}), DimensionMismatch);
}

TEST_CASE("property: component gradients match central finite differences") {
  CounterRng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    for (const auto& p : one_of_each(1000 + trial)) {
      const auto w = random_vector(rng, p.d());
      const std::size_t i = rng.uniform_index(p.n());
      const auto g = p.component_grad(i, w);
      const auto fd = fd_grad(p, i, w);
      const double err = std::sqrt(dist_sq(g, fd));
      CHECK(err <= 1e-6 * std::max(1.0, std::sqrt(norm_sq(g))));
    }
  }
}

TEST_CASE("property: component gradients are L-Lipschitz") {
  CounterRng rng(32);
  for (int trial = 0; trial < 30; ++trial) {
    for (const auto& p : one_of_each(2000 + trial)) {
      const double L = p.smoothness().L;
      for (std::size_t i = 0; i < p.n(); ++i) {
        const auto a = random_vector(rng, p.d(), 3.0);
        const auto b = random_vector(rng, p.d(), 3.0);
        const double lhs = std::sqrt(dist_sq(p.component_grad(i, a), p.component_grad(i, b)));
        CHECK(lhs <= L * std::sqrt(dist_sq(a, b)) * (1.0 + 1e-12));
      }
    }
  }
}

TEST_CASE("property: strong convexity gap bound at random points") {
  CounterRng rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    for (const auto& p : one_of_each(3000 + trial)) {
      const auto s = p.smoothness();
      const auto ref = compute_reference(p);
      for (int k = 0; k < 5; ++k) {
        const auto w = random_vector(rng, p.d(), 2.0);
        const double gap = p.loss(w) - ref.p_star;
        CHECK(2.0 * s.mu * gap <= norm_sq(p.full_grad(w)) * (1.0 + 1e-10) + 1e-14);
      }
    }
  }
}

TEST_CASE("property: full_grad is the average of component gradients") {
  CounterRng rng(34);
  for (int trial = 0; trial < 30; ++trial) {
    for (const auto& p : one_of_each(4000 + trial)) {
      const auto w = random_vector(rng, p.d());
      DenseVector avg(p.d(), 0.0);
      for (std::size_t i = 0; i < p.n(); ++i) axpy(1.0, p.component_grad(i, w), avg);
      for (auto& x : avg) x /= static_cast<double>(p.n());
      const auto g = p.full_grad(w);
      CHECK(std::sqrt(dist_sq(g, avg)) <= 1e-12 * std::max(1.0, std::sqrt(norm_sq(g))));
    }
  }
}

TEST_CASE("content hash distinguishes problems and is stable") {
  const auto a = random_logistic(1, 5, 3, 0.1);
  const auto b = random_logistic(1, 5, 3, 0.1);
  const auto c = random_logistic(1, 5, 3, 0.2);
  CHECK(a.content_hash() == b.content_hash());
  CHECK(a.content_hash() != c.content_hash());
}
