#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "sarah/errors.hpp"
#include "sarah/theory.hpp"

using namespace sarah;

namespace {

RateParams rp(double mu, double L, double eta, double m) { return {mu, L, eta, m}; }

/// m as a function of theta for a target sigma, from eta = 1/(theta L).
double m_of_theta(double theta, double sigma, double kappa) {
  return theta * (2.0 * theta - 1.0) / (sigma * (2.0 * theta - 1.0) - 1.0) * kappa - 1.0;
}

/// Zooming grid search over the admissible theta range.
double grid_min_m(double sigma, double kappa) {
  double lo = (1.0 / sigma + 1.0) / 2.0 + 1e-9, hi = 1e3;
  double best_theta = lo;
  for (int round = 0; round < 12; ++round) {
    double best = INFINITY;
    const int points = 2001;
    for (int k = 0; k < points; ++k) {
      const double th = lo + (hi - lo) * k / (points - 1);
      const double v = m_of_theta(th, sigma, kappa);
      if (v > 0.0 && v < best) {
        best = v;
        best_theta = th;
      }
    }
    const double width = (hi - lo) / (points - 1) * 4.0;
    lo = std::max(lo, best_theta - width);
    hi = best_theta + width;
  }
  return m_of_theta(best_theta, sigma, kappa);
}

}  // namespace

TEST_CASE("sigma_m examples") {
  CHECK(sigma_m(rp(0.01, 1.0, 0.5, 450)).value ==
        doctest::Approx(1.0 / (0.01 * 0.5 * 451) + 0.5 / 1.5).epsilon(1e-15));
  CHECK(sigma_m(rp(0.01, 1.0, 0.5, 450)).value == doctest::Approx(0.776792).epsilon(1e-6));
  CHECK(sigma_m(rp(0.01, 1.0, 0.5, 450)).convergent);
  for (double kappa : {1.0, 2.0, 10.0, 100.0, 1e3, 1e6}) {
    const auto s = sigma_m(rp(1.0 / kappa, 1.0, 0.5, std::ceil(4.5 * kappa)));
    CHECK(s.value < 7.0 / 9.0);
  }
  CHECK(sigma_m(rp(0.01, 1.0, 0.5, 1e15)).value == doctest::Approx(0.5 / 1.5).epsilon(1e-12));
  CHECK_THROWS_AS(sigma_m(rp(0.01, 1.0, 2.0, 10)), DomainError);
  CHECK_FALSE(sigma_m(rp(0.01, 1.0, 0.1, 10)).convergent);
}

TEST_CASE("alpha_m_svrg examples") {
  CHECK(alpha_m_svrg(rp(0.01, 1.0, 0.1, 1000)).value == doctest::Approx(1.5).epsilon(1e-14));
  CHECK_FALSE(alpha_m_svrg(rp(0.01, 1.0, 0.1, 1000)).convergent);
  const double s = sigma_m(rp(0.01, 1.0, 0.1, 1000)).value;
  CHECK(s == doctest::Approx(1.051633).epsilon(1e-6));
  CHECK(s < 1.5);
  CHECK(alpha_m_svrg(rp(0.01, 1.0, 1e-12, 1000)).value > 1e10);
  CHECK_THROWS_AS(alpha_m_svrg(rp(0.01, 1.0, 0.5, 10)), DomainError);
}

TEST_CASE("rate parameters validate") {
  CHECK_THROWS_AS(sigma_m(rp(0.0, 1.0, 0.5, 10)), DomainError);
  CHECK_THROWS_AS(sigma_m(rp(2.0, 1.0, 0.5, 10)), DomainError);
  CHECK_THROWS_AS(sigma_m(rp(0.1, 1.0, 0.5, 0.5)), DomainError);
}

TEST_CASE("optimal_theta and optimal_m examples") {
  CHECK(std::abs(optimal_theta(7.0 / 9.0) - 2.0) <= 1e-12);
  CHECK(optimal_theta(1.0 - 1e-12) == doctest::Approx(1.0 + std::sqrt(2.0) / 2.0).epsilon(1e-6));
  CHECK(optimal_theta(0.5) == doctest::Approx(1.5 + std::sqrt(1.5)).epsilon(1e-14));
  CHECK(optimal_theta(0.5) == doctest::Approx(2.72474).epsilon(1e-5));
  CHECK_THROWS_AS(optimal_theta(0.0), DomainError);
  CHECK_THROWS_AS(optimal_theta(1.0), DomainError);
  for (double kappa : {1.0, 10.0, 1e3, 1e6}) {
    CHECK(std::abs(optimal_m(7.0 / 9.0, kappa) - (4.5 * kappa - 1.0)) <=
          1e-9 * (4.5 * kappa - 1.0));
  }
  CHECK(optimal_m(7.0 / 9.0, 1.0) == doctest::Approx(3.5).epsilon(1e-12));
}

TEST_CASE("property: optimal_m matches a brute-force theta grid") {
  for (double sigma : {0.2, 0.5, 7.0 / 9.0, 0.9, 0.99}) {
    for (double kappa : {1.0, 50.0, 1e4}) {
      const double brute = grid_min_m(sigma, kappa);
      const double closed = optimal_m(sigma, kappa);
      CHECK(std::abs(brute - closed) <= 1e-6 * std::abs(closed));
    }
  }
}

TEST_CASE("property: theta* satisfies the stationarity relation and admissibility") {
  for (int k = 1; k < 100; ++k) {
    const double sigma = k / 100.0;
    const double th = optimal_theta(sigma);
    const double rel = (4.0 * th - 1.0) / ((2.0 * th - 1.0) * (2.0 * th - 1.0));
    CHECK(std::abs(rel - sigma) <= 1e-12);
    CHECK(th > 1.0 + std::sqrt(2.0) / 2.0);
  }
}

TEST_CASE("single_loop_rate examples") {
  CHECK(single_loop_rate(1.0, 199).rate == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(single_loop_rate(1.0, 199).eta == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(single_loop_rate(1.0, 1).rate == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(single_loop_rate(0.25, 799).rate == doctest::Approx(0.025).epsilon(1e-15));
  CHECK_THROWS_AS(single_loop_rate(10.0, 5), DomainError);
}

TEST_CASE("multi_loop_convex_bound examples") {
  CHECK(multi_loop_convex_bound(0.3, 0.5, 1.0, 0, 17.0) == 17.0);
  CHECK(convex_alpha(2.0 / 3.0, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(multi_loop_convex_bound(0.0, 2.0 / 3.0, 1.0, 10, 1024.0) ==
        doctest::Approx(1.0).epsilon(1e-13));
  CHECK_THROWS_AS(multi_loop_convex_bound(0.0, 1.0, 1.0, 1, 1.0), DomainError);
  // Delta = delta (1 + eta L / (2 (1 - eta L))) is the large-s limit.
  const double delta = 0.2, eta = 0.5;
  CHECK(multi_loop_convex_bound(delta, eta, 1.0, 200, 5.0) ==
        doctest::Approx(delta * (1.0 + 0.5 / (2.0 * 0.5))).epsilon(1e-12));
}

TEST_CASE("iterations_needed examples") {
  CHECK(iterations_needed(1.0, std::pow(7.0 / 9.0, 3.0)).outer == 3);
  const auto same = iterations_needed(2.0, 2.0);
  CHECK(same.outer == 0);
  CHECK(same.already_accurate);
  CHECK(iterations_needed(100.0, 1e-6).outer == 74);
  CHECK(iterations_needed(1.0, 5.0).already_accurate);
}

TEST_CASE("inner contraction factors") {
  CHECK(inner_rate_strongly_convex_p(0.1, 1.0, 1.0) ==
        doctest::Approx(1.0 - (2.0 - 1.0) * 0.01).epsilon(1e-15));
  CHECK(inner_rate_each_strongly_convex(0.1, 1.0, 2.0 / 1.1) ==
        doctest::Approx(1.0 - 2.0 * 0.1 * (2.0 / 1.1) / 1.1).epsilon(1e-15));
  CHECK(gap_bound_factor(1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(gap_bound_factor(2.0, 1.0), DomainError);
  CHECK_THROWS_AS(inner_rate_each_strongly_convex(0.1, 1.0, 2.0), DomainError);
}

TEST_CASE("property: sigma_m decreases in m and is unimodal in eta") {
  for (double kappa : {10.0, 1000.0}) {
    const double mu = 1.0 / kappa;
    double prev = INFINITY;
    for (double m = 1; m < 1e6; m *= 1.7) {
      const double s = sigma_m(rp(mu, 1.0, 0.3, m)).value;
      CHECK(s < prev);
      prev = s;
    }
    const double m = 5.0 * kappa;
    std::vector<double> v;
    for (int k = 1; k < 2000; ++k) v.push_back(sigma_m(rp(mu, 1.0, 2.0 * k / 2000.0, m)).value);
    std::size_t turns = 0;
    for (std::size_t k = 2; k < v.size(); ++k) {
      if ((v[k - 1] - v[k - 2]) < 0.0 && (v[k] - v[k - 1]) >= 0.0) ++turns;
      CHECK_FALSE(((v[k - 1] - v[k - 2]) > 0.0 && (v[k] - v[k - 1]) < 0.0));
    }
    CHECK(turns == 1);
  }
}

TEST_CASE("property: sigma_m below alpha_m on the grid") {
  for (double kappa : {10.0, 100.0, 1000.0}) {
    for (int i = 0; i < 100; ++i) {
      const double eta = (i + 0.5) / 100.0 * 0.25;
      for (int j = 0; j < 100; ++j) {
        const double m = 10.0 * std::pow(1e4, j / 99.0);
        CHECK(sigma_m(rp(1.0 / kappa, 1.0, eta, m)).value <
              alpha_m_svrg(rp(1.0 / kappa, 1.0, eta, m)).value);
      }
    }
  }
}

TEST_CASE("best_rate_curves") {
  const std::vector<double> grid{1e3, 1e4, 1e5, 1e6, 1e7};
  const auto rows = best_rate_curves(1e-6, 1.0, grid);
  REQUIRE(rows.size() == grid.size());
  std::size_t feasible = 0;
  for (const auto& r : rows) {
    CHECK(r.sarah_convergent == (r.rate_sarah < 1.0));
    CHECK(r.svrg_convergent == (r.rate_svrg < 1.0));
    CHECK(r.eta_sarah > r.eta_svrg);
    CHECK(r.rate_sarah < r.rate_svrg);
    feasible += r.feasible();
  }
  CHECK(feasible == 1);
  CHECK_FALSE(rows.back().both_convergent());
  CHECK(best_rate_curves(1e-6, 1.0, std::vector<double>{1e6}).size() == 1);
  CHECK_THROWS_AS(best_rate_curves(1e-6, 1.0, std::vector<double>{}), InvalidArgument);
}

TEST_CASE("closed-form SARAH step agrees with golden-section search") {
  const double mu = 1e-3, L = 1.0;
  for (double m : {3e3, 1e4, 1e5}) {
    const auto row = best_rate_curves(mu, L, std::vector<double>{m}).front();
    REQUIRE(row.sarah_closed_form);
    const double eta = golden_section_minimize(
        [&](double e) { return sigma_m(rp(mu, L, e, m)).value; }, 1e-9, 1.0 - 1e-9, 1e-12);
    CHECK(std::abs(sigma_m(rp(mu, L, eta, m)).value - row.rate_sarah) <= 1e-8);
  }
}

TEST_CASE("golden_section_minimize finds a parabola vertex") {
  const double x = golden_section_minimize([](double t) { return (t - 0.3) * (t - 0.3); },
                                           0.0, 1.0, 1e-12);
  CHECK(std::abs(x - 0.3) <= 1e-9);
}

TEST_CASE("evaluators are pure") {
  const auto a = sigma_m(rp(0.01, 1.0, 0.37, 123));
  const auto b = sigma_m(rp(0.01, 1.0, 0.37, 123));
  CHECK(std::memcmp(&a.value, &b.value, sizeof(double)) == 0);
}
