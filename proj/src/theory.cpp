#include "sarah/theory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sarah/errors.hpp"

namespace sarah {

namespace {

// Open-interval margins and search tolerance, both relative to 1/L.
constexpr double kDomainMargin = 1e-9;
constexpr double kSearchTol = 1e-12;

void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

}  // namespace

void RateParams::validate() const {
  require(mu > 0.0 && std::isfinite(mu), "mu must be > 0");
  require(L >= mu && std::isfinite(L), "L must satisfy L >= mu");
  require(eta > 0.0 && std::isfinite(eta), "eta must be > 0");
  require(m >= 1.0, "m must be >= 1");
}

Rate sigma_m(const RateParams& rp) {
  rp.validate();
  require(rp.eta < 2.0 / rp.L, "sigma_m needs eta < 2/L");
  const double x = rp.eta * rp.L;
  const double value = 1.0 / (rp.mu * rp.eta * (rp.m + 1.0)) + x / (2.0 - x);
  return {value, value < 1.0};
}

Rate alpha_m_svrg(const RateParams& rp) {
  rp.validate();
  require(rp.eta < 1.0 / (2.0 * rp.L), "alpha_m needs eta < 1/(2L)");
  const double x = rp.eta * rp.L;
  const double value = 1.0 / (rp.mu * rp.eta * (1.0 - 2.0 * x) * rp.m) +
                       2.0 * x / (1.0 - 2.0 * x);
  return {value, value < 1.0};
}

double optimal_theta(double sigma) {
  require(sigma > 0.0 && sigma < 1.0, "optimal_theta needs sigma in (0, 1)");
  return (sigma + 1.0 + std::sqrt(sigma + 1.0)) / (2.0 * sigma);
}

double optimal_m(double sigma, double kappa) {
  require(kappa >= 1.0, "optimal_m needs kappa >= 1");
  const double k = 2.0 * optimal_theta(sigma) - 1.0;
  return 0.5 * k * k * kappa - 1.0;
}

SingleLoopRate single_loop_rate(double L, std::uint64_t m) {
  require(L > 0.0, "single_loop_rate needs L > 0");
  require(static_cast<double>(m) >= std::ceil(2.0 * L - 1.0),
          "single_loop_rate needs m >= 2L - 1");
  const double m1 = static_cast<double>(m) + 1.0;
  return {std::sqrt(2.0 * L / m1), std::sqrt(2.0 / (L * m1))};
}

double convex_alpha(double eta, double L) {
  require(L > 0.0 && eta > 0.0 && eta < 1.0 / L,
          "multi-loop convex bound needs 0 < eta < 1/L");
  const double x = eta * L;
  return x / (2.0 - x);
}

double multi_loop_convex_bound(double delta, double eta, double L,
                               std::uint64_t s, double g0_sq) {
  require(delta >= 0.0, "delta must be >= 0");
  const double alpha = convex_alpha(eta, L);
  const double x = eta * L;
  const double big_delta = delta * (1.0 + x / (2.0 * (1.0 - x)));
  const double a_s = std::pow(alpha, static_cast<double>(s));
  // Written as a convex combination so s = 0 returns g0_sq exactly.
  return a_s * g0_sq + (1.0 - a_s) * big_delta;
}

IterationCount iterations_needed(double g0_sq, double eps) {
  require(g0_sq > 0.0 && eps > 0.0, "iterations_needed needs positive inputs");
  if (eps >= g0_sq) return {0, true};
  const double x = std::log(g0_sq / eps) / std::log(9.0 / 7.0);
  // Snap values within rounding of an integer before taking the ceiling.
  const double nearest = std::round(x);
  const double count =
      std::abs(x - nearest) <= 1e-9 * std::max(1.0, x) ? nearest : std::ceil(x);
  return {static_cast<std::uint64_t>(count), false};
}

double inner_rate_strongly_convex_p(double mu, double L, double eta) {
  require(mu > 0.0 && L >= mu, "needs 0 < mu <= L");
  require(eta > 0.0 && eta < 2.0 / L, "needs 0 < eta < 2/L");
  return 1.0 - (2.0 / (eta * L) - 1.0) * mu * mu * eta * eta;
}

double inner_rate_each_strongly_convex(double mu, double L, double eta) {
  require(mu >= 0.0 && L > 0.0 && L >= mu, "needs 0 <= mu <= L, L > 0");
  require(eta > 0.0 && eta <= 2.0 / (mu + L), "needs 0 < eta <= 2/(mu + L)");
  return 1.0 - 2.0 * mu * L * eta / (mu + L);
}

double gap_bound_factor(double eta, double L) {
  require(L > 0.0 && eta > 0.0 && eta < 2.0 / L, "needs 0 < eta < 2/L");
  const double x = eta * L;
  return x / (2.0 - x);
}

double golden_section_minimize(const std::function<double(double)>& f,
                               double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

std::vector<RateCurveRow> best_rate_curves(double mu, double L,
                                           std::span<const double> m_grid) {
  if (m_grid.empty()) throw InvalidArgument("rate sweep needs a non-empty grid");
  require(mu > 0.0 && mu < L, "rate sweep needs 0 < mu < L");
  const double kappa = L / mu;
  const double margin = kDomainMargin / L;
  const double tol = kSearchTol / L;

  std::vector<RateCurveRow> rows;
  rows.reserve(m_grid.size());
  for (double m : m_grid) {
    RateCurveRow row;
    row.m = m;
    RateParams rp{mu, L, 0.0, m};

    // With eta = 1/(theta L), sigma = kappa theta / (m+1) + 1/(2 theta - 1)
    // is stationary at (2 theta - 1)^2 = 2 (m+1) / kappa; admissible when
    // that theta exceeds 1, i.e. eta < 1/L.
    const double r = 2.0 * (m + 1.0) / kappa;
    if (r > 1.0) {
      const double theta = 0.5 * (1.0 + std::sqrt(r));
      row.eta_sarah = 1.0 / (theta * L);
      row.sarah_closed_form = true;
    } else {
      row.eta_sarah = golden_section_minimize(
          [&](double eta) {
            rp.eta = eta;
            return sigma_m(rp).value;
          },
          margin, 1.0 / L - margin, tol);
    }
    rp.eta = row.eta_sarah;
    const Rate s = sigma_m(rp);
    row.rate_sarah = s.value;
    row.sarah_convergent = s.convergent;

    row.eta_svrg = golden_section_minimize(
        [&](double eta) {
          rp.eta = eta;
          return alpha_m_svrg(rp).value;
        },
        margin, 1.0 / (4.0 * L) - margin, tol);
    rp.eta = row.eta_svrg;
    const Rate a = alpha_m_svrg(rp);
    row.rate_svrg = a.value;
    row.svrg_convergent = a.convergent;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace sarah
