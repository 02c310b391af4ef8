#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace sarah {

/// Parameters shared by the closed-form rate calculators.
struct RateParams {
  double mu = 0.0;   ///< strong-convexity modulus, > 0
  double L = 0.0;    ///< smoothness, >= mu
  double eta = 0.0;  ///< step size, > 0
  double m = 1.0;    ///< inner loop size, >= 1

  double kappa() const { return L / mu; }
  /// Throws DomainError unless 0 < mu <= L, eta > 0, m >= 1.
  void validate() const;
};

/// A contraction factor; rates >= 1 are returned, not thrown, with
/// convergent == false.
struct Rate {
  double value = 0.0;
  bool convergent = false;
};

/// SARAH outer-loop factor 1/(mu eta (m+1)) + eta L / (2 - eta L).
/// Requires 0 < eta < 2/L.
Rate sigma_m(const RateParams& rp);

/// SVRG outer-loop factor 1/(mu eta (1 - 2 L eta) m) + 2 eta L / (1 - 2 eta L).
/// Requires 0 < eta < 1/(2L).
Rate alpha_m_svrg(const RateParams& rp);

/// Step-size multiplier theta* = (sigma + 1 + sqrt(sigma + 1)) / (2 sigma)
/// (eta = 1/(theta L)) that minimizes m for a target sigma in (0, 1).
double optimal_theta(double sigma);

/// m* = (2 theta* - 1)^2 kappa / 2 - 1.
double optimal_m(double sigma, double kappa);

struct SingleLoopRate {
  double rate = 0.0;  ///< sqrt(2L / (m+1))
  double eta = 0.0;   ///< sqrt(2 / (L (m+1)))
};

/// Sublinear single-outer-loop rate for general convex problems; requires
/// m >= ceil(2L - 1).
SingleLoopRate single_loop_rate(double L, std::uint64_t m);

/// alpha = eta L / (2 - eta L) of the multi-loop convex bound.
double convex_alpha(double eta, double L);

/// Delta + alpha^s (g0_sq - Delta) with Delta = delta (1 + eta L / (2 (1 - eta L))).
/// Requires 0 < eta < 1/L.
double multi_loop_convex_bound(double delta, double eta, double L,
                               std::uint64_t s, double g0_sq);

struct IterationCount {
  std::uint64_t outer = 0;
  /// Set when eps >= g0_sq: the starting point already qualifies.
  bool already_accurate = false;
};

/// ceil(log(g0_sq / eps) / log(9/7)) outer iterations for the
/// eta = 1/(2L), m = 4.5 kappa schedule.
IterationCount iterations_needed(double g0_sq, double eps);

/// Per-step contraction of E||v_t||^2 when P is mu-strongly convex:
/// 1 - (2/(eta L) - 1) mu^2 eta^2. Requires 0 < eta < 2/L.
double inner_rate_strongly_convex_p(double mu, double L, double eta);

/// Per-step contraction when every f_i is mu-strongly convex:
/// 1 - 2 mu L eta / (mu + L). Requires 0 < eta <= 2/(mu + L); mu = 0 gives
/// the non-expansive factor 1.
double inner_rate_each_strongly_convex(double mu, double L, double eta);

/// eta L / (2 - eta L), the factor bounding E||grad P(w_t) - v_t||^2 by
/// E||v_0||^2 for convex components. Requires 0 < eta < 2/L.
double gap_bound_factor(double eta, double L);

struct RateCurveRow {
  double m = 0.0;
  double eta_sarah = 0.0;
  double rate_sarah = 0.0;
  bool sarah_convergent = false;
  bool sarah_closed_form = false;  ///< false when golden-section fallback ran
  double eta_svrg = 0.0;
  double rate_svrg = 0.0;
  bool svrg_convergent = false;

  /// At least one method has a best rate below 1.
  bool feasible() const { return sarah_convergent || svrg_convergent; }
  bool both_convergent() const { return sarah_convergent && svrg_convergent; }
};

/// Best SARAH rate over eta in (0, 1/L) and best SVRG rate over
/// eta in (0, 1/(4L)) for every m in the grid.
std::vector<RateCurveRow> best_rate_curves(double mu, double L,
                                           std::span<const double> m_grid);

/// Golden-section search for the minimizer of a unimodal f on [lo, hi].
double golden_section_minimize(const std::function<double(double)>& f,
                               double lo, double hi, double tol);

}  // namespace sarah
