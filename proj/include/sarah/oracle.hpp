#pragma once

// Exact expectations over every inner-loop index sequence of a tiny problem.
// Used to check the recursive-gradient identities and bounds with no sampling
// error.

#include <cstddef>
#include <string>
#include <vector>

#include "sarah/numkit.hpp"
#include "sarah/objectives.hpp"
#include "sarah/theory.hpp"

namespace sarah {

/// Sequences enumerated per call are capped at this count.
inline constexpr double kEnumerationLimit = 1e6;

/// Expectations over i_1..i_{m-1} uniform on [n]^{m-1}. Every per-t vector
/// has m entries, t = 0..m-1.
struct ExactExpectations {
  std::size_t n = 0;
  std::size_t m = 0;
  double eta = 0.0;

  std::vector<double> v_sq;         ///< E||v_t||^2
  std::vector<double> gap_sq;       ///< E||grad P(w_t) - v_t||^2
  std::vector<double> step_sq;      ///< E||v_t - v_{t-1}||^2 (0 at t = 0)
  std::vector<double> gradstep_sq;  ///< E||grad P(w_t) - grad P(w_{t-1})||^2
  std::vector<double> grad_sq;      ///< E||grad P(w_t)||^2
  std::vector<double> loss;         ///< E P(w_t)
  std::vector<DenseVector> v_mean;     ///< E v_t
  std::vector<DenseVector> grad_mean;  ///< E grad P(w_t)

  double final_grad_sq = 0.0;  ///< E||grad P(w_m)||^2
  double final_loss = 0.0;     ///< E P(w_m)
  /// E||grad P(w~)||^2 with w~ = w_t, t uniform on {0, ..., m}.
  double snapshot_grad_sq = 0.0;

  /// max over histories of ||E[v_t | i_1..i_{t-1}] - grad P(w_t)||, t >= 1.
  double max_conditional_bias = 0.0;
  std::size_t bias_t = 0;
  std::vector<std::size_t> bias_history;  ///< i_1..i_{t-1} attaining the max
};

/// SARAH recursion v_t = grad f_i(w_t) - grad f_i(w_{t-1}) + v_{t-1}.
/// Throws CombinatorialGuard when n^(m-1) > kEnumerationLimit and Error when
/// an iterate becomes non-finite.
ExactExpectations enumerate(const ProblemInstance& p, double eta,
                            std::size_t m, std::span<const double> w0);

/// Same enumeration with the SVRG estimator
/// v_t = grad f_i(w_t) - grad f_i(w_0) + v_0.
ExactExpectations svrg_enumerate(const ProblemInstance& p, double eta,
                                 std::size_t m, std::span<const double> w0);

struct IdentityReport {
  /// Relative deviation per t (0 at t = 0).
  std::vector<double> deviation;
  double max_rel_deviation = 0.0;
  bool passed = false;
};

/// E||grad P(w_t) - v_t||^2 == sum_{j<=t} E||v_j - v_{j-1}||^2
///                           - sum_{j<=t} E||grad P(w_j) - grad P(w_{j-1})||^2
IdentityReport check_gap_identity(const ExactExpectations& ex,
                                     double rel_tol = 1e-10);

enum class ConvexityRegime {
  P_STRONG,     ///< P mu-strongly convex, each f_i convex; eta < 2/L
  EACH_STRONG,  ///< each f_i mu-strongly convex; eta <= 2/(mu + L)
  CONVEX,       ///< each f_i convex; eta < 2/L
};

struct BoundCheck {
  std::string name;
  std::size_t t = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

struct BoundsReport {
  std::vector<BoundCheck> checks;
  std::size_t violations = 0;
  bool passed() const { return violations == 0; }
  /// Checks whose name starts with prefix.
  std::size_t count(const std::string& prefix) const;
};

/// Slack granted to every bound: lhs <= rhs + kBoundRelSlack * |rhs| +
/// kBoundAbsSlack * ||grad P(w_0)||^2.
inline constexpr double kBoundRelSlack = 1e-12;
inline constexpr double kBoundAbsSlack = 1e-15;

/// Asserts, from exact expectations, the regime's inner-loop contraction or
/// gap bound plus the summed descent inequality and (when eta <= 1/L) the
/// single-loop snapshot bound. rp.eta must equal ex.eta; rp.mu may be 0 for
/// CONVEX. p_star is min P. Throws DomainError when the regime's step-size
/// precondition fails.
BoundsReport check_inner_loop_bounds(const ExactExpectations& ex,
                                     const RateParams& rp,
                                     ConvexityRegime regime, double p_star);

/// E||grad P(w~_k)||^2 and E P(w~_k), k = 0..s, over index sequences and the
/// uniform snapshot draw of every outer loop.
struct OuterLoopExpectations {
  std::size_t m = 0;
  double eta = 0.0;
  std::vector<double> grad_sq;
  std::vector<double> loss;
};

/// Throws CombinatorialGuard when (n^(m-1) (m+1))^s > kEnumerationLimit.
OuterLoopExpectations enumerate_outer_loops(const ProblemInstance& p,
                                            double eta, std::size_t m,
                                            std::span<const double> w0,
                                            std::size_t s);

/// Multi-loop convex bound for every k = 1..s and, when sigma_m < 1 and
/// rp.mu > 0, the linear bound E||grad P(w~_k)||^2 <= sigma_m^k ||grad P(w~_0)||^2.
BoundsReport check_outer_loop_bounds(const OuterLoopExpectations& ex,
                                     const RateParams& rp, double p_star);

}  // namespace sarah
