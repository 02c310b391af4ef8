#include "sarah/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "sarah/errors.hpp"

namespace sarah {

namespace {

enum class Estimator { Recursive, Svrg };

double checked_power(std::size_t base, std::size_t exponent, double limit,
                     const char* what) {
  double count = 1.0;
  for (std::size_t k = 0; k < exponent; ++k) {
    count *= static_cast<double>(base);
    if (count > limit) {
      throw CombinatorialGuard(std::string(what) + " exceeds " +
                               std::to_string(static_cast<long long>(limit)) +
                               " sequences");
    }
  }
  return count;
}

void add_into(std::span<double> acc, std::span<const double> x) {
  for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += x[j];
}

class Enumerator {
 public:
  Enumerator(const ProblemInstance& p, double eta, std::size_t m,
             std::span<const double> w0, Estimator estimator)
      : p_(p), eta_(eta), m_(m), d_(p.d()), estimator_(estimator),
        w0_(w0.begin(), w0.end()) {
    if (m < 1) throw InvalidArgument("enumeration needs m >= 1");
    if (!(eta > 0.0)) throw InvalidArgument("enumeration needs eta > 0");
    if (w0.size() != p.d()) throw DimensionMismatch("w0 dimension mismatch");
    checked_power(p.n(), m - 1, kEnumerationLimit, "enumeration");
  }

  ExactExpectations run() {
    ex_.n = p_.n();
    ex_.m = m_;
    ex_.eta = eta_;
    for (auto* v : {&ex_.v_sq, &ex_.gap_sq, &ex_.step_sq, &ex_.gradstep_sq,
                    &ex_.grad_sq, &ex_.loss}) {
      v->assign(m_, 0.0);
    }
    ex_.v_mean.assign(m_, DenseVector(d_, 0.0));
    ex_.grad_mean.assign(m_, DenseVector(d_, 0.0));

    const DenseVector g0 = p_.full_grad(w0_);
    v0_ = g0;
    ex_.v_sq[0] = norm_sq(v0_);
    ex_.grad_sq[0] = norm_sq(g0);
    ex_.loss[0] = p_.loss(w0_);
    ex_.v_mean[0] = v0_;
    ex_.grad_mean[0] = g0;

    DenseVector w1 = w0_;
    axpy(-eta_, v0_, w1);
    ensure_finite(w1);
    visit(1, w0_, w1, v0_, g0);

    // Level t holds n^t equally weighted terms; the final level n^(m-1).
    const double n = static_cast<double>(p_.n());
    double weight = 1.0;
    for (std::size_t t = 1; t < m_; ++t) {
      weight *= n;
      for (auto* v : {&ex_.v_sq, &ex_.gap_sq, &ex_.step_sq, &ex_.gradstep_sq,
                      &ex_.grad_sq, &ex_.loss}) {
        (*v)[t] /= weight;
      }
      for (auto& x : ex_.v_mean[t]) x /= weight;
      for (auto& x : ex_.grad_mean[t]) x /= weight;
    }
    ex_.final_grad_sq /= weight;
    ex_.final_loss /= weight;

    double total = ex_.final_grad_sq;
    for (double g : ex_.grad_sq) total += g;
    ex_.snapshot_grad_sq = total / (static_cast<double>(m_) + 1.0);
    return ex_;
  }

 private:
  void ensure_finite(std::span<const double> w) const {
    if (!all_finite(w)) throw Error("enumeration produced a non-finite iterate");
  }

  // State at depth t: w_prev = w_{t-1}, w = w_t, v_prev = v_{t-1},
  // grad_prev = grad P(w_{t-1}).
  void visit(std::size_t t, const DenseVector& w_prev, const DenseVector& w,
             const DenseVector& v_prev, const DenseVector& grad_prev) {
    const DenseVector grad = p_.full_grad(w);
    const double g_sq = norm_sq(grad);
    const double loss = p_.loss(w);
    if (t == m_) {
      ex_.final_grad_sq += g_sq;
      ex_.final_loss += loss;
      return;
    }
    const double grad_step = dist_sq(grad, grad_prev);
    const std::size_t n = p_.n();
    DenseVector v(d_), g_new(d_), g_old(d_), w_next(d_);
    DenseVector cond_mean(d_, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      p_.component_grad(i, w, g_new);
      if (estimator_ == Estimator::Recursive) {
        p_.component_grad(i, w_prev, g_old);
        for (std::size_t j = 0; j < d_; ++j) v[j] = g_new[j] - g_old[j] + v_prev[j];
      } else {
        p_.component_grad(i, w0_, g_old);
        for (std::size_t j = 0; j < d_; ++j) v[j] = g_new[j] - g_old[j] + v0_[j];
      }
      ex_.v_sq[t] += norm_sq(v);
      ex_.gap_sq[t] += dist_sq(grad, v);
      ex_.step_sq[t] += dist_sq(v, v_prev);
      ex_.gradstep_sq[t] += grad_step;
      ex_.grad_sq[t] += g_sq;
      ex_.loss[t] += loss;
      add_into(ex_.v_mean[t], v);
      add_into(ex_.grad_mean[t], grad);
      add_into(cond_mean, v);

      w_next = w;
      axpy(-eta_, v, w_next);
      ensure_finite(w_next);
      history_.push_back(i);
      visit(t + 1, w, w_next, v, grad);
      history_.pop_back();
    }
    for (auto& x : cond_mean) x /= static_cast<double>(n);
    const double bias = std::sqrt(dist_sq(cond_mean, grad));
    if (bias > ex_.max_conditional_bias) {
      ex_.max_conditional_bias = bias;
      ex_.bias_t = t;
      ex_.bias_history = history_;
    }
  }

  const ProblemInstance& p_;
  double eta_;
  std::size_t m_;
  std::size_t d_;
  Estimator estimator_;
  DenseVector w0_;
  DenseVector v0_;
  std::vector<std::size_t> history_;
  ExactExpectations ex_;
};

// Appends w_0..w_m of every index sequence of one SARAH inner loop.
void collect_inner_points(const ProblemInstance& p, double eta, std::size_t m,
                          const DenseVector& w0, std::vector<DenseVector>& out) {
  const std::size_t d = p.d();
  std::vector<DenseVector> path;
  path.reserve(m + 1);
  path.push_back(w0);
  DenseVector v = p.full_grad(w0);
  DenseVector w1 = w0;
  axpy(-eta, v, w1);
  path.push_back(w1);

  DenseVector g_new(d), g_old(d);
  auto recurse = [&](auto&& self, const DenseVector& v_prev) -> void {
    const std::size_t t = path.size() - 1;
    if (t == m) {
      out.insert(out.end(), path.begin(), path.end());
      return;
    }
    for (std::size_t i = 0; i < p.n(); ++i) {
      DenseVector vt(d);
      p.component_grad(i, path[t], g_new);
      p.component_grad(i, path[t - 1], g_old);
      for (std::size_t j = 0; j < d; ++j) vt[j] = g_new[j] - g_old[j] + v_prev[j];
      DenseVector next = path[t];
      axpy(-eta, vt, next);
      if (!all_finite(next)) throw Error("enumeration produced a non-finite iterate");
      path.push_back(std::move(next));
      self(self, vt);
      path.pop_back();
    }
  };
  recurse(recurse, v);
}

bool within(double lhs, double rhs, double scale) {
  return lhs <= rhs + kBoundRelSlack * std::abs(rhs) + kBoundAbsSlack * scale;
}

void add_check(BoundsReport& report, std::string name, std::size_t t,
               double lhs, double rhs, double scale) {
  BoundCheck c{std::move(name), t, lhs, rhs, within(lhs, rhs, scale)};
  if (!c.holds) ++report.violations;
  report.checks.push_back(std::move(c));
}

}  // namespace

ExactExpectations enumerate(const ProblemInstance& p, double eta,
                            std::size_t m, std::span<const double> w0) {
  return Enumerator(p, eta, m, w0, Estimator::Recursive).run();
}

ExactExpectations svrg_enumerate(const ProblemInstance& p, double eta,
                                 std::size_t m, std::span<const double> w0) {
  return Enumerator(p, eta, m, w0, Estimator::Svrg).run();
}

IdentityReport check_gap_identity(const ExactExpectations& ex,
                                     double rel_tol) {
  IdentityReport report;
  report.deviation.assign(ex.m, 0.0);
  double sum_step = 0.0;
  double sum_gradstep = 0.0;
  for (std::size_t t = 1; t < ex.m; ++t) {
    sum_step += ex.step_sq[t];
    sum_gradstep += ex.gradstep_sq[t];
    const double rhs = sum_step - sum_gradstep;
    const double scale = std::max({std::abs(ex.gap_sq[t]), sum_step, sum_gradstep});
    const double diff = std::abs(ex.gap_sq[t] - rhs);
    report.deviation[t] = scale > 0.0 ? diff / scale : diff;
    report.max_rel_deviation = std::max(report.max_rel_deviation, report.deviation[t]);
  }
  report.passed = report.max_rel_deviation <= rel_tol;
  return report;
}

std::size_t BoundsReport::count(const std::string& prefix) const {
  return static_cast<std::size_t>(std::count_if(
      checks.begin(), checks.end(),
      [&](const BoundCheck& c) { return c.name.rfind(prefix, 0) == 0; }));
}

BoundsReport check_inner_loop_bounds(const ExactExpectations& ex,
                                     const RateParams& rp,
                                     ConvexityRegime regime, double p_star) {
  if (rp.eta != ex.eta) {
    throw InvalidArgument("rate parameters use a different eta than the enumeration");
  }
  const double eta = rp.eta;
  const double L = rp.L;
  const double mu = rp.mu;
  if (!(L > 0.0) || !(eta > 0.0)) throw DomainError("needs L > 0 and eta > 0");

  BoundsReport report;
  const double g0_sq = ex.grad_sq[0];
  const double v0_sq = ex.v_sq[0];

  switch (regime) {
    case ConvexityRegime::P_STRONG: {
      const double rho = inner_rate_strongly_convex_p(mu, L, eta);
      for (std::size_t t = 1; t < ex.m; ++t) {
        add_check(report, "strong_p_contraction", t, ex.v_sq[t],
                  std::pow(rho, static_cast<double>(t)) * g0_sq, g0_sq);
      }
      break;
    }
    case ConvexityRegime::EACH_STRONG: {
      const double rho = inner_rate_each_strongly_convex(mu, L, eta);
      for (std::size_t t = 1; t < ex.m; ++t) {
        add_check(report, "each_strong_contraction", t, ex.v_sq[t],
                  std::pow(rho, static_cast<double>(t)) * g0_sq, g0_sq);
      }
      break;
    }
    case ConvexityRegime::CONVEX: {
      const double factor = gap_bound_factor(eta, L);
      for (std::size_t t = 1; t < ex.m; ++t) {
        add_check(report, "gap_bound", t, ex.gap_sq[t], factor * v0_sq, g0_sq);
        add_check(report, "gap_bound_sharp", t, ex.gap_sq[t],
                  factor * (v0_sq - ex.v_sq[t]), g0_sq);
      }
      break;
    }
  }

  // Summed descent inequality over t = 0..m-1 (needs only smoothness).
  double sum_grad = 0.0, sum_gap = 0.0, sum_v = 0.0;
  for (std::size_t t = 0; t < ex.m; ++t) {
    sum_grad += ex.grad_sq[t];
    sum_gap += ex.gap_sq[t];
    sum_v += ex.v_sq[t];
  }
  const double gap0 = ex.loss[0] - p_star;
  add_check(report, "descent_sum", ex.m - 1, sum_grad,
            2.0 / eta * gap0 + sum_gap - (1.0 - L * eta) * sum_v, g0_sq);

  if (eta <= 1.0 / L) {
    const double m1 = static_cast<double>(ex.m) + 1.0;
    add_check(report, "snapshot_bound", ex.m, ex.snapshot_grad_sq,
              2.0 / (eta * m1) * gap0 + eta * L / (2.0 - eta * L) * g0_sq,
              g0_sq);
  }
  return report;
}

OuterLoopExpectations enumerate_outer_loops(const ProblemInstance& p,
                                            double eta, std::size_t m,
                                            std::span<const double> w0,
                                            std::size_t s) {
  if (m < 1) throw InvalidArgument("enumeration needs m >= 1");
  if (w0.size() != p.d()) throw DimensionMismatch("w0 dimension mismatch");
  const double per_loop =
      checked_power(p.n(), m - 1, kEnumerationLimit, "outer enumeration") *
      (static_cast<double>(m) + 1.0);
  checked_power(static_cast<std::size_t>(per_loop), s, kEnumerationLimit,
                "outer enumeration");

  OuterLoopExpectations ex;
  ex.m = m;
  ex.eta = eta;
  // Every support point carries the same weight, so expectations are means.
  std::vector<DenseVector> support{DenseVector(w0.begin(), w0.end())};
  auto summarize = [&] {
    double g = 0.0, f = 0.0;
    for (const auto& w : support) {
      g += norm_sq(p.full_grad(w));
      f += p.loss(w);
    }
    const double count = static_cast<double>(support.size());
    ex.grad_sq.push_back(g / count);
    ex.loss.push_back(f / count);
  };
  summarize();
  for (std::size_t k = 1; k <= s; ++k) {
    std::vector<DenseVector> next;
    next.reserve(support.size() * static_cast<std::size_t>(per_loop));
    for (const auto& w : support) collect_inner_points(p, eta, m, w, next);
    support = std::move(next);
    summarize();
  }
  return ex;
}

BoundsReport check_outer_loop_bounds(const OuterLoopExpectations& ex,
                                     const RateParams& rp, double p_star) {
  if (rp.eta != ex.eta) {
    throw InvalidArgument("rate parameters use a different eta than the enumeration");
  }
  BoundsReport report;
  const double g0_sq = ex.grad_sq[0];
  const double eta = rp.eta;
  const double L = rp.L;
  const double m1 = static_cast<double>(ex.m) + 1.0;
  const std::size_t s = ex.grad_sq.size() - 1;

  if (eta < 1.0 / L) {
    double delta = 0.0;
    for (std::size_t k = 1; k <= s; ++k) {
      delta = std::max(delta, 2.0 / (eta * m1) * (ex.loss[k - 1] - p_star));
      add_check(report, "multi_loop_convex", k, ex.grad_sq[k],
                multi_loop_convex_bound(delta, eta, L, k, g0_sq), g0_sq);
    }
  }
  if (rp.mu > 0.0 && eta <= 1.0 / L) {
    RateParams q = rp;
    q.m = static_cast<double>(ex.m);
    const Rate sigma = sigma_m(q);
    if (sigma.convergent) {
      for (std::size_t k = 1; k <= s; ++k) {
        add_check(report, "strongly_convex_linear", k, ex.grad_sq[k],
                  std::pow(sigma.value, static_cast<double>(k)) * g0_sq, g0_sq);
      }
    }
  }
  return report;
}

}  // namespace sarah
