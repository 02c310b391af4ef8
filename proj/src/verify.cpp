#include "sarah/verify.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "sarah/config.hpp"
#include "sarah/errors.hpp"
#include "sarah/harness.hpp"
#include "sarah/oracle.hpp"
#include "sarah/random.hpp"
#include "sarah/theory.hpp"

namespace sarah {

namespace {

DenseVector gaussian(CounterRng& rng, std::size_t d) {
  DenseVector v(d);
  for (auto& x : v) x = rng.normal();
  return v;
}

void add(VerifyReport& r, std::string suite, std::string instance, double value,
         double threshold, bool passed) {
  r.checks.push_back({std::move(suite), std::move(instance), value, threshold, passed});
}

double distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(dist_sq(a, b));
}

std::vector<SmallInstance> instances(const VerifyOptions& o, std::uint64_t salt) {
  std::vector<SmallInstance> out;
  for (std::size_t k = 0; k < o.instances; ++k) {
    const std::uint64_t seed = splitmix64_mix(o.seed + salt * 1000003 + k);
    out.push_back(small_quadratic(o.n, o.d, seed));
    out.push_back(small_logistic(o.n, o.d, seed));
  }
  return out;
}

void identity_and_bias(const VerifyOptions& o, VerifyReport& r) {
  CounterRng rng(o.seed, 11);
  double worst_bias = 0.0;
  for (const auto& inst : instances(o, 1)) {
    const double L = inst.problem.smoothness().L;
    const double eta = (0.1 + 1.8 * rng.uniform01()) / L;
    const auto ex = enumerate(inst.problem, eta, o.m, inst.w0);
    const auto id = check_gap_identity(ex);
    add(r, "gap_identity", inst.label, id.max_rel_deviation, 1e-10,
        id.max_rel_deviation <= 1e-10);
    double worst = 0.0;
    bool ok = true;
    for (std::size_t t = 0; t < ex.m; ++t) {
      const double dev = distance(ex.v_mean[t], ex.grad_mean[t]);
      const double scale = 1.0 + std::sqrt(norm_sq(ex.grad_mean[t]));
      worst = std::max(worst, dev / scale);
      ok = ok && dev <= 1e-12 * scale;
    }
    add(r, "total_unbiasedness", inst.label, worst, 1e-12, ok);
    worst_bias = std::max(worst_bias, ex.max_conditional_bias);
  }
  add(r, "conditional_bias_exists", "all", worst_bias, 1e-6, worst_bias > 1e-6);
}

void inner_bounds(const VerifyOptions& o, VerifyReport& r) {
  CounterRng rng(o.seed, 12);
  for (const auto& inst : instances(o, 2)) {
    const auto s = inst.problem.smoothness();
    const double L = s.L;
    double mu_each = inst.problem.lambda();
    if (inst.problem.kind() == ObjectiveKind::QuadraticSum) {
      mu_each = inst.problem.component_min_eigenvalue(0);
      for (std::size_t i = 1; i < inst.problem.n(); ++i) {
        mu_each = std::min(mu_each, inst.problem.component_min_eigenvalue(i));
      }
    }
    struct Case {
      ConvexityRegime regime;
      double mu;
      double eta;
      const char* name;
    };
    const Case cases[] = {
        {ConvexityRegime::P_STRONG, s.mu, (0.05 + 1.9 * rng.uniform01()) / L,
         "inner_bounds_strong_p"},
        {ConvexityRegime::EACH_STRONG, mu_each, 2.0 / (mu_each + L),
         "inner_bounds_each_strong"},
        {ConvexityRegime::CONVEX, 0.0, (0.05 + 1.9 * rng.uniform01()) / L,
         "inner_bounds_convex"},
    };
    for (const auto& c : cases) {
      const auto ex = enumerate(inst.problem, c.eta, o.m, inst.w0);
      RateParams rp{c.mu, L, c.eta, static_cast<double>(o.m)};
      const auto rep = check_inner_loop_bounds(ex, rp, c.regime, inst.p_star);
      double worst = 0.0;
      for (const auto& chk : rep.checks) {
        worst = std::max(worst, chk.lhs - chk.rhs);
      }
      add(r, c.name, inst.label, worst, 0.0, rep.passed() && !rep.checks.empty());
    }
  }
}

void outer_bounds(const VerifyOptions& o, VerifyReport& r) {
  CounterRng rng(o.seed, 13);
  const std::size_t count = std::max<std::size_t>(1, o.instances / 5);
  VerifyOptions small = o;
  small.instances = count;
  for (const auto& inst : instances(small, 3)) {
    const auto s = inst.problem.smoothness();
    const double eta = (0.05 + 0.9 * rng.uniform01()) / s.L;
    const auto ex = enumerate_outer_loops(inst.problem, eta, 3, inst.w0, 2);
    RateParams rp{s.mu, s.L, eta, 3.0};
    const auto rep = check_outer_loop_bounds(ex, rp, inst.p_star);
    double worst = 0.0;
    for (const auto& chk : rep.checks) worst = std::max(worst, chk.lhs - chk.rhs);
    add(r, "outer_loop_bounds", inst.label, worst, 0.0,
        rep.passed() && !rep.checks.empty());
  }
}

void rate_formulas(VerifyReport& r) {
  std::size_t violations = 0;
  for (double kappa : {10.0, 100.0, 1000.0}) {
    const double L = 1.0, mu = 1.0 / kappa;
    for (int i = 0; i < 100; ++i) {
      const double eta = (i + 0.5) / 100.0 / (4.0 * L);
      for (int j = 0; j < 100; ++j) {
        const double m = 10.0 * std::pow(1e4, j / 99.0);
        const RateParams rp{mu, L, eta, m};
        if (!(sigma_m(rp).value < alpha_m_svrg(rp).value)) ++violations;
      }
    }
  }
  add(r, "sarah_factor_below_svrg", "grid", static_cast<double>(violations), 0.0,
      violations == 0);

  double worst = 0.0;
  for (double kappa : {10.0, 100.0, 1000.0, 1e6}) {
    const RateParams rp{1.0 / kappa, 1.0, 0.5, std::ceil(4.5 * kappa)};
    worst = std::max(worst, sigma_m(rp).value);
  }
  add(r, "half_step_factor_below_7_9", "kappa", worst, 7.0 / 9.0, worst < 7.0 / 9.0);

  const auto iters = iterations_needed(1.0, std::pow(7.0 / 9.0, 3.0));
  add(r, "iterations_needed", "(7/9)^3", static_cast<double>(iters.outer), 3.0,
      iters.outer == 3);
  const double theta = optimal_theta(7.0 / 9.0);
  add(r, "optimal_theta", "7/9", theta, 2.0, std::abs(theta - 2.0) <= 1e-12);
}

}  // namespace

SmallInstance small_quadratic(std::size_t n, std::size_t d, std::uint64_t seed,
                              double floor) {
  CounterRng rng(seed);
  std::vector<DenseVector> hessians, centers;
  for (std::size_t i = 0; i < n; ++i) {
    const DenseVector b = gaussian(rng, d * d);
    DenseVector a(d * d, 0.0);
    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = 0; q < d; ++q) {
        double acc = 0.0;
        for (std::size_t k = 0; k < d; ++k) acc += b[p * d + k] * b[q * d + k];
        a[p * d + q] = acc / static_cast<double>(d);
      }
      a[p * d + p] += floor;
    }
    hessians.push_back(std::move(a));
    centers.push_back(gaussian(rng, d));
  }
  auto problem = ProblemInstance::quadratic_sum(std::move(hessians), std::move(centers));
  DenseVector w0 = gaussian(rng, d);
  const double p_star = problem.loss(quadratic_minimizer(problem));
  return {std::move(problem), std::move(w0), p_star,
          "quadratic#" + std::to_string(seed)};
}

SmallInstance small_logistic(std::size_t n, std::size_t d, std::uint64_t seed,
                             double lambda) {
  CounterRng rng(seed);
  CsrMatrix x(d);
  std::vector<std::uint32_t> idx(d);
  for (std::size_t j = 0; j < d; ++j) idx[j] = static_cast<std::uint32_t>(j);
  std::vector<double> labels;
  for (std::size_t i = 0; i < n; ++i) {
    x.append_row(idx, gaussian(rng, d));
    labels.push_back(rng.uniform01() < 0.5 ? -1.0 : 1.0);
  }
  auto problem = ProblemInstance::logistic(std::move(x), std::move(labels), lambda);
  DenseVector w0 = gaussian(rng, d);
  ReferenceOptions ref;
  ref.tol = 1e-13;
  const double p_star = compute_reference(problem, ref).p_star;
  return {std::move(problem), std::move(w0), p_star,
          "logistic#" + std::to_string(seed)};
}

std::size_t VerifyReport::failures() const {
  return static_cast<std::size_t>(std::count_if(
      checks.begin(), checks.end(), [](const VerifyCheck& c) { return !c.passed; }));
}

VerifyReport run_verification(const VerifyOptions& opts) {
  if (opts.instances < 1 || opts.n < 1 || opts.m < 1 || opts.d < 1) {
    throw InvalidArgument("verification needs instances, n, m, d >= 1");
  }
  VerifyReport report;
  identity_and_bias(opts, report);
  inner_bounds(opts, report);
  outer_bounds(opts, report);
  rate_formulas(report);
  return report;
}

void write_verify_csv(const VerifyReport& report, std::ostream& out) {
  out << "suite,instance,value,threshold,passed\n";
  for (const auto& c : report.checks) {
    out << c.suite << ',' << c.instance << ',' << format_number(c.value) << ','
        << format_number(c.threshold) << ',' << (c.passed ? "pass" : "FAIL") << '\n';
  }
}

}  // namespace sarah
