#include "sarah/optimizers.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "sarah/random.hpp"

namespace sarah {

namespace {

// Stream ids for CounterRng; index draws never depend on the snapshot rule.
constexpr std::uint64_t kIndexStream = 0;
constexpr std::uint64_t kSnapshotStream = 1;

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

// Owns cost accounting and trace emission for one run.
class Recorder {
 public:
  Recorder(const ProblemInstance& p, const SolverConfig& cfg,
           const TraceOptions& opts, RunResult& result)
      : p_(p), cfg_(cfg), opts_(opts), result_(result),
        n_(static_cast<double>(p.n())),
        step_(opts.records_per_pass > 0.0 ? 1.0 / opts.records_per_pass : 0.0),
        next_mark_(step_) {}

  void charge(std::uint64_t evals) { result_.total_component_evals += evals; }
  double passes() const {
    return static_cast<double>(result_.total_component_evals) / n_;
  }
  bool exhausted() const {
    return static_cast<double>(result_.total_component_evals) >=
           cfg_.budget_passes * n_;
  }
  std::uint64_t completed_passes() const {
    return result_.total_component_evals / p_.n();
  }

  void record(TraceEvent event, std::span<const double> w,
              std::optional<double> grad_norm_sq,
              std::optional<double> vt_norm_sq) {
    TraceRecord rec;
    rec.effective_passes = passes();
    rec.event = event;
    rec.grad_norm_sq = grad_norm_sq;
    rec.vt_norm_sq = vt_norm_sq;
    if (opts_.record_loss) {
      rec.loss = p_.loss(w);
      if (!std::isfinite(rec.loss)) fail("loss became non-finite", w);
    } else {
      rec.loss = std::nan("");
    }
    if (opts_.test_error) rec.test_error = opts_.test_error(w);
    result_.trace.push_back(rec);
    while (step_ > 0.0 && next_mark_ <= rec.effective_passes) {
      next_mark_ += step_;
    }
  }

  void maybe_record_inner(std::span<const double> w, double vt_norm_sq) {
    if (step_ > 0.0 && passes() >= next_mark_) {
      record(TraceEvent::INNER_STEP, w, std::nullopt, vt_norm_sq);
    }
  }

  void check(std::span<const double> w, std::span<const double> v = {}) {
    if (!all_finite(w)) fail("iterate became non-finite", w);
    if (!all_finite(v)) fail("search direction became non-finite", w);
  }

  [[noreturn]] void fail(const std::string& what, std::span<const double> w) {
    RunResult partial = result_;
    partial.final_w.assign(w.begin(), w.end());
    throw Diverged(std::string(to_string(cfg_.algorithm)) + " diverged after " +
                       std::to_string(passes()) + " passes: " + what,
                   std::move(partial));
  }

 private:
  const ProblemInstance& p_;
  const SolverConfig& cfg_;
  const TraceOptions& opts_;
  RunResult& result_;
  double n_;
  double step_;
  double next_mark_;
};

void check_start(const ProblemInstance& p, const SolverConfig& cfg,
                 std::span<const double> w0, Algorithm expected) {
  if (cfg.algorithm != expected) {
    throw InvalidArgument("runner for " + std::string(to_string(expected)) +
                          " called with algorithm " +
                          std::string(to_string(cfg.algorithm)));
  }
  cfg.validate();
  if (w0.size() != p.d()) {
    throw DimensionMismatch("w0 has length " + std::to_string(w0.size()) +
                            ", problem dimension is " + std::to_string(p.d()));
  }
}

enum class Estimator { Recursive, Svrg };

// Shared outer/inner structure of SARAH, SARAH+ and SVRG.
RunResult run_two_loop(const ProblemInstance& p, const SolverConfig& cfg,
                       std::span<const double> w0, const TraceOptions& opts,
                       Estimator estimator, bool adaptive) {
  const std::size_t n = p.n();
  const std::size_t d = p.d();
  const SnapshotRule rule =
      adaptive ? SnapshotRule::LAST_ITERATE : cfg.snapshot_rule;

  CounterRng index_rng(cfg.seed, kIndexStream);
  CounterRng snapshot_rng(cfg.seed, kSnapshotStream);

  RunResult result;
  Recorder rec(p, cfg, opts, result);

  DenseVector w_tilde(w0.begin(), w0.end());
  DenseVector w_start(d), w(d), w_prev(d), v(d), v0(d), g_new(d), g_old(d);
  DenseVector snapshot(d);

  for (std::size_t outer = 0;; ++outer) {
    if (cfg.max_outer != 0 && outer >= cfg.max_outer) break;
    if (rec.exhausted()) break;

    w_start = w_tilde;
    p.full_grad(w_start, v);
    rec.charge(n);
    rec.check(w_start, v);
    v0 = v;
    const double v0_sq = norm_sq(v);
    rec.record(TraceEvent::OUTER_START, w_start, v0_sq, v0_sq);

    const std::size_t snap_t = rule == SnapshotRule::UNIFORM_RANDOM
                                   ? snapshot_rng.uniform_index(cfg.m + 1)
                                   : cfg.m;
    if (snap_t == 0) snapshot = w_start;

    w = w_start;
    axpy(-cfg.eta, v, w);
    rec.check(w);
    std::size_t t = 1;
    if (snap_t == 1) snapshot = w;
    w_prev = w_start;

    double v_prev_sq = v0_sq;
    while (t < cfg.m) {
      if (adaptive && !(v_prev_sq > cfg.gamma * v0_sq)) break;
      if (rec.exhausted()) break;

      const std::size_t i = index_rng.uniform_index(n);
      p.component_grad(i, w, g_new);
      if (estimator == Estimator::Recursive) {
        p.component_grad(i, w_prev, g_old);
        for (std::size_t j = 0; j < d; ++j) v[j] = g_new[j] - g_old[j] + v[j];
      } else {
        p.component_grad(i, w_start, g_old);
        for (std::size_t j = 0; j < d; ++j) v[j] = g_new[j] - g_old[j] + v0[j];
      }
      rec.charge(2);
      if (opts.on_inner_step) {
        opts.on_inner_step(InnerStep{outer, t, i, w_prev, w, v});
      }
      const double vt_sq = norm_sq(v);
      w_prev = w;
      axpy(-cfg.eta, v, w);
      rec.check(w, v);
      ++t;
      if (snap_t == t) snapshot = w;
      v_prev_sq = vt_sq;
      rec.maybe_record_inner(w, vt_sq);
    }

    result.inner_steps.push_back(t - 1);
    // A budget-truncated loop may end before the pre-drawn index; fall back
    // to the last iterate reached.
    if (rule == SnapshotRule::LAST_ITERATE || snap_t > t) snapshot = w;
    w_tilde = snapshot;
    ++result.outer_iterations;
    rec.record(TraceEvent::SNAPSHOT, w_tilde, std::nullopt, std::nullopt);
  }

  result.final_w = std::move(w_tilde);
  return result;
}

}  // namespace

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::SARAH: return "SARAH";
    case Algorithm::SARAH_PLUS: return "SARAH+";
    case Algorithm::SVRG: return "SVRG";
    case Algorithm::SGD_PLUS: return "SGD+";
    case Algorithm::SAG: return "SAG";
    case Algorithm::GD: return "GD";
    case Algorithm::FISTA: return "FISTA";
  }
  return "unknown";
}

std::string_view to_string(SnapshotRule r) {
  return r == SnapshotRule::UNIFORM_RANDOM ? "UNIFORM_RANDOM" : "LAST_ITERATE";
}

std::string_view to_string(TraceEvent e) {
  switch (e) {
    case TraceEvent::OUTER_START: return "OUTER_START";
    case TraceEvent::INNER_STEP: return "INNER_STEP";
    case TraceEvent::SNAPSHOT: return "SNAPSHOT";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  const std::string u = upper(name);
  if (u == "SARAH") return Algorithm::SARAH;
  if (u == "SARAH+" || u == "SARAH_PLUS") return Algorithm::SARAH_PLUS;
  if (u == "SVRG") return Algorithm::SVRG;
  if (u == "SGD+" || u == "SGD_PLUS") return Algorithm::SGD_PLUS;
  if (u == "SAG") return Algorithm::SAG;
  if (u == "GD") return Algorithm::GD;
  if (u == "FISTA") return Algorithm::FISTA;
  throw InvalidArgument("unknown algorithm '" + std::string(name) + "'");
}

SnapshotRule parse_snapshot_rule(std::string_view name) {
  const std::string u = upper(name);
  if (u == "UNIFORM_RANDOM" || u == "UNIFORM" || u == "RANDOM") {
    return SnapshotRule::UNIFORM_RANDOM;
  }
  if (u == "LAST_ITERATE" || u == "LAST") return SnapshotRule::LAST_ITERATE;
  throw InvalidArgument("unknown snapshot rule '" + std::string(name) + "'");
}

void SolverConfig::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw InvalidArgument("eta must be finite and > 0");
  }
  if (m < 1) throw InvalidArgument("inner loop size m must be >= 1");
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw InvalidArgument("gamma must lie in (0, 1]");
  }
  if (!(budget_passes > 0.0)) {
    throw InvalidArgument("budget_passes must be > 0");
  }
}

RunResult sarah_run(const ProblemInstance& p, const SolverConfig& cfg,
                    std::span<const double> w0, const TraceOptions& opts) {
  check_start(p, cfg, w0, Algorithm::SARAH);
  return run_two_loop(p, cfg, w0, opts, Estimator::Recursive, false);
}

RunResult sarah_plus_run(const ProblemInstance& p, const SolverConfig& cfg,
                         std::span<const double> w0, const TraceOptions& opts) {
  check_start(p, cfg, w0, Algorithm::SARAH_PLUS);
  return run_two_loop(p, cfg, w0, opts, Estimator::Recursive, true);
}

RunResult svrg_run(const ProblemInstance& p, const SolverConfig& cfg,
                   std::span<const double> w0, const TraceOptions& opts) {
  check_start(p, cfg, w0, Algorithm::SVRG);
  return run_two_loop(p, cfg, w0, opts, Estimator::Svrg, false);
}

RunResult sgd_plus_run(const ProblemInstance& p, const SolverConfig& cfg,
                       std::span<const double> w0, const TraceOptions& opts) {
  check_start(p, cfg, w0, Algorithm::SGD_PLUS);
  const double eta0 = cfg.eta0 > 0.0 ? cfg.eta0 : cfg.eta;
  CounterRng index_rng(cfg.seed, kIndexStream);
  RunResult result;
  Recorder rec(p, cfg, opts, result);

  DenseVector w(w0.begin(), w0.end());
  DenseVector g(p.d());
  rec.record(TraceEvent::OUTER_START, w, std::nullopt, std::nullopt);
  while (!rec.exhausted()) {
    // Decays once per completed effective pass.
    const double eta =
        eta0 / (static_cast<double>(rec.completed_passes()) + 1.0);
    const std::size_t i = index_rng.uniform_index(p.n());
    p.component_grad(i, w, g);
    rec.charge(1);
    axpy(-eta, g, w);
    rec.check(w, g);
    rec.maybe_record_inner(w, norm_sq(g));
  }
  result.outer_iterations = rec.completed_passes();
  rec.record(TraceEvent::SNAPSHOT, w, std::nullopt, std::nullopt);
  result.final_w = std::move(w);
  return result;
}

RunResult sag_run(const ProblemInstance& p, const SolverConfig& cfg,
                  std::span<const double> w0, const TraceOptions& opts) {
  check_start(p, cfg, w0, Algorithm::SAG);
  if (!p.is_linear_model()) {
    throw UnsupportedObjective("SAG stores one scalar per sample and needs a "
                               "regularized linear model");
  }
  const std::size_t n = p.n();
  const std::size_t d = p.d();
  const double n_d = static_cast<double>(n);
  CounterRng index_rng(cfg.seed, kIndexStream);
  RunResult result;
  Recorder rec(p, cfg, opts, result);

  DenseVector w(w0.begin(), w0.end());
  std::vector<double> stored(n, 0.0);
  DenseVector sum(d, 0.0), direction(d);
  rec.record(TraceEvent::OUTER_START, w, std::nullopt, std::nullopt);
  while (!rec.exhausted()) {
    const std::size_t i = index_rng.uniform_index(n);
    const auto row = p.features().row(i);
    const double fresh = p.loss_derivative(i, dot(row, w));
    axpy_sparse(fresh - stored[i], row, sum);
    stored[i] = fresh;
    rec.charge(1);
    for (std::size_t j = 0; j < d; ++j) {
      direction[j] = sum[j] / n_d + p.lambda() * w[j];
    }
    axpy(-cfg.eta, direction, w);
    rec.check(w, direction);
    rec.maybe_record_inner(w, norm_sq(direction));
  }
  result.outer_iterations = rec.completed_passes();
  rec.record(TraceEvent::SNAPSHOT, w, std::nullopt, std::nullopt);
  result.final_w = std::move(w);
  return result;
}

RunResult gd_run(const ProblemInstance& p, const SolverConfig& cfg,
                 std::span<const double> w0, const TraceOptions& opts) {
  check_start(p, cfg, w0, Algorithm::GD);
  RunResult result;
  Recorder rec(p, cfg, opts, result);
  DenseVector w(w0.begin(), w0.end());
  DenseVector g(p.d());
  while (!rec.exhausted() &&
         (cfg.max_outer == 0 || result.outer_iterations < cfg.max_outer)) {
    p.full_grad(w, g);
    rec.charge(p.n());
    rec.check(w, g);
    const double g_sq = norm_sq(g);
    rec.record(TraceEvent::OUTER_START, w, g_sq, g_sq);
    axpy(-cfg.eta, g, w);
    rec.check(w);
    ++result.outer_iterations;
  }
  rec.record(TraceEvent::SNAPSHOT, w, std::nullopt, std::nullopt);
  result.final_w = std::move(w);
  return result;
}

RunResult fista_run(const ProblemInstance& p, const SolverConfig& cfg,
                    std::span<const double> w0, const TraceOptions& opts) {
  check_start(p, cfg, w0, Algorithm::FISTA);
  RunResult result;
  Recorder rec(p, cfg, opts, result);
  const std::size_t d = p.d();
  DenseVector w(w0.begin(), w0.end());
  DenseVector y = w, w_next(d), g(d);
  double t = 1.0;
  while (!rec.exhausted() &&
         (cfg.max_outer == 0 || result.outer_iterations < cfg.max_outer)) {
    p.full_grad(y, g);
    rec.charge(p.n());
    rec.check(y, g);
    rec.record(TraceEvent::OUTER_START, w, std::nullopt, norm_sq(g));
    w_next = y;
    axpy(-cfg.eta, g, w_next);
    if (cfg.fista_momentum) {
      const double t_next = (1.0 + std::sqrt(1.0 + 4.0 * t * t)) / 2.0;
      const double beta = (t - 1.0) / t_next;
      for (std::size_t j = 0; j < d; ++j) {
        y[j] = w_next[j] + beta * (w_next[j] - w[j]);
      }
      t = t_next;
    } else {
      y = w_next;
    }
    w.swap(w_next);
    rec.check(w);
    ++result.outer_iterations;
  }
  rec.record(TraceEvent::SNAPSHOT, w, std::nullopt, std::nullopt);
  result.final_w = std::move(w);
  return result;
}

RunResult run(const ProblemInstance& p, const SolverConfig& cfg,
              std::span<const double> w0, const TraceOptions& opts) {
  switch (cfg.algorithm) {
    case Algorithm::SARAH: return sarah_run(p, cfg, w0, opts);
    case Algorithm::SARAH_PLUS: return sarah_plus_run(p, cfg, w0, opts);
    case Algorithm::SVRG: return svrg_run(p, cfg, w0, opts);
    case Algorithm::SGD_PLUS: return sgd_plus_run(p, cfg, w0, opts);
    case Algorithm::SAG: return sag_run(p, cfg, w0, opts);
    case Algorithm::GD: return gd_run(p, cfg, w0, opts);
    case Algorithm::FISTA: return fista_run(p, cfg, w0, opts);
  }
  throw InvalidArgument("unknown algorithm tag");
}

}  // namespace sarah
