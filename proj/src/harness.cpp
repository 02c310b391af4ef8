#include "sarah/harness.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <utility>

#include "sarah/errors.hpp"

#ifndef SARAH_VERSION
#define SARAH_VERSION "unknown"
#endif

namespace fs = std::filesystem;

namespace sarah {

namespace {

using CacheKey = std::pair<std::uint64_t, double>;

std::mutex& cache_mutex() {
  static std::mutex m;
  return m;
}

std::map<CacheKey, ReferenceSolution>& memory_cache() {
  static std::map<CacheKey, ReferenceSolution> cache;
  return cache;
}

std::string cache_file(const std::string& dir, const CacheKey& key) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%016" PRIx64 "_%a.ref", key.first, key.second);
  return (fs::path(dir) / buf).string();
}

std::optional<ReferenceSolution> read_cache_file(const std::string& path,
                                                 std::size_t d) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  ReferenceSolution ref;
  std::string tag;
  std::size_t count = 0;
  if (!(in >> tag >> ref.solver) || tag != "solver") return std::nullopt;
  if (!(in >> tag >> ref.iterations) || tag != "iterations") return std::nullopt;
  if (!(in >> tag >> ref.tolerance) || tag != "tolerance") return std::nullopt;
  if (!(in >> tag >> ref.p_star) || tag != "p_star") return std::nullopt;
  if (!(in >> tag >> ref.grad_norm_sq_at_star) || tag != "grad_norm_sq") {
    return std::nullopt;
  }
  if (!(in >> tag >> count) || tag != "w" || count != d) return std::nullopt;
  ref.w_star.resize(d);
  for (auto& x : ref.w_star) {
    std::string token;
    if (!(in >> token)) return std::nullopt;
    x = std::strtod(token.c_str(), nullptr);
  }
  return ref;
}

void write_cache_file(const std::string& path, const ReferenceSolution& ref) {
  fs::create_directories(fs::path(path).parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    out << "solver " << ref.solver << '\n'
        << "iterations " << ref.iterations << '\n'
        << "tolerance " << format_number(ref.tolerance) << '\n'
        << "p_star " << format_number(ref.p_star) << '\n'
        << "grad_norm_sq " << format_number(ref.grad_norm_sq_at_star) << '\n'
        << "w " << ref.w_star.size() << '\n';
    for (double x : ref.w_star) out << format_number(x) << '\n';
    if (!out) throw Error("cannot write reference cache '" + tmp + "'");
  }
  fs::rename(tmp, path);
}

ReferenceSolution solve_reference(const ProblemInstance& p,
                                  const ReferenceOptions& opts) {
  ReferenceSolution ref;
  ref.tolerance = opts.tol;
  if (p.kind() == ObjectiveKind::QuadraticSum) {
    ref.w_star = quadratic_minimizer(p);
    ref.p_star = p.loss(ref.w_star);
    ref.grad_norm_sq_at_star = norm_sq(p.full_grad(ref.w_star));
    ref.solver = "closed-form";
    return ref;
  }

  const double L = p.smoothness().L;
  const double tol_sq = opts.tol * opts.tol;
  const std::size_t d = p.d();
  DenseVector x(d, 0.0), y(d, 0.0), x_next(d), g(d), diff(d);
  double t = 1.0;
  for (std::size_t it = 0; it < opts.max_iter; ++it) {
    p.full_grad(y, g);
    const double g_sq = norm_sq(g);
    if (!std::isfinite(g_sq)) throw UnresolvedReference("reference solver diverged");
    if (g_sq <= tol_sq) {
      ref.w_star = y;
      ref.p_star = p.loss(y);
      ref.grad_norm_sq_at_star = g_sq;
      ref.solver = "fista-restart";
      ref.iterations = it;
      return ref;
    }
    x_next = y;
    axpy(-1.0 / L, g, x_next);
    for (std::size_t j = 0; j < d; ++j) diff[j] = x_next[j] - x[j];
    if (dense_dot(g, diff) > 0.0) {
      t = 1.0;
      x = x_next;
      y = x_next;
      continue;
    }
    const double t_next = (1.0 + std::sqrt(1.0 + 4.0 * t * t)) / 2.0;
    const double beta = (t - 1.0) / t_next;
    for (std::size_t j = 0; j < d; ++j) y[j] = x_next[j] + beta * diff[j];
    x = x_next;
    t = t_next;
  }
  throw UnresolvedReference("reference solver reached " +
                            std::to_string(opts.max_iter) +
                            " iterations without ||grad P|| <= " +
                            format_number(opts.tol));
}

std::string format_optional(const std::optional<double>& x) {
  return x ? format_number(*x) : std::string();
}

PreparedProblem from_dataset(LabeledDataset ds, const ExperimentConfig& cfg) {
  const auto& src = cfg.source;
  const double L_raw = make_problem(ds, cfg.objective, cfg.lambda).smoothness().L;
  const LabeledDataset unit = normalize_rows(ds);
  const double L_unit = make_problem(unit, cfg.objective, cfg.lambda).smoothness().L;
  if (src.normalize) ds = unit;
  PreparedProblem prep{make_problem(ds, cfg.objective, cfg.lambda), std::nullopt,
                       ds.name, std::nullopt, std::nullopt};
  prep.L_raw = L_raw;
  prep.L_normalized = L_unit;
  if (src.train_fraction > 0.0) {
    auto [train, test] = split(ds, SplitSpec{src.train_fraction, src.split_seed});
    prep.problem = make_problem(train, cfg.objective, cfg.lambda);
    prep.test = std::move(test);
  }
  if (ds.zero_rows > 0) {
    prep.description += " (" + std::to_string(ds.zero_rows) + " zero rows)";
  }
  return prep;
}

std::vector<SolverSpec> sorted_solvers(const ExperimentConfig& cfg) {
  auto specs = cfg.solvers;
  std::sort(specs.begin(), specs.end(),
            [](const auto& a, const auto& b) { return a.label < b.label; });
  return specs;
}

void write_manifest(const ExperimentConfig& cfg, const PreparedProblem& prep,
                    const ReferenceSolution& ref, const std::string& path) {
  const double L = prep.problem.smoothness().L;
  std::ofstream out(path);
  out << "# code_version = " << SARAH_VERSION << '\n';
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016" PRIx64, prep.problem.content_hash());
  out << "# problem_hash = " << hash << '\n';
  out << "# problem = " << prep.description << '\n';
  out << "# train_n = " << prep.problem.n() << '\n';
  out << "# d = " << prep.problem.d() << '\n';
  out << "# L = " << format_number(L) << '\n';
  if (prep.L_raw) out << "# L_raw_rows = " << format_number(*prep.L_raw) << '\n';
  if (prep.L_normalized) {
    out << "# L_unit_rows = " << format_number(*prep.L_normalized) << '\n';
  }
  out << "# p_star = " << format_number(ref.p_star) << '\n';
  out << "# reference = " << ref.solver << " iterations=" << ref.iterations
      << " grad_norm_sq=" << format_number(ref.grad_norm_sq_at_star) << '\n';
  for (const auto& spec : sorted_solvers(cfg)) {
    const auto s = spec.resolve(L, prep.problem.n());
    out << "# resolved." << spec.label << " eta=" << format_number(s.eta)
        << " m=" << s.m << '\n';
  }
  out << format_config(cfg);
  if (!out) throw Error("cannot write manifest '" + path + "'");
}

ExperimentResult run_prepared(const ExperimentConfig& cfg,
                              const PreparedProblem& prep) {
  ExperimentResult result;
  result.output_dir = resolve_output_dir(cfg);
  fs::create_directories(result.output_dir);
  const auto& p = prep.problem;
  result.reference = compute_reference(
      p, ReferenceOptions{cfg.reference_tol, cfg.reference_max_iter,
                          cfg.reference_cache});
  const double p_star = result.reference.p_star;
  const double L = p.smoothness().L;

  TraceOptions opts;
  opts.records_per_pass = cfg.records_per_pass;
  if (prep.test) {
    const LabeledDataset* test = &*prep.test;
    opts.test_error = [test](std::span<const double> w) {
      return test_error(test->features, test->labels, w);
    };
  }

  const DenseVector w0(p.d(), 0.0);
  for (const auto& spec : sorted_solvers(cfg)) {
    RunSummary summary;
    summary.label = spec.label;
    summary.csv_path = (fs::path(result.output_dir) / (spec.label + ".csv")).string();
    RunResult run_result;
    try {
      summary.config = spec.resolve(L, p.n());
      run_result = run(p, summary.config, w0, opts);
    } catch (const Diverged& e) {
      run_result = e.partial();
      summary.diverged = true;
      summary.error = e.what();
    } catch (const Error& e) {
      summary.error = e.what();
    }
    if (summary.error.empty()) {
      summary.final_residual = p.loss(run_result.final_w) - p_star;
      if (opts.test_error) summary.final_test_error = opts.test_error(run_result.final_w);
    } else {
      summary.final_residual = std::nan("");
      result.warnings.push_back(spec.label + ": " + summary.error);
    }
    summary.final_passes = run_result.effective_passes(p.n());
    std::ofstream out(summary.csv_path);
    write_trace_csv(run_result, summary.config, p_star, cfg.vt_span, out);
    if (!out) throw Error("cannot write '" + summary.csv_path + "'");
    result.runs.push_back(std::move(summary));
  }

  write_manifest(cfg, prep, result.reference,
                 (fs::path(result.output_dir) / "manifest.txt").string());
  std::ofstream out(fs::path(result.output_dir) / "summary.csv");
  out << "label,algorithm,seed,eta,m,final_passes,final_residual,final_test_error,status\n";
  for (const auto& r : result.runs) {
    out << r.label << ',' << to_string(r.config.algorithm) << ',' << r.config.seed
        << ',' << format_number(r.config.eta) << ',' << r.config.m << ','
        << format_number(r.final_passes) << ',' << format_number(r.final_residual)
        << ',' << format_optional(r.final_test_error) << ','
        << (r.error.empty() ? "ok" : r.diverged ? "diverged" : "error") << '\n';
  }
  return result;
}

const SolverSpec& template_solver(const ExperimentConfig& cfg) {
  if (cfg.solvers.empty()) {
    throw InvalidArgument("sweeps take step, seed and budget from a solver line");
  }
  return cfg.solvers.front();
}

}  // namespace

ReferenceSolution compute_reference(const ProblemInstance& p,
                                    const ReferenceOptions& opts) {
  if (!(opts.tol > 0.0)) throw InvalidArgument("reference tolerance must be > 0");
  const CacheKey key{p.content_hash(), opts.tol};
  std::lock_guard<std::mutex> lock(cache_mutex());
  auto& cache = memory_cache();
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  if (!opts.cache_dir.empty()) {
    if (auto ref = read_cache_file(cache_file(opts.cache_dir, key), p.d())) {
      return cache.emplace(key, std::move(*ref)).first->second;
    }
  }
  ReferenceSolution ref = solve_reference(p, opts);
  if (!opts.cache_dir.empty()) write_cache_file(cache_file(opts.cache_dir, key), ref);
  return cache.emplace(key, std::move(ref)).first->second;
}

void clear_reference_cache() {
  std::lock_guard<std::mutex> lock(cache_mutex());
  memory_cache().clear();
}

PreparedProblem prepare_problem(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto& src = cfg.source;
  switch (src.kind) {
    case ProblemSourceKind::Dataset:
      return from_dataset(load_libsvm(src.path), cfg);
    case ProblemSourceKind::SyntheticLogistic: {
      auto synth = synth_logistic(src.n, src.d, src.seed, src.separability);
      return from_dataset(std::move(synth.data), cfg);
    }
    case ProblemSourceKind::SyntheticQuadratic: {
      auto synth = synth_quadratic(src.n, src.d, src.seed, src.spread);
      return PreparedProblem{std::move(synth.problem), std::nullopt,
                             "synthetic-quadratic", std::nullopt, std::nullopt};
    }
  }
  throw InvalidArgument("unknown problem source");
}

bool ExperimentResult::all_ok() const {
  return std::all_of(runs.begin(), runs.end(),
                     [](const RunSummary& r) { return r.error.empty(); });
}

const RunSummary& ExperimentResult::find(const std::string& label) const {
  for (const auto& r : runs) {
    if (r.label == label) return r;
  }
  throw InvalidArgument("no run labelled '" + label + "'");
}

std::string resolve_output_dir(const ExperimentConfig& cfg) {
  if (const char* env = std::getenv("SARAH_OUTPUT_DIR"); env && *env) return env;
  return cfg.output_dir;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  return run_prepared(cfg, prepare_problem(cfg));
}

ExperimentResult sweep_m(const ExperimentConfig& cfg,
                         const std::vector<LoopSpec>& m_values) {
  if (m_values.empty()) throw InvalidArgument("sweep_m needs at least one m");
  const SolverSpec tmpl = template_solver(cfg);
  const PreparedProblem prep = prepare_problem(cfg);
  const std::size_t n = prep.problem.n();

  std::vector<std::string> warnings;
  std::set<std::size_t> seen;
  std::vector<std::size_t> ms;
  for (const auto& spec : m_values) {
    const std::size_t m = spec.resolve(n);
    if (!seen.insert(m).second) {
      warnings.push_back("duplicate m=" + std::to_string(m) + " ignored");
      std::cerr << "warning: " << warnings.back() << '\n';
      continue;
    }
    ms.push_back(m);
  }

  ExperimentConfig sweep = cfg;
  sweep.solvers.clear();
  for (std::size_t m : ms) {
    for (auto algo : {Algorithm::SARAH, Algorithm::SVRG}) {
      SolverSpec s = tmpl;
      s.base.algorithm = algo;
      s.m = LoopSpec{static_cast<double>(m), false};
      s.label = std::string(to_string(algo)) + "_m" + std::to_string(m);
      sweep.solvers.push_back(std::move(s));
    }
  }
  ExperimentResult result = run_prepared(sweep, prep);
  result.warnings.insert(result.warnings.begin(), warnings.begin(), warnings.end());

  auto rows = result.runs;
  std::sort(rows.begin(), rows.end(), [](const RunSummary& a, const RunSummary& b) {
    if (a.config.algorithm != b.config.algorithm) {
      return a.config.algorithm < b.config.algorithm;
    }
    return a.config.m < b.config.m;
  });
  std::ofstream out(fs::path(result.output_dir) / "sweep_m.csv");
  out << "algorithm,m,eta,final_passes,final_residual,status\n";
  for (const auto& r : rows) {
    out << to_string(r.config.algorithm) << ',' << r.config.m << ','
        << format_number(r.config.eta) << ',' << format_number(r.final_passes)
        << ',' << format_number(r.final_residual) << ','
        << (r.error.empty() ? "ok" : r.diverged ? "diverged" : "error") << '\n';
  }
  return result;
}

ExperimentResult sweep_gamma(const ExperimentConfig& cfg,
                             const std::vector<double>& gammas) {
  if (gammas.empty()) throw InvalidArgument("sweep_gamma needs at least one gamma");
  const SolverSpec tmpl = template_solver(cfg);
  ExperimentConfig sweep = cfg;
  sweep.solvers.clear();
  std::set<double> seen;
  for (double g : gammas) {
    if (!seen.insert(g).second) continue;
    SolverSpec s = tmpl;
    s.base.algorithm = Algorithm::SARAH_PLUS;
    s.base.gamma = g;
    char buf[48];
    std::snprintf(buf, sizeof buf, "SARAH+_gamma%.6g", g);
    s.label = buf;
    sweep.solvers.push_back(std::move(s));
  }
  return run_experiment(sweep);
}

std::vector<RateCurveRow> emit_rate_sweep(double mu, double L,
                                          const std::vector<double>& m_grid,
                                          std::ostream& out) {
  auto rows = best_rate_curves(mu, L, m_grid);
  out << "# mu = " << format_number(mu) << ", L = " << format_number(L) << '\n'
      << "# m: inner loop size\n"
      << "# eta_sarah: step in (0, 1/L) minimizing the SARAH factor sigma_m\n"
      << "# rate_sarah: sigma_m at eta_sarah\n"
      << "# sarah_convergent: 1 when rate_sarah < 1\n"
      << "# sarah_closed_form: 1 when eta_sarah came from the analytic optimum\n"
      << "# eta_svrg: step in (0, 1/(4L)) minimizing the SVRG factor alpha_m\n"
      << "# rate_svrg: alpha_m at eta_svrg\n"
      << "# svrg_convergent: 1 when rate_svrg < 1\n"
      << "# non_convergent: 1 when either best rate is >= 1\n"
      << "m,eta_sarah,rate_sarah,sarah_convergent,sarah_closed_form,eta_svrg,"
         "rate_svrg,svrg_convergent,non_convergent\n";
  for (const auto& r : rows) {
    out << format_number(r.m) << ',' << format_number(r.eta_sarah) << ','
        << format_number(r.rate_sarah) << ',' << r.sarah_convergent << ','
        << r.sarah_closed_form << ',' << format_number(r.eta_svrg) << ','
        << format_number(r.rate_svrg) << ',' << r.svrg_convergent << ','
        << !r.both_convergent() << '\n';
  }
  return rows;
}

std::vector<double> moving_average(const std::vector<double>& series,
                                   std::size_t span) {
  if (span < 1) throw InvalidArgument("moving average span must be >= 1");
  const std::size_t n = series.size();
  const std::size_t left = (span - 1) / 2;
  const std::size_t right = span - 1 - left;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= left ? i - left : 0;
    const std::size_t hi = std::min(n - 1, i + right);
    double acc = 0.0;
    for (std::size_t k = lo; k <= hi; ++k) acc += series[k];
    out[i] = acc / static_cast<double>(hi - lo + 1);
  }
  return out;
}

void write_trace_csv(const RunResult& run, const SolverConfig& cfg,
                     double p_star, std::size_t vt_span, std::ostream& out) {
  std::vector<double> vt;
  for (const auto& rec : run.trace) {
    if (rec.vt_norm_sq) vt.push_back(*rec.vt_norm_sq);
  }
  if (vt_span > 1) vt = moving_average(vt, vt_span);

  out << "# snapshot_rule=" << to_string(cfg.snapshot_rule)
      << " eta=" << format_number(cfg.eta) << " m=" << cfg.m << '\n';
  out << "algorithm,seed,effective_passes,loss_residual,test_error,vt_norm_sq,event\n";
  std::size_t k = 0;
  for (const auto& rec : run.trace) {
    out << to_string(cfg.algorithm) << ',' << cfg.seed << ','
        << format_number(rec.effective_passes) << ','
        << format_number(rec.loss - p_star) << ','
        << format_optional(rec.test_error) << ',';
    if (rec.vt_norm_sq) out << format_number(vt[k++]);
    out << ',' << to_string(rec.event) << '\n';
  }
}

}  // namespace sarah
