#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sarah/config.hpp"
#include "sarah/data.hpp"
#include "sarah/numkit.hpp"
#include "sarah/objectives.hpp"
#include "sarah/optimizers.hpp"
#include "sarah/theory.hpp"

namespace sarah {

struct ReferenceSolution {
  DenseVector w_star;
  double p_star = 0.0;
  double grad_norm_sq_at_star = 0.0;
  std::string solver;  ///< "closed-form" or "fista-restart"
  std::size_t iterations = 0;
  double tolerance = 0.0;
};

struct ReferenceOptions {
  double tol = 1e-12;
  std::size_t max_iter = 200000;
  /// Directory for persisted solutions; empty keeps the cache in memory only.
  std::string cache_dir;
};

/// Minimizer of P to ||grad P|| <= tol. QuadraticSum uses the closed form;
/// other objectives run FISTA with step 1/L and gradient-based momentum
/// restart. Results are cached per content hash. Throws UnresolvedReference
/// when max_iter is reached.
ReferenceSolution compute_reference(const ProblemInstance& p,
                                    const ReferenceOptions& opts = {});
/// Drops every in-memory cached reference.
void clear_reference_cache();

/// The training problem built from a config plus the optional test split.
struct PreparedProblem {
  ProblemInstance problem;
  std::optional<LabeledDataset> test;
  std::string description;
  /// Smoothness of the full dataset with raw and with unit-norm rows.
  std::optional<double> L_raw;
  std::optional<double> L_normalized;
};

PreparedProblem prepare_problem(const ExperimentConfig& cfg);

struct RunSummary {
  std::string label;
  SolverConfig config;
  double final_passes = 0.0;
  double final_residual = 0.0;
  std::optional<double> final_test_error;
  bool diverged = false;
  std::string error;
  std::string csv_path;
};

struct ExperimentResult {
  std::string output_dir;
  std::vector<RunSummary> runs;  ///< sorted by label
  ReferenceSolution reference;
  std::vector<std::string> warnings;

  bool all_ok() const;
  const RunSummary& find(const std::string& label) const;
};

/// SARAH_OUTPUT_DIR when set, otherwise cfg.output_dir.
std::string resolve_output_dir(const ExperimentConfig& cfg);

/// Runs every solver from w = 0, writing <label>.csv, manifest.txt (a
/// config that reproduces the run) and summary.csv into the output directory.
/// A diverged run keeps its partial CSV and does not stop the others.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Runs SARAH and SVRG for each distinct m with the first solver's step,
/// seed and budget. Writes sweep_m.csv with the final residuals.
ExperimentResult sweep_m(const ExperimentConfig& cfg,
                         const std::vector<LoopSpec>& m_values);

/// Runs SARAH+ for each gamma using the first solver's other settings.
ExperimentResult sweep_gamma(const ExperimentConfig& cfg,
                             const std::vector<double>& gammas);

/// Writes the best_rate_curves table as CSV after '#' lines describing the
/// columns. Returns the rows written.
std::vector<RateCurveRow> emit_rate_sweep(double mu, double L,
                                          const std::vector<double>& m_grid,
                                          std::ostream& out);

/// Centered moving average; windows shrink at both ends.
std::vector<double> moving_average(const std::vector<double>& series,
                                   std::size_t span);

/// Writes one trace as CSV: a '#' line with the snapshot rule, step and loop
/// size, then the columns
/// algorithm,seed,effective_passes,loss_residual,test_error,vt_norm_sq,event.
void write_trace_csv(const RunResult& run, const SolverConfig& cfg,
                     double p_star, std::size_t vt_span, std::ostream& out);

}  // namespace sarah
