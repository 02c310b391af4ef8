#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sarah/errors.hpp"
#include "sarah/numkit.hpp"
#include "sarah/objectives.hpp"

namespace sarah {

enum class Algorithm { SARAH, SARAH_PLUS, SVRG, SGD_PLUS, SAG, GD, FISTA };
enum class SnapshotRule { UNIFORM_RANDOM, LAST_ITERATE };
enum class TraceEvent { OUTER_START, INNER_STEP, SNAPSHOT };

std::string_view to_string(Algorithm a);
std::string_view to_string(SnapshotRule r);
std::string_view to_string(TraceEvent e);
/// Case-insensitive; accepts "SARAH+" for SARAH_PLUS and "SGD+" for SGD_PLUS.
Algorithm parse_algorithm(std::string_view name);
SnapshotRule parse_snapshot_rule(std::string_view name);

struct SolverConfig {
  Algorithm algorithm = Algorithm::SARAH;
  double eta = 0.1;
  /// Inner loop size (SARAH/SVRG) or the maximum inner loop size (SARAH+).
  std::size_t m = 1;
  /// Stopping ratio for SARAH+, in (0, 1].
  double gamma = 0.125;
  SnapshotRule snapshot_rule = SnapshotRule::LAST_ITERATE;
  std::uint64_t seed = 0;
  double budget_passes = 10.0;
  /// Initial rate of SGD+; falls back to eta when not positive.
  double eta0 = 0.0;
  /// Stop after this many outer iterations (0 = budget only). GD and FISTA
  /// count each full-gradient step as one outer iteration.
  std::size_t max_outer = 0;
  /// FISTA only; false pins t_k = 1, i.e. no momentum.
  bool fista_momentum = true;

  /// Throws InvalidArgument on a violated invariant.
  void validate() const;
};

struct TraceRecord {
  double effective_passes = 0.0;
  double loss = 0.0;
  std::optional<double> grad_norm_sq;
  std::optional<double> vt_norm_sq;
  std::optional<double> test_error;
  TraceEvent event = TraceEvent::INNER_STEP;
};

/// Called after every inner update w_{t+1} = w_t - eta v_t of the SARAH
/// family. `sample` is i_t, `w_prev` is w_{t-1} and `w` is w_t (the point at
/// which v_t was formed). Not called for the outer step that uses v_0.
struct InnerStep {
  std::size_t outer = 0;
  std::size_t t = 0;
  std::size_t sample = 0;
  std::span<const double> w_prev;
  std::span<const double> w;
  std::span<const double> v;
};

struct TraceOptions {
  /// Inner-step records per effective pass; 0 disables inner records.
  double records_per_pass = 10.0;
  bool record_loss = true;
  /// Evaluated at every record when set; its cost is not charged to the run.
  std::function<double(std::span<const double>)> test_error;
  std::function<void(const InnerStep&)> on_inner_step;
};

struct RunResult {
  DenseVector final_w;
  std::vector<TraceRecord> trace;
  std::uint64_t total_component_evals = 0;
  std::size_t outer_iterations = 0;
  /// Inner steps taken in each outer iteration (SARAH family only).
  std::vector<std::size_t> inner_steps;

  double effective_passes(std::size_t n) const {
    return static_cast<double>(total_component_evals) / static_cast<double>(n);
  }
};

/// Thrown when an iterate, direction, or loss becomes non-finite. Carries
/// everything recorded before the failure.
class Diverged : public Error {
 public:
  Diverged(const std::string& what, RunResult partial)
      : Error(what), partial_(std::move(partial)) {}
  const RunResult& partial() const { return partial_; }

 private:
  RunResult partial_;
};

RunResult sarah_run(const ProblemInstance& p, const SolverConfig& cfg,
                    std::span<const double> w0, const TraceOptions& opts = {});
RunResult sarah_plus_run(const ProblemInstance& p, const SolverConfig& cfg,
                         std::span<const double> w0,
                         const TraceOptions& opts = {});
RunResult svrg_run(const ProblemInstance& p, const SolverConfig& cfg,
                   std::span<const double> w0, const TraceOptions& opts = {});
RunResult sgd_plus_run(const ProblemInstance& p, const SolverConfig& cfg,
                       std::span<const double> w0,
                       const TraceOptions& opts = {});
RunResult sag_run(const ProblemInstance& p, const SolverConfig& cfg,
                  std::span<const double> w0, const TraceOptions& opts = {});
RunResult gd_run(const ProblemInstance& p, const SolverConfig& cfg,
                 std::span<const double> w0, const TraceOptions& opts = {});
RunResult fista_run(const ProblemInstance& p, const SolverConfig& cfg,
                    std::span<const double> w0, const TraceOptions& opts = {});

/// Dispatches on cfg.algorithm.
RunResult run(const ProblemInstance& p, const SolverConfig& cfg,
              std::span<const double> w0, const TraceOptions& opts = {});

}  // namespace sarah
