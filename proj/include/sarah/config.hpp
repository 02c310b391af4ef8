#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sarah/objectives.hpp"
#include "sarah/optimizers.hpp"

namespace sarah {

enum class ProblemSourceKind { Dataset, SyntheticLogistic, SyntheticQuadratic };

std::string_view to_string(ProblemSourceKind kind);

struct ProblemSource {
  ProblemSourceKind kind = ProblemSourceKind::SyntheticLogistic;
  std::string path;  ///< LIBSVM file (plain or gzip) for Dataset
  std::size_t n = 1000;
  std::size_t d = 20;
  std::uint64_t seed = 1;
  double separability = 0.9;
  double spread = 1.0;
  /// 0 keeps every row for training; otherwise a seeded train/test split.
  double train_fraction = 0.0;
  std::uint64_t split_seed = 0;
  bool normalize = false;
};

/// A step size either absolute or as a multiple of 1/L.
struct StepSpec {
  double value = 0.1;
  bool over_L = false;

  double resolve(double L) const { return over_L ? value / L : value; }
};

/// An inner loop size either absolute or as a multiple of n.
struct LoopSpec {
  double value = 1.0;
  bool times_n = false;

  /// max(1, round(value * n)) when relative.
  std::size_t resolve(std::size_t n) const;
};

struct SolverSpec {
  std::string label;
  SolverConfig base;  ///< eta, eta0 and m are overwritten by resolve()
  StepSpec eta;
  std::optional<StepSpec> eta0;
  LoopSpec m;

  SolverConfig resolve(double L, std::size_t n) const;
};

struct ExperimentConfig {
  std::string name = "experiment";
  ProblemSource source;
  ObjectiveKind objective = ObjectiveKind::LogisticL2;
  std::optional<double> lambda;  ///< defaults to 1/n
  std::vector<SolverSpec> solvers;
  double records_per_pass = 10.0;
  double reference_tol = 1e-12;
  std::size_t reference_max_iter = 200000;
  std::string reference_cache;  ///< directory; empty disables the disk cache
  std::string output_dir = "out";
  std::size_t vt_span = 0;  ///< moving-average span for v_t traces; 0 = raw

  /// Throws InvalidArgument.
  void validate() const;
};

/// Parses "eta=0.5/L", "0.01" style step specs.
StepSpec parse_step(const std::string& text);
/// Parses "200", "1n", "0.5n", "n" style loop specs.
LoopSpec parse_loop(const std::string& text);
/// Parses the space-separated key=value list of one solver line.
SolverSpec parse_solver(const std::string& label, const std::string& text);

/// Flat "key = value" text, '#' comments, one "solver.<label> = ..." line
/// per run. Errors carry the offending line number.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);
/// Serializes with round-trip precision; parse_config(format_config(c))
/// reproduces c.
std::string format_config(const ExperimentConfig& cfg);
std::string format_solver(const SolverSpec& spec);

/// "%.17g"
std::string format_number(double x);

}  // namespace sarah
