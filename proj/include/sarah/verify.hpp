#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sarah/numkit.hpp"
#include "sarah/objectives.hpp"

namespace sarah {

/// A tiny problem with a start point and its exact (or converged) optimum.
struct SmallInstance {
  ProblemInstance problem;
  DenseVector w0;
  double p_star = 0.0;
  std::string label;
};

/// A_i = B B^T / d + floor I with Gaussian B; centers and w0 standard normal.
SmallInstance small_quadratic(std::size_t n, std::size_t d, std::uint64_t seed,
                              double floor = 0.1);
/// Gaussian features, random +-1 labels, nonzero Gaussian w0.
SmallInstance small_logistic(std::size_t n, std::size_t d, std::uint64_t seed,
                             double lambda = 0.1);

struct VerifyCheck {
  std::string suite;
  std::string instance;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;

  std::size_t failures() const;
  bool passed() const { return !checks.empty() && failures() == 0; }
};

struct VerifyOptions {
  std::size_t instances = 50;  ///< per objective kind and per regime
  std::size_t n = 3;
  std::size_t m = 4;
  std::size_t d = 2;
  std::uint64_t seed = 1;
};

/// Runs the exact-enumeration oracle checks and the rate-formula checks.
VerifyReport run_verification(const VerifyOptions& opts = {});
/// suite,instance,value,threshold,passed
void write_verify_csv(const VerifyReport& report, std::ostream& out);

}  // namespace sarah
