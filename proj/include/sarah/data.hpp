#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sarah/numkit.hpp"
#include "sarah/objectives.hpp"

namespace sarah {

struct LabeledDataset {
  CsrMatrix features;
  std::vector<double> labels;
  std::string name;
  bool normalized = false;
  /// Empty when labels were kept verbatim, e.g. "0->-1,1->+1" otherwise.
  std::string label_mapping;
  /// Rows with no stored entries (kept; they contribute only lambda w).
  std::size_t zero_rows = 0;

  std::size_t rows() const { return labels.size(); }
  std::size_t cols() const { return features.cols(); }
};

/// Parses "<label> <idx>:<val> ..." lines with 1-based strictly increasing
/// indices. Blank lines are skipped. Labels {0,1} and {1,2} are mapped to
/// {-1,+1}. The column count is the largest index seen.
LabeledDataset parse_libsvm(std::istream& in, std::string name = {});
/// Reads a file, transparently decompressing gzip input.
LabeledDataset load_libsvm(const std::string& path);
/// Writes 1-based LIBSVM text with round-trip precision.
void write_libsvm(const LabeledDataset& ds, std::ostream& out);

struct SplitSpec {
  double train_fraction = 0.7;
  std::uint64_t seed = 0;
};

/// Seeded uniform shuffle, then the first floor(fraction * n) rows train.
std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& ds,
                                                const SplitSpec& spec);

/// Scales every nonzero row to unit l2 norm; zero rows are counted in
/// zero_rows and left untouched.
LabeledDataset normalize_rows(const LabeledDataset& ds);

/// Copies the given rows, keeping the column count.
LabeledDataset select_rows(const LabeledDataset& ds,
                           std::span<const std::size_t> rows);

/// Builds the finite-sum problem; lambda defaults to 1/n.
ProblemInstance make_problem(const LabeledDataset& ds, ObjectiveKind kind,
                             std::optional<double> lambda = std::nullopt);

struct SyntheticLogistic {
  LabeledDataset data;
  DenseVector planted;
};

/// Dense N(0, 1/d) features labelled by sign(x^T w_planted) (ties +1), with
/// each label flipped with probability (1 - separability) / 2.
SyntheticLogistic synth_logistic(std::size_t n, std::size_t d,
                                 std::uint64_t seed, double separability);

struct SyntheticQuadratic {
  ProblemInstance problem;
  DenseVector w_star;
};

/// A_i = B_i B_i^T / d + floor I with Gaussian B_i, centers N(0, spread^2 I).
SyntheticQuadratic synth_quadratic(std::size_t n, std::size_t d,
                                   std::uint64_t seed, double spread,
                                   double floor = 0.05);
SyntheticQuadratic synth_quadratic_2d(std::size_t n, std::uint64_t seed,
                                      double spread);

}  // namespace sarah
