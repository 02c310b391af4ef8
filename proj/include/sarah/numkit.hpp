#pragma once

// Dense and CSR kernels. Every reduction accumulates left to right in index
// order so repeated runs are bit-identical.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sarah {

using DenseVector = std::vector<double>;

struct SparseRowView {
  std::span<const std::uint32_t> indices;
  std::span<const double> values;

  std::size_t nnz() const { return indices.size(); }
};

/// Owning sparse row; indices strictly increasing.
struct SparseRow {
  std::vector<std::uint32_t> indices;
  std::vector<double> values;

  SparseRowView view() const { return {indices, values}; }
};

class CsrMatrix {
 public:
  CsrMatrix() = default;
  explicit CsrMatrix(std::size_t cols) : cols_(cols) {}
  /// Validates every structural invariant; throws InvalidArgument.
  CsrMatrix(std::vector<std::size_t> row_offsets,
            std::vector<std::uint32_t> column_ids, std::vector<double> values,
            std::size_t cols);

  void append_row(std::span<const std::uint32_t> indices,
                  std::span<const double> values);
  void append_row(const SparseRow& row) { append_row(row.indices, row.values); }

  /// Widens the column count; shrinking below a stored index is rejected.
  void set_cols(std::size_t cols);

  std::size_t rows() const { return row_offsets_.size() - 1; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  SparseRowView row(std::size_t i) const;
  SparseRow row_copy(std::size_t i) const;

  std::span<const std::size_t> row_offsets() const { return row_offsets_; }
  std::span<const std::uint32_t> column_ids() const { return column_ids_; }
  std::span<const double> values() const { return values_; }
  std::span<double> mutable_row_values(std::size_t i);

  friend bool operator==(const CsrMatrix&, const CsrMatrix&) = default;

 private:
  std::vector<std::size_t> row_offsets_{0};
  std::vector<std::uint32_t> column_ids_;
  std::vector<double> values_;
  std::size_t cols_ = 0;
  std::uint32_t max_col_seen_plus1_ = 0;
};

// Sparse-dense kernels. Throw DimensionMismatch when a stored index is out of
// range for w.
double dot(SparseRowView row, std::span<const double> w);
void axpy_sparse(double alpha, SparseRowView row, std::span<double> w);

// Dense kernels.
double norm_sq(std::span<const double> w);
double dense_dot(std::span<const double> a, std::span<const double> b);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double dist_sq(std::span<const double> a, std::span<const double> b);
bool all_finite(std::span<const double> w);
/// Exact bit-pattern equality (distinguishes -0 from +0, NaN payloads).
bool bit_identical(std::span<const double> a, std::span<const double> b);

}  // namespace sarah
