#include "sarah/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "sarah/errors.hpp"

namespace sarah {

namespace {

void check_row_shape(std::span<const std::uint32_t> indices,
                     std::span<const double> values) {
  if (indices.size() != values.size()) {
    throw InvalidArgument("sparse row has " + std::to_string(indices.size()) +
                          " indices but " + std::to_string(values.size()) +
                          " values");
  }
  for (std::size_t k = 1; k < indices.size(); ++k) {
    if (indices[k] <= indices[k - 1]) {
      throw InvalidArgument("sparse row indices must be strictly increasing");
    }
  }
}

void check_same_size(std::size_t a, std::size_t b) {
  if (a != b) {
    throw DimensionMismatch("vector lengths differ: " + std::to_string(a) +
                            " vs " + std::to_string(b));
  }
}

}  // namespace

CsrMatrix::CsrMatrix(std::vector<std::size_t> row_offsets,
                     std::vector<std::uint32_t> column_ids,
                     std::vector<double> values, std::size_t cols)
    : row_offsets_(std::move(row_offsets)),
      column_ids_(std::move(column_ids)),
      values_(std::move(values)),
      cols_(cols) {
  if (row_offsets_.empty() || row_offsets_.front() != 0) {
    throw InvalidArgument("row_offsets must start with 0");
  }
  if (row_offsets_.back() != values_.size() ||
      column_ids_.size() != values_.size()) {
    throw InvalidArgument("row_offsets[n] must equal nnz");
  }
  for (std::size_t i = 0; i + 1 < row_offsets_.size(); ++i) {
    if (row_offsets_[i + 1] < row_offsets_[i]) {
      throw InvalidArgument("row_offsets must be non-decreasing");
    }
    const auto r = row(i);
    check_row_shape(r.indices, r.values);
  }
  for (auto c : column_ids_) {
    if (c >= cols_) throw InvalidArgument("column id exceeds column count");
    max_col_seen_plus1_ = std::max(max_col_seen_plus1_, c + 1);
  }
}

void CsrMatrix::append_row(std::span<const std::uint32_t> indices,
                           std::span<const double> values) {
  check_row_shape(indices, values);
  if (!indices.empty()) {
    if (indices.back() >= cols_) {
      throw InvalidArgument("column id " + std::to_string(indices.back()) +
                            " exceeds column count " + std::to_string(cols_));
    }
    max_col_seen_plus1_ = std::max(max_col_seen_plus1_, indices.back() + 1);
  }
  column_ids_.insert(column_ids_.end(), indices.begin(), indices.end());
  values_.insert(values_.end(), values.begin(), values.end());
  row_offsets_.push_back(values_.size());
}

void CsrMatrix::set_cols(std::size_t cols) {
  if (cols < max_col_seen_plus1_) {
    throw InvalidArgument("cannot shrink column count below a stored index");
  }
  cols_ = cols;
}

SparseRowView CsrMatrix::row(std::size_t i) const {
  const std::size_t begin = row_offsets_[i];
  const std::size_t len = row_offsets_[i + 1] - begin;
  return {std::span(column_ids_).subspan(begin, len),
          std::span(values_).subspan(begin, len)};
}

SparseRow CsrMatrix::row_copy(std::size_t i) const {
  const auto r = row(i);
  return {{r.indices.begin(), r.indices.end()},
          {r.values.begin(), r.values.end()}};
}

std::span<double> CsrMatrix::mutable_row_values(std::size_t i) {
  const std::size_t begin = row_offsets_[i];
  return std::span(values_).subspan(begin, row_offsets_[i + 1] - begin);
}

double dot(SparseRowView row, std::span<const double> w) {
  double acc = 0.0;
  for (std::size_t k = 0; k < row.indices.size(); ++k) {
    const std::uint32_t j = row.indices[k];
    if (j >= w.size()) {
      throw DimensionMismatch("sparse index " + std::to_string(j) +
                              " out of range for length " +
                              std::to_string(w.size()));
    }
    acc += row.values[k] * w[j];
  }
  return acc;
}

void axpy_sparse(double alpha, SparseRowView row, std::span<double> w) {
  for (auto j : row.indices) {
    if (j >= w.size()) {
      throw DimensionMismatch("sparse index " + std::to_string(j) +
                              " out of range for length " +
                              std::to_string(w.size()));
    }
  }
  for (std::size_t k = 0; k < row.indices.size(); ++k) {
    w[row.indices[k]] += alpha * row.values[k];
  }
}

double norm_sq(std::span<const double> w) {
  double acc = 0.0;
  for (double x : w) acc += x * x;
  return acc;
}

double dense_dot(std::span<const double> a, std::span<const double> b) {
  check_same_size(a.size(), b.size());
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) acc += a[j] * b[j];
  return acc;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_same_size(x.size(), y.size());
  for (std::size_t j = 0; j < x.size(); ++j) y[j] += alpha * x[j];
}

double dist_sq(std::span<const double> a, std::span<const double> b) {
  check_same_size(a.size(), b.size());
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double diff = a[j] - b[j];
    acc += diff * diff;
  }
  return acc;
}

bool all_finite(std::span<const double> w) {
  for (double x : w) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

bool bit_identical(std::span<const double> a, std::span<const double> b) {
  return a.size() == b.size() &&
         (a.empty() || std::memcmp(a.data(), b.data(), a.size_bytes()) == 0);
}

}  // namespace sarah
