#include "sarah/data.hpp"

#include <zlib.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <memory>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "sarah/errors.hpp"
#include "sarah/random.hpp"

namespace sarah {

namespace {

bool parse_double(const std::string& token, double& out) {
  if (token.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtod(token.c_str(), &end);
  return errno == 0 && end == token.c_str() + token.size() && std::isfinite(out);
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void map_labels(LabeledDataset& ds) {
  const std::set<double> seen(ds.labels.begin(), ds.labels.end());
  auto subset_of = [&](std::initializer_list<double> allowed) {
    return std::all_of(seen.begin(), seen.end(), [&](double y) {
      return std::find(allowed.begin(), allowed.end(), y) != allowed.end();
    });
  };
  if (subset_of({0.0, 1.0}) && seen.count(0.0)) {
    for (auto& y : ds.labels) y = y == 0.0 ? -1.0 : 1.0;
    ds.label_mapping = "0->-1,1->+1";
  } else if (subset_of({1.0, 2.0}) && seen.count(2.0)) {
    for (auto& y : ds.labels) y = y == 1.0 ? -1.0 : 1.0;
    ds.label_mapping = "1->-1,2->+1";
  }
}

}  // namespace

LabeledDataset parse_libsvm(std::istream& in, std::string name) {
  std::vector<std::size_t> offsets{0};
  std::vector<std::uint32_t> cols;
  std::vector<double> vals;
  LabeledDataset ds;
  ds.name = std::move(name);
  std::size_t max_index = 0;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream tokens(line);
    std::string token;
    if (!(tokens >> token)) continue;
    double label = 0.0;
    if (!parse_double(token, label)) {
      throw ParseError(line_no, "bad label '" + token + "'");
    }
    std::size_t row_nnz = 0;
    std::size_t prev = 0;
    while (tokens >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos) {
        throw ParseError(line_no, "expected idx:val, got '" + token + "'");
      }
      const std::string idx_str = token.substr(0, colon);
      char* end = nullptr;
      errno = 0;
      const unsigned long long idx = std::strtoull(idx_str.c_str(), &end, 10);
      if (idx_str.empty() || errno != 0 || *end != '\0' ||
          idx_str.front() == '-' || idx_str.front() == '+') {
        throw ParseError(line_no, "bad feature index '" + idx_str + "'");
      }
      if (idx == 0) throw ParseError(line_no, "feature indices are 1-based");
      if (idx > 0xFFFFFFFFULL) throw ParseError(line_no, "feature index too large");
      if (row_nnz > 0 && idx <= prev) {
        throw ParseError(line_no, "feature indices must be strictly increasing");
      }
      double value = 0.0;
      if (!parse_double(token.substr(colon + 1), value)) {
        throw ParseError(line_no, "bad feature value in '" + token + "'");
      }
      cols.push_back(static_cast<std::uint32_t>(idx - 1));
      vals.push_back(value);
      prev = idx;
      ++row_nnz;
      max_index = std::max<std::size_t>(max_index, idx);
    }
    if (row_nnz == 0) ++ds.zero_rows;
    ds.labels.push_back(label);
    offsets.push_back(vals.size());
  }
  if (ds.labels.empty()) throw EmptyDataset("no samples in LIBSVM input");
  ds.features = CsrMatrix(std::move(offsets), std::move(cols), std::move(vals),
                          max_index);
  map_labels(ds);
  return ds;
}

LabeledDataset load_libsvm(const std::string& path) {
  std::unique_ptr<gzFile_s, int (*)(gzFile)> file(gzopen(path.c_str(), "rb"),
                                                  &gzclose);
  if (!file) throw Error("cannot open dataset '" + path + "'");
  std::string text;
  char buf[1 << 16];
  int got = 0;
  while ((got = gzread(file.get(), buf, sizeof buf)) > 0) {
    text.append(buf, static_cast<std::size_t>(got));
  }
  if (got < 0) throw Error("read error in dataset '" + path + "'");
  std::istringstream in(std::move(text));
  return parse_libsvm(in, path);
}

void write_libsvm(const LabeledDataset& ds, std::ostream& out) {
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    out << format_double(ds.labels[i]);
    const auto row = ds.features.row(i);
    for (std::size_t k = 0; k < row.nnz(); ++k) {
      out << ' ' << (row.indices[k] + 1) << ':' << format_double(row.values[k]);
    }
    out << '\n';
  }
}

LabeledDataset select_rows(const LabeledDataset& ds,
                           std::span<const std::size_t> rows) {
  LabeledDataset out;
  out.features = CsrMatrix(ds.cols());
  out.name = ds.name;
  out.normalized = ds.normalized;
  out.label_mapping = ds.label_mapping;
  for (auto i : rows) {
    const auto r = ds.features.row(i);
    out.features.append_row(r.indices, r.values);
    out.labels.push_back(ds.labels[i]);
    if (r.nnz() == 0) ++out.zero_rows;
  }
  return out;
}

std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& ds,
                                                const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw InvalidArgument("train fraction must lie in (0, 1)");
  }
  const std::size_t n = ds.rows();
  if (n < 2) throw InvalidArgument("split needs at least two rows");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  CounterRng rng(spec.seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(perm[i], perm[rng.uniform_index(i + 1)]);
  }
  const auto cut = static_cast<std::size_t>(
      std::floor(spec.train_fraction * static_cast<double>(n)));
  if (cut == 0 || cut == n) {
    throw InvalidArgument("split leaves one side empty");
  }
  const std::span<const std::size_t> all(perm);
  return {select_rows(ds, all.first(cut)), select_rows(ds, all.subspan(cut))};
}

LabeledDataset normalize_rows(const LabeledDataset& ds) {
  LabeledDataset out = ds;
  out.zero_rows = 0;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto vals = out.features.mutable_row_values(i);
    const double sq = norm_sq(vals);
    if (sq == 0.0) {
      ++out.zero_rows;
      continue;
    }
    const double inv = 1.0 / std::sqrt(sq);
    for (auto& x : vals) x *= inv;
  }
  out.normalized = true;
  return out;
}

ProblemInstance make_problem(const LabeledDataset& ds, ObjectiveKind kind,
                             std::optional<double> lambda) {
  if (ds.rows() == 0) throw EmptyDataset("dataset has no rows");
  const double lam = lambda.value_or(1.0 / static_cast<double>(ds.rows()));
  switch (kind) {
    case ObjectiveKind::LogisticL2:
      return ProblemInstance::logistic(ds.features, ds.labels, lam);
    case ObjectiveKind::LeastSquaresL2:
      return ProblemInstance::least_squares(ds.features, ds.labels, lam);
    case ObjectiveKind::QuadraticSum:
      break;
  }
  throw UnsupportedObjective("datasets build linear models only");
}

SyntheticLogistic synth_logistic(std::size_t n, std::size_t d,
                                 std::uint64_t seed, double separability) {
  if (n < 1 || d < 1) throw InvalidArgument("synth_logistic needs n, d >= 1");
  if (!(separability >= 0.0 && separability <= 1.0)) {
    throw InvalidArgument("separability must lie in [0, 1]");
  }
  CounterRng planted_rng(seed, 0);
  CounterRng feature_rng(seed, 1);
  CounterRng flip_rng(seed, 2);

  SyntheticLogistic out;
  out.planted.resize(d);
  for (auto& x : out.planted) x = planted_rng.normal();

  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  const double flip_prob = (1.0 - separability) / 2.0;
  LabeledDataset& ds = out.data;
  ds.name = "synthetic-logistic";
  ds.features = CsrMatrix(d);
  std::vector<std::uint32_t> idx(d);
  std::iota(idx.begin(), idx.end(), 0u);
  std::vector<double> row(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& x : row) x = scale * feature_rng.normal();
    double y = dense_dot(row, out.planted) >= 0.0 ? 1.0 : -1.0;
    if (flip_rng.uniform01() < flip_prob) y = -y;
    ds.features.append_row(idx, row);
    ds.labels.push_back(y);
  }
  return out;
}

SyntheticQuadratic synth_quadratic(std::size_t n, std::size_t d,
                                   std::uint64_t seed, double spread,
                                   double floor) {
  if (n < 1 || d < 1) throw InvalidArgument("synth_quadratic needs n, d >= 1");
  if (!(floor > 0.0)) throw InvalidArgument("eigenvalue floor must be > 0");
  CounterRng rng(seed);
  std::vector<DenseVector> hessians, centers;
  const double inv_d = 1.0 / static_cast<double>(d);
  for (std::size_t i = 0; i < n; ++i) {
    DenseVector b(d * d);
    for (auto& x : b) x = rng.normal();
    DenseVector a(d * d, 0.0);
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t c = 0; c <= r; ++c) {
        double acc = 0.0;
        for (std::size_t k = 0; k < d; ++k) acc += b[r * d + k] * b[c * d + k];
        a[r * d + c] = a[c * d + r] = acc * inv_d;
      }
      a[r * d + r] += floor;
    }
    DenseVector c(d);
    for (auto& x : c) x = spread * rng.normal();
    hessians.push_back(std::move(a));
    centers.push_back(std::move(c));
  }
  auto problem = ProblemInstance::quadratic_sum(std::move(hessians),
                                                std::move(centers));
  auto w_star = quadratic_minimizer(problem);
  return {std::move(problem), std::move(w_star)};
}

SyntheticQuadratic synth_quadratic_2d(std::size_t n, std::uint64_t seed,
                                      double spread) {
  return synth_quadratic(n, 2, seed, spread);
}

}  // namespace sarah
