#include "sarah/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include <Eigen/Dense>

#include "sarah/errors.hpp"

namespace sarah {

namespace {

// Numerically stable log(1 + exp(z)).
double log1p_exp(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

// 1 / (1 + exp(z)) without overflow.
double inv_one_plus_exp(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

class Fnv1a {
 public:
  void bytes(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t k = 0; k < len; ++k) {
      h_ ^= p[k];
      h_ *= 0x100000001B3ULL;
    }
  }
  template <typename T>
  void value(const T& v) {
    bytes(&v, sizeof(T));
  }
  template <typename T>
  void range(std::span<const T> v) {
    value(v.size());
    bytes(v.data(), v.size_bytes());
  }
  std::uint64_t digest() const { return h_; }

 private:
  std::uint64_t h_ = 0xCBF29CE484222325ULL;
};

void check_linear_inputs(const CsrMatrix& x, std::span<const double> y,
                         double lambda) {
  if (x.rows() == 0) throw EmptyDataset("problem needs at least one sample");
  if (x.cols() == 0) throw InvalidArgument("problem dimension must be >= 1");
  if (y.size() != x.rows()) {
    throw DimensionMismatch("label count " + std::to_string(y.size()) +
                            " != row count " + std::to_string(x.rows()));
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument("lambda must be finite and >= 0");
  }
}

}  // namespace

std::string_view to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::LogisticL2:
      return "logistic";
    case ObjectiveKind::LeastSquaresL2:
      return "least_squares";
    case ObjectiveKind::QuadraticSum:
      return "quadratic";
  }
  return "unknown";
}

double SmoothnessInfo::kappa() const {
  if (!(mu > 0.0)) throw DomainError("condition number needs mu > 0");
  return L / mu;
}

ProblemInstance ProblemInstance::make_linear(ObjectiveKind kind,
                                             CsrMatrix features,
                                             std::vector<double> labels,
                                             double lambda) {
  check_linear_inputs(features, labels, lambda);
  ProblemInstance p;
  p.kind_ = kind;
  p.n_ = features.rows();
  p.d_ = features.cols();
  p.lambda_ = lambda;
  p.features_ = std::move(features);
  p.labels_ = std::move(labels);
  for (std::size_t i = 0; i < p.n_; ++i) {
    p.max_row_norm_sq_ =
        std::max(p.max_row_norm_sq_, norm_sq(p.features_.row(i).values));
  }
  return p;
}

ProblemInstance ProblemInstance::logistic(CsrMatrix features,
                                          std::vector<double> labels,
                                          double lambda) {
  for (double y : labels) {
    if (y != 1.0 && y != -1.0) {
      throw InvalidArgument("logistic labels must be -1 or +1");
    }
  }
  return make_linear(ObjectiveKind::LogisticL2, std::move(features),
                     std::move(labels), lambda);
}

ProblemInstance ProblemInstance::least_squares(CsrMatrix features,
                                               std::vector<double> labels,
                                               double lambda) {
  return make_linear(ObjectiveKind::LeastSquaresL2, std::move(features),
                     std::move(labels), lambda);
}

ProblemInstance ProblemInstance::quadratic_sum(std::vector<DenseVector> hessians,
                                               std::vector<DenseVector> centers) {
  if (hessians.empty()) throw EmptyDataset("quadratic sum needs n >= 1");
  if (hessians.size() != centers.size()) {
    throw DimensionMismatch("hessian count differs from center count");
  }
  const std::size_t d = centers.front().size();
  if (d == 0) throw InvalidArgument("problem dimension must be >= 1");

  ProblemInstance p;
  p.kind_ = ObjectiveKind::QuadraticSum;
  p.n_ = hessians.size();
  p.d_ = d;
  p.hessians_.reserve(p.n_ * d * d);
  p.centers_.reserve(p.n_ * d);

  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t i = 0; i < p.n_; ++i) {
    if (hessians[i].size() != d * d || centers[i].size() != d) {
      throw DimensionMismatch("component " + std::to_string(i) +
                              " has inconsistent dimension");
    }
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>
        a(hessians[i].data(), d, d);
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw InvalidArgument("hessian " + std::to_string(i) +
                            " is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a,
                                                       Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (lo < -1e-12 * scale) {
      throw InvalidArgument("hessian " + std::to_string(i) +
                            " is not positive semidefinite");
    }
    p.eig_min_.push_back(std::max(lo, 0.0));
    p.eig_max_.push_back(hi);
    sum += a;
    p.hessians_.insert(p.hessians_.end(), hessians[i].begin(),
                       hessians[i].end());
    p.centers_.insert(p.centers_.end(), centers[i].begin(), centers[i].end());
  }
  sum /= static_cast<double>(p.n_);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sum,
                                                     Eigen::EigenvaluesOnly);
  p.avg_hessian_min_eig_ = eig.eigenvalues().minCoeff();
  if (!(p.avg_hessian_min_eig_ > 1e-14 * std::max(1.0, sum.norm()))) {
    throw InvalidArgument("sum of hessians is not positive definite");
  }
  return p;
}

void ProblemInstance::check_index(std::size_t i) const {
  if (i >= n_) {
    throw InvalidArgument("component index " + std::to_string(i) +
                          " out of range for n = " + std::to_string(n_));
  }
}

void ProblemInstance::check_dim(std::span<const double> w) const {
  if (w.size() != d_) {
    throw DimensionMismatch("expected dimension " + std::to_string(d_) +
                            ", got " + std::to_string(w.size()));
  }
}

std::span<const double> ProblemInstance::hessian(std::size_t i) const {
  check_index(i);
  return std::span(hessians_).subspan(i * d_ * d_, d_ * d_);
}

std::span<const double> ProblemInstance::center(std::size_t i) const {
  check_index(i);
  return std::span(centers_).subspan(i * d_, d_);
}

double ProblemInstance::loss_derivative(std::size_t i, double margin) const {
  switch (kind_) {
    case ObjectiveKind::LogisticL2: {
      const double y = labels_[i];
      return -y * inv_one_plus_exp(y * margin);
    }
    case ObjectiveKind::LeastSquaresL2:
      return 2.0 * (margin - labels_[i]);
    case ObjectiveKind::QuadraticSum:
      break;
  }
  throw UnsupportedObjective("loss_derivative needs a linear model");
}

void ProblemInstance::component_grad(std::size_t i, std::span<const double> w,
                                     std::span<double> out) const {
  check_index(i);
  check_dim(w);
  check_dim(out);
  if (kind_ == ObjectiveKind::QuadraticSum) {
    const double* a = hessians_.data() + i * d_ * d_;
    const double* c = centers_.data() + i * d_;
    for (std::size_t r = 0; r < d_; ++r) {
      double acc = 0.0;
      for (std::size_t k = 0; k < d_; ++k) acc += a[r * d_ + k] * (w[k] - c[k]);
      out[r] = acc;
    }
    return;
  }
  const auto row = features_.row(i);
  const double deriv = loss_derivative(i, dot(row, w));
  for (std::size_t j = 0; j < d_; ++j) out[j] = lambda_ * w[j];
  axpy_sparse(deriv, row, out);
}

DenseVector ProblemInstance::component_grad(std::size_t i,
                                            std::span<const double> w) const {
  DenseVector out(d_);
  component_grad(i, w, out);
  return out;
}

double ProblemInstance::component_loss(std::size_t i,
                                       std::span<const double> w) const {
  check_index(i);
  check_dim(w);
  switch (kind_) {
    case ObjectiveKind::LogisticL2: {
      const double m = dot(features_.row(i), w);
      return log1p_exp(-labels_[i] * m) + 0.5 * lambda_ * norm_sq(w);
    }
    case ObjectiveKind::LeastSquaresL2: {
      const double r = dot(features_.row(i), w) - labels_[i];
      return r * r + 0.5 * lambda_ * norm_sq(w);
    }
    case ObjectiveKind::QuadraticSum: {
      const double* a = hessians_.data() + i * d_ * d_;
      const double* c = centers_.data() + i * d_;
      double acc = 0.0;
      for (std::size_t r = 0; r < d_; ++r) {
        double row_acc = 0.0;
        for (std::size_t k = 0; k < d_; ++k) {
          row_acc += a[r * d_ + k] * (w[k] - c[k]);
        }
        acc += (w[r] - c[r]) * row_acc;
      }
      return 0.5 * acc;
    }
  }
  return 0.0;
}

void ProblemInstance::full_grad(std::span<const double> w,
                                std::span<double> out) const {
  check_dim(w);
  check_dim(out);
  const double n = static_cast<double>(n_);
  if (kind_ == ObjectiveKind::QuadraticSum) {
    DenseVector acc(d_, 0.0);
    DenseVector g(d_);
    for (std::size_t i = 0; i < n_; ++i) {
      component_grad(i, w, g);
      for (std::size_t j = 0; j < d_; ++j) acc[j] += g[j];
    }
    for (std::size_t j = 0; j < d_; ++j) out[j] = acc[j] / n;
    return;
  }
  // Linear models: accumulate the data term sparsely, add lambda w once.
  DenseVector acc(d_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    const auto row = features_.row(i);
    axpy_sparse(loss_derivative(i, dot(row, w)), row, acc);
  }
  for (std::size_t j = 0; j < d_; ++j) out[j] = acc[j] / n + lambda_ * w[j];
}

DenseVector ProblemInstance::full_grad(std::span<const double> w) const {
  DenseVector out(d_);
  full_grad(w, out);
  return out;
}

double ProblemInstance::loss(std::span<const double> w) const {
  check_dim(w);
  const double n = static_cast<double>(n_);
  if (kind_ == ObjectiveKind::QuadraticSum) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n_; ++i) acc += component_loss(i, w);
    return acc / n;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    const double m = dot(features_.row(i), w);
    if (kind_ == ObjectiveKind::LogisticL2) {
      acc += log1p_exp(-labels_[i] * m);
    } else {
      const double r = m - labels_[i];
      acc += r * r;
    }
  }
  return acc / n + 0.5 * lambda_ * norm_sq(w);
}

SmoothnessInfo ProblemInstance::smoothness() const {
  SmoothnessInfo info;
  switch (kind_) {
    case ObjectiveKind::LogisticL2:
      info.L = max_row_norm_sq_ / 4.0 + lambda_;
      info.mu = lambda_;
      break;
    case ObjectiveKind::LeastSquaresL2:
      info.L = 2.0 * max_row_norm_sq_ + lambda_;
      info.mu = lambda_;
      break;
    case ObjectiveKind::QuadraticSum:
      info.L = *std::max_element(eig_max_.begin(), eig_max_.end());
      info.mu = avg_hessian_min_eig_;
      break;
  }
  if (!(info.L > 0.0)) {
    throw DegenerateProblem("smoothness constant is zero (no curvature)");
  }
  return info;
}

double ProblemInstance::component_min_eigenvalue(std::size_t i) const {
  if (kind_ != ObjectiveKind::QuadraticSum) {
    throw UnsupportedObjective("eigenvalues exist only for quadratic sums");
  }
  check_index(i);
  return eig_min_[i];
}

double ProblemInstance::component_max_eigenvalue(std::size_t i) const {
  if (kind_ != ObjectiveKind::QuadraticSum) {
    throw UnsupportedObjective("eigenvalues exist only for quadratic sums");
  }
  check_index(i);
  return eig_max_[i];
}

std::uint64_t ProblemInstance::content_hash() const {
  Fnv1a h;
  h.value(static_cast<int>(kind_));
  h.value(n_);
  h.value(d_);
  h.value(lambda_);
  h.range(features_.row_offsets());
  h.range(features_.column_ids());
  h.range(features_.values());
  h.range(std::span<const double>(labels_));
  h.range(std::span<const double>(hessians_));
  h.range(std::span<const double>(centers_));
  return h.digest();
}

DenseVector quadratic_minimizer(const ProblemInstance& p) {
  if (p.kind() != ObjectiveKind::QuadraticSum) {
    throw UnsupportedObjective("closed-form minimizer needs a quadratic sum");
  }
  const auto d = static_cast<Eigen::Index>(p.d());
  Eigen::MatrixXd a_sum = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
  for (std::size_t i = 0; i < p.n(); ++i) {
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>
        a(p.hessian(i).data(), d, d);
    Eigen::Map<const Eigen::VectorXd> c(p.center(i).data(), d);
    a_sum += a;
    rhs += a * c;
  }
  Eigen::VectorXd w = a_sum.ldlt().solve(rhs);
  // One step of iterative refinement tightens the residual to rounding level.
  w += a_sum.ldlt().solve(rhs - a_sum * w);
  return DenseVector(w.data(), w.data() + d);
}

double test_error(const CsrMatrix& x, std::span<const double> labels,
                  std::span<const double> w) {
  if (x.rows() == 0) throw EmptyDataset("test set is empty");
  if (x.cols() != w.size()) {
    throw DimensionMismatch("test dimension " + std::to_string(x.cols()) +
                            " != weight dimension " + std::to_string(w.size()));
  }
  if (labels.size() != x.rows()) {
    throw DimensionMismatch("test label count differs from row count");
  }
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double predicted = dot(x.row(i), w) >= 0.0 ? 1.0 : -1.0;
    if (predicted != labels[i]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(x.rows());
}

}  // namespace sarah
