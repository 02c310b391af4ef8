#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "sarah/numkit.hpp"

namespace sarah {

enum class ObjectiveKind { LogisticL2, LeastSquaresL2, QuadraticSum };

std::string_view to_string(ObjectiveKind kind);

struct SmoothnessInfo {
  double L = 0.0;   ///< max over components of the gradient Lipschitz constant
  double mu = 0.0;  ///< strong-convexity modulus of P (0 if unknown / absent)

  bool strongly_convex() const { return mu > 0.0; }
  /// L / mu; throws DomainError when mu == 0.
  double kappa() const;
};

/// Finite sum P(w) = (1/n) sum_i f_i(w). Immutable after construction.
///
///   LogisticL2:     f_i = log(1 + exp(-y_i x_i^T w)) + (lambda/2)||w||^2
///   LeastSquaresL2: f_i = (x_i^T w - y_i)^2 + (lambda/2)||w||^2
///   QuadraticSum:   f_i = 1/2 (w - c_i)^T A_i (w - c_i)
class ProblemInstance {
 public:
  static ProblemInstance logistic(CsrMatrix features, std::vector<double> labels,
                                  double lambda);
  static ProblemInstance least_squares(CsrMatrix features,
                                       std::vector<double> labels,
                                       double lambda);
  /// Each hessian is a row-major d*d symmetric PSD matrix; their sum must be
  /// positive definite.
  static ProblemInstance quadratic_sum(std::vector<DenseVector> hessians,
                                       std::vector<DenseVector> centers);

  ObjectiveKind kind() const { return kind_; }
  std::size_t n() const { return n_; }
  std::size_t d() const { return d_; }
  double lambda() const { return lambda_; }
  bool is_linear_model() const { return kind_ != ObjectiveKind::QuadraticSum; }

  const CsrMatrix& features() const { return features_; }
  std::span<const double> labels() const { return labels_; }
  std::span<const double> hessian(std::size_t i) const;
  std::span<const double> center(std::size_t i) const;

  /// out = grad f_i(w)
  void component_grad(std::size_t i, std::span<const double> w,
                      std::span<double> out) const;
  DenseVector component_grad(std::size_t i, std::span<const double> w) const;
  double component_loss(std::size_t i, std::span<const double> w) const;

  /// out = (1/n) sum_i grad f_i(w), summed in index order.
  void full_grad(std::span<const double> w, std::span<double> out) const;
  DenseVector full_grad(std::span<const double> w) const;
  double loss(std::span<const double> w) const;

  /// Derivative of the data term of a linear model with respect to the margin
  /// x_i^T w; grad f_i(w) = loss_derivative(i, x_i^T w) x_i + lambda w.
  double loss_derivative(std::size_t i, double margin) const;

  /// Throws DegenerateProblem when L == 0.
  SmoothnessInfo smoothness() const;

  /// Extreme eigenvalues of A_i (QuadraticSum only).
  double component_min_eigenvalue(std::size_t i) const;
  double component_max_eigenvalue(std::size_t i) const;

  /// FNV-1a over the kind, dimensions, lambda and every stored number.
  std::uint64_t content_hash() const;

 private:
  ProblemInstance() = default;
  static ProblemInstance make_linear(ObjectiveKind kind, CsrMatrix features,
                                     std::vector<double> labels, double lambda);
  void check_index(std::size_t i) const;
  void check_dim(std::span<const double> w) const;

  ObjectiveKind kind_ = ObjectiveKind::LogisticL2;
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  double lambda_ = 0.0;
  CsrMatrix features_;
  std::vector<double> labels_;
  std::vector<double> hessians_;  // n * d * d
  std::vector<double> centers_;   // n * d
  std::vector<double> eig_min_;
  std::vector<double> eig_max_;
  double avg_hessian_min_eig_ = 0.0;
  double max_row_norm_sq_ = 0.0;
};

/// Closed-form minimizer (sum A_i)^{-1} sum A_i c_i of a QuadraticSum.
DenseVector quadratic_minimizer(const ProblemInstance& p);

/// Fraction of rows with sign(x^T w) != y, where sign(0) counts as +1.
double test_error(const CsrMatrix& x, std::span<const double> labels,
                  std::span<const double> w);

}  // namespace sarah
