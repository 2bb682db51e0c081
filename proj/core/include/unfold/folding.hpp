#pragma once

#include <optional>
#include <utility>

#include <Eigen/Core>

#include "unfold/histogram.hpp"

namespace unfold {

/// g_i = sum_j rho(i, j) f_j w_x[j].
Histogram fold(const ResponseMatrix& response, const Histogram& truth);

/// h_j = sum_i k_i rho(i, j) w_y[i].
Histogram transpose_fold(const ResponseMatrix& response, const Histogram& measured);

/// Raw-vector forms of the two maps above, without grid checks beyond sizes.
Eigen::VectorXd fold_values(const ResponseMatrix& response, const Eigen::VectorXd& truth);
Eigen::VectorXd transpose_fold_values(const ResponseMatrix& response,
                                      const Eigen::VectorXd& measured);

/// alpha(z, j) = sum_i rho(i, z) rho(i, j) w_y[i]; exactly symmetric.
Eigen::MatrixXd overlap_kernel(const ResponseMatrix& response);

/// Regularity constant K = max_j sum_z w_x[z] alpha(z, j). Throws
/// ZeroResponse when the response is identically zero.
double compute_K(const ResponseMatrix& response);

/// A = K^{-1} A_rho^T A_rho acting on densities over the truth grid:
/// (A f)_z = sum_j kernel(z, j) f_j w_x[j] with kernel = alpha / K.
///
/// The operator is self-adjoint and positive in the measure-weighted inner
/// product. Its spectrum lies in [0, 1] whenever the normalization is at
/// least the regularity constant of the response it came from.
class CompositeOperator {
 public:
  CompositeOperator(BinGrid truth_grid, Eigen::MatrixXd kernel, double normalization);

  /// A = c * I on the grid, for closed-form checks.
  static CompositeOperator scaled_identity(const BinGrid& grid, double c);

  const BinGrid& truth_grid() const noexcept { return grid_; }
  /// kernel(z, j) = alpha(z, j) / K.
  const Eigen::MatrixXd& kernel() const noexcept { return kernel_; }
  /// The K actually used to normalize.
  double normalization() const noexcept { return normalization_; }
  std::size_t size() const noexcept { return grid_.size(); }

  Eigen::VectorXd apply(const Eigen::VectorXd& f) const;

  /// Plain matrix M with (A f) = M f, i.e. kernel * diag(w_x).
  Eigen::MatrixXd matrix() const;

 private:
  BinGrid grid_;
  Eigen::MatrixXd kernel_;
  double normalization_;
};

/// Builds A from a response. `normalization`, when given, replaces K_rho
/// and must be >= K_rho (within 1e-12 relative); larger values shrink the
/// spectrum towards 0 and keep every convergence property.
CompositeOperator composite(const ResponseMatrix& response,
                            std::optional<double> normalization = std::nullopt);

/// Square response on `grid` whose column j is the Gaussian pdf of width
/// sigma centred at bin j, integrated over each bin. Mass that falls off
/// the grid is lost (inefficiency).
ResponseMatrix gaussian_kernel(const BinGrid& grid, double sigma);

/// Periodic Gaussian convolution on a uniform grid: column j holds the
/// wrapped bin probabilities of offset (i - j) mod n, renormalized so that
/// every column integrates to exactly 1. Used to model an ideal convolution
/// on a finite grid.
ResponseMatrix cyclic_gaussian_kernel(const BinGrid& grid, double sigma);

/// eta * rho as a response: (kernel o R)(k, j) = sum_i kernel(k, i) R(i, j) w_y[i].
ResponseMatrix compose(const ResponseMatrix& kernel, const ResponseMatrix& response);

/// Smoothing preconditioner: returns (eta * rho, eta * g). The true f of the
/// modified problem is the same as that of the original one.
std::pair<ResponseMatrix, Histogram> precondition(const ResponseMatrix& response,
                                                  const Histogram& measured,
                                                  const ResponseMatrix& kernel);

}  // namespace unfold
