#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "unfold/folding.hpp"
#include "unfold/histogram.hpp"

namespace unfold {

inline constexpr std::size_t kDefaultMaxIterations = 1000;

/// f_0 = K^{-1} A_rho^T g, with K taken from the operator.
Histogram init(const CompositeOperator& op, const ResponseMatrix& response, const Histogram& measured);
/// Same, with K = K_rho computed from the response.
Histogram init(const ResponseMatrix& response, const Histogram& measured);

/// f_{N+1} = f_N + (f_0 - A f_N). Linear in (f0, fN); no clipping.
Eigen::VectorXd step(const CompositeOperator& op, const Eigen::VectorXd& f0,
                     const Eigen::VectorXd& fN);
Histogram step(const CompositeOperator& op, const Histogram& f0, const Histogram& fN);

/// Iterates f_0 .. f_{N_max} and the measure-weighted norms ||f_N|| and
/// ||f_{N+1} - f_N||. With store_iterates == false only the norms and the
/// final iterate are kept.
class IterationTrace {
 public:
  IterationTrace(CompositeOperator op, Eigen::VectorXd f0, std::size_t max_order,
                 bool store_iterates = true);

  const CompositeOperator& op() const noexcept { return op_; }
  const BinGrid& grid() const noexcept { return op_.truth_grid(); }
  std::size_t max_order() const noexcept { return norms_.size() - 1; }
  bool stores_iterates() const noexcept { return !iterates_.empty(); }

  const Eigen::VectorXd& f0() const noexcept { return f0_; }
  /// Throws InsufficientTrace when N is out of range or iterates were not kept.
  const Eigen::VectorXd& iterate(std::size_t order) const;
  Histogram histogram(std::size_t order) const { return Histogram(grid(), iterate(order)); }
  const Eigen::VectorXd& last() const noexcept { return last_; }

  /// ||f_N|| for N = 0..N_max.
  const std::vector<double>& norms() const noexcept { return norms_; }
  /// ||f_{N+1} - f_N|| for N = 0..N_max-1.
  const std::vector<double>& step_norms() const noexcept { return step_norms_; }

  /// ||f_M - f_N|| from stored iterates.
  double distance(std::size_t m, std::size_t n) const;

 private:
  CompositeOperator op_;
  Eigen::VectorXd f0_;
  std::vector<Eigen::VectorXd> iterates_;
  Eigen::VectorXd last_;
  std::vector<double> norms_;
  std::vector<double> step_norms_;
};

struct RunOptions {
  std::size_t max_order = kDefaultMaxIterations;
  /// Square smoothing kernel on the measured grid; applied to R and g first.
  std::optional<ResponseMatrix> smoothing;
  /// Replaces K_rho as the normalization (must be >= K_rho).
  std::optional<double> normalization;
  bool store_iterates = true;
};

IterationTrace run(const ResponseMatrix& response, const Histogram& measured,
                   const RunOptions& options = {});

/// Runs the iteration from a given f_0 on a prepared operator.
IterationTrace run_from(const CompositeOperator& op, const Eigen::VectorXd& f0,
                        std::size_t max_order, bool store_iterates = true);

/// The indicator-function families for a region U.
struct IndicatorIterates {
  /// xi_U = chi_U / Volume(U).
  Eigen::VectorXd xi;
  /// xi_{U,n}, n = 0..N: the iteration with unknown pdf xi_U (f_0 = A xi_U).
  std::vector<Eigen::VectorXd> xi_iterates;
  /// Xi_{U,n}, n = 0..N: Xi_0 = xi_U, Xi_{n+1} = Xi_n + (Xi_0 - A Xi_n).
  std::vector<Eigen::VectorXd> capital_xi_iterates;

  const Eigen::VectorXd& xi_at(std::size_t n) const { return xi_iterates.at(n); }
  const Eigen::VectorXd& capital_xi_at(std::size_t n) const { return capital_xi_iterates.at(n); }
};

IndicatorIterates indicator_iterates(const CompositeOperator& op, const CompactRegion& region,
                                     std::size_t max_order);

}  // namespace unfold
