#pragma once

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "unfold/folding.hpp"
#include "unfold/histogram.hpp"

namespace unfold {

// ---------------------------------------------------------------------------
// Statistical errors
// ---------------------------------------------------------------------------

/// Poisson factor for a counts histogram, in the counts-scaled density
/// convention (g_i = c_i / w_i): Err = diag(sqrt(c_i) / w_i), so that
/// Err * Err^T = Cov(g).
ErrorMatrix err_from_poisson(const Histogram& counts);

/// Err' = eta o Err, the factor of the smoothed measurement eta * g.
ErrorMatrix smooth_error(const ResponseMatrix& kernel, const ErrorMatrix& err);

/// E_0 = K^{-1} A_rho^T Err(g). Column c is exactly init() applied to the
/// c-th column of Err(g).
Eigen::MatrixXd initial_error(const CompositeOperator& op, const ResponseMatrix& response,
                              const ErrorMatrix& err);

/// One step of E_{N+1} = E_N + (E_0 - A E_N), column by column through the
/// same step() used for the iterates.
Eigen::MatrixXd step_error(const CompositeOperator& op, const Eigen::MatrixXd& e0,
                           const Eigen::MatrixXd& eN);

/// E_N with Cov(f_N) = E_N E_N^T.
ErrorMatrix propagate_stat(const CompositeOperator& op, const ResponseMatrix& response,
                           const ErrorMatrix& err, std::size_t order);
ErrorMatrix propagate_stat(const ResponseMatrix& response, const ErrorMatrix& err,
                           std::size_t order);

/// sigma_j = sqrt(Cov(j, j)) as a histogram on `grid`.
Histogram stat_errors(const ErrorMatrix& e, const BinGrid& grid);
Eigen::VectorXd stat_sigma(const ErrorMatrix& e);

/// sigma(N) for every N = 0..max_order, without keeping the E_N.
std::vector<Eigen::VectorXd> stat_sigma_trace(const CompositeOperator& op,
                                              const ResponseMatrix& response,
                                              const ErrorMatrix& err, std::size_t max_order);

// ---------------------------------------------------------------------------
// Systematic errors
// ---------------------------------------------------------------------------

/// |delta g| <= sg, sg on the measured grid (same units as g).
struct MeasuredPdfEnvelope {
  Histogram sg;
};

/// |delta rho| <= s_rho, shaped like the response.
struct ResponseEnvelope {
  ResponseMatrix srho;
};

using SystematicSpec = std::variant<MeasuredPdfEnvelope, ResponseEnvelope>;

/// C = ||K^{-1} A_rho^T sg||.
double c_factor(const ResponseMatrix& response, const Histogram& sg,
                std::optional<double> normalization = std::nullopt);

/// D^2 = max_x sum_z w[z] sum_w B(w, z) B(w, x) w[w] with
/// B = K^{-1} A_rho^T A_{s_rho} as a truth-to-truth kernel.
double d_factor(const ResponseMatrix& response, const ResponseMatrix& srho,
                std::optional<double> normalization = std::nullopt);

enum class SystematicKind { MeasuredPdf, Response };

struct SystematicFactor {
  SystematicKind kind;
  double value;  ///< C for MeasuredPdf, D for Response
};

SystematicFactor systematic_factor(const ResponseMatrix& response, const SystematicSpec& spec,
                                   std::optional<double> normalization = std::nullopt);

/// Bound on |avg_U delta f_N|: ||Xi_{U,N}|| C, or ||Xi_{U,N}|| D ||f|| where
/// ||f|| is replaced by the supplied estimate (typically (1 + eps) ||f_M||).
/// Throws MissingNormEstimate for the response variant without an estimate.
double syst_bound(const Histogram& capital_xi, const SystematicFactor& factor,
                  std::optional<double> fnorm_estimate = std::nullopt);

}  // namespace unfold
