#include "unfold/propagation.hpp"

#include <cmath>

#include "unfold/error.hpp"
#include "unfold/numeric.hpp"
#include "unfold/unfolder.hpp"

namespace unfold {

ErrorMatrix err_from_poisson(const Histogram& counts) {
  if ((counts.values().array() < 0.0).any()) {
    throw Error(ErrorCode::NegativeCounts, "Poisson errors need non-negative counts");
  }
  const auto n = static_cast<Eigen::Index>(counts.size());
  Eigen::MatrixXd factor = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    factor(i, i) = std::sqrt(counts.values()[i]) / counts.grid().widths()[i];
  }
  return ErrorMatrix(std::move(factor));
}

ErrorMatrix smooth_error(const ResponseMatrix& kernel, const ErrorMatrix& err) {
  if (static_cast<std::size_t>(err.rows()) != kernel.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "error factor rows differ from the kernel's input bins");
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(kernel.rows()), err.cols());
  for (Eigen::Index c = 0; c < err.cols(); ++c) {
    out.col(c) = fold_values(kernel, err.factor().col(c));
  }
  return ErrorMatrix(std::move(out));
}

Eigen::MatrixXd initial_error(const CompositeOperator& op, const ResponseMatrix& response,
                              const ErrorMatrix& err) {
  if (static_cast<std::size_t>(err.rows()) != response.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "error factor has " + std::to_string(err.rows()) +
                                              " rows, response has " +
                                              std::to_string(response.rows()) + " measured bins");
  }
  if (!(op.truth_grid() == response.truth_grid())) {
    throw Error(ErrorCode::GridMismatch, "operator and response use different truth grids");
  }
  Eigen::MatrixXd e0(static_cast<Eigen::Index>(response.cols()), err.cols());
  for (Eigen::Index c = 0; c < err.cols(); ++c) {
    Histogram column(response.measured_grid(), err.factor().col(c));
    e0.col(c) = init(op, response, column).values();
  }
  return e0;
}

Eigen::MatrixXd step_error(const CompositeOperator& op, const Eigen::MatrixXd& e0,
                           const Eigen::MatrixXd& eN) {
  if (e0.rows() != eN.rows() || e0.cols() != eN.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "E_0 and E_N differ in shape");
  }
  Eigen::MatrixXd next(eN.rows(), eN.cols());
  for (Eigen::Index c = 0; c < eN.cols(); ++c) {
    next.col(c) = step(op, Eigen::VectorXd(e0.col(c)), Eigen::VectorXd(eN.col(c)));
  }
  return next;
}

ErrorMatrix propagate_stat(const CompositeOperator& op, const ResponseMatrix& response,
                           const ErrorMatrix& err, std::size_t order) {
  const Eigen::MatrixXd e0 = initial_error(op, response, err);
  Eigen::MatrixXd e = e0;
  for (std::size_t n = 0; n < order; ++n) e = step_error(op, e0, e);
  return ErrorMatrix(std::move(e));
}

ErrorMatrix propagate_stat(const ResponseMatrix& response, const ErrorMatrix& err,
                           std::size_t order) {
  return propagate_stat(composite(response), response, err, order);
}

Eigen::VectorXd stat_sigma(const ErrorMatrix& e) {
  const auto& f = e.factor();
  Eigen::VectorXd sigma(f.rows());
  const auto cols = static_cast<std::size_t>(f.cols());
  for (Eigen::Index r = 0; r < f.rows(); ++r) {
    const double var = ordered_sum(cols, [&](std::size_t k) {
      const double v = f(r, static_cast<Eigen::Index>(k));
      return v * v;
    });
    sigma[r] = std::sqrt(var);
  }
  return sigma;
}

Histogram stat_errors(const ErrorMatrix& e, const BinGrid& grid) {
  if (static_cast<std::size_t>(e.rows()) != grid.size()) {
    throw Error(ErrorCode::GridMismatch, "error factor rows differ from the grid size");
  }
  return Histogram(grid, stat_sigma(e));
}

std::vector<Eigen::VectorXd> stat_sigma_trace(const CompositeOperator& op,
                                              const ResponseMatrix& response,
                                              const ErrorMatrix& err, std::size_t max_order) {
  const Eigen::MatrixXd e0 = initial_error(op, response, err);
  std::vector<Eigen::VectorXd> sigmas;
  sigmas.reserve(max_order + 1);
  Eigen::MatrixXd e = e0;
  sigmas.push_back(stat_sigma(ErrorMatrix(e)));
  for (std::size_t n = 0; n < max_order; ++n) {
    e = step_error(op, e0, e);
    sigmas.push_back(stat_sigma(ErrorMatrix(e)));
  }
  return sigmas;
}

namespace {

double normalization_for(const ResponseMatrix& response, std::optional<double> normalization) {
  return normalization ? *normalization : compute_K(response);
}

}  // namespace

double c_factor(const ResponseMatrix& response, const Histogram& sg,
                std::optional<double> normalization) {
  if (!(sg.grid() == response.measured_grid())) {
    throw Error(ErrorCode::GridMismatch, "sg must live on the measured grid");
  }
  if ((sg.values().array() < 0.0).any()) {
    throw Error(ErrorCode::InvalidArgument, "sg must be non-negative");
  }
  const double k = normalization_for(response, normalization);
  const Eigen::VectorXd back = transpose_fold_values(response, sg.values()) / k;
  return weighted_norm(back, response.truth_grid().widths());
}

double d_factor(const ResponseMatrix& response, const ResponseMatrix& srho,
                std::optional<double> normalization) {
  if (!(srho.measured_grid() == response.measured_grid()) ||
      !(srho.truth_grid() == response.truth_grid())) {
    throw Error(ErrorCode::ShapeMismatch, "s_rho must have the response's shape and grids");
  }
  const double k = normalization_for(response, normalization);
  const Eigen::MatrixXd& rho = response.rho();
  const Eigen::MatrixXd& s = srho.rho();
  const Eigen::VectorXd& wy = response.measured_grid().widths();
  const Eigen::VectorXd& wx = response.truth_grid().widths();
  const std::size_t n = response.rows();
  const std::size_t m = response.cols();
  const auto mm = static_cast<Eigen::Index>(m);

  // B(w, x) = K^{-1} sum_i rho(i, w) s(i, x) w_y[i]
  Eigen::MatrixXd b(mm, mm);
  parallel_for(m, m * n, [&](std::size_t wk) {
    const auto w = static_cast<Eigen::Index>(wk);
    for (Eigen::Index x = 0; x < mm; ++x) {
      b(w, x) = ordered_sum(n, [&](std::size_t ik) {
                  const auto i = static_cast<Eigen::Index>(ik);
                  return rho(i, w) * s(i, x) * wy[i];
                }) / k;
    }
  });
  // (B^T B)(z, x) = sum_w B(w, z) B(w, x) w_x[w]; D^2 = max_x sum_z w_x[z] (B^T B)(z, x)
  Eigen::VectorXd column_mass(mm);
  parallel_for(m, m * m, [&](std::size_t xk) {
    const auto x = static_cast<Eigen::Index>(xk);
    column_mass[x] = ordered_sum(m, [&](std::size_t zk) {
      const auto z = static_cast<Eigen::Index>(zk);
      const double btb = ordered_sum(m, [&](std::size_t wk) {
        const auto w = static_cast<Eigen::Index>(wk);
        return b(w, z) * b(w, x) * wx[w];
      });
      return wx[z] * btb;
    });
  });
  return std::sqrt(mm > 0 ? column_mass.maxCoeff() : 0.0);
}

SystematicFactor systematic_factor(const ResponseMatrix& response, const SystematicSpec& spec,
                                   std::optional<double> normalization) {
  if (const auto* pdf = std::get_if<MeasuredPdfEnvelope>(&spec)) {
    return {SystematicKind::MeasuredPdf, c_factor(response, pdf->sg, normalization)};
  }
  const auto& env = std::get<ResponseEnvelope>(spec);
  return {SystematicKind::Response, d_factor(response, env.srho, normalization)};
}

double syst_bound(const Histogram& capital_xi, const SystematicFactor& factor,
                  std::optional<double> fnorm_estimate) {
  const double xi_norm = capital_xi.l2_norm();
  if (factor.kind == SystematicKind::MeasuredPdf) return xi_norm * factor.value;
  if (!fnorm_estimate) {
    throw Error(ErrorCode::MissingNormEstimate,
                "the response-envelope bound needs an estimate of ||f||");
  }
  return xi_norm * factor.value * *fnorm_estimate;
}

}  // namespace unfold
