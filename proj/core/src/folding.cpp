#include "unfold/folding.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "unfold/error.hpp"
#include "unfold/numeric.hpp"

namespace unfold {

namespace {

void require_grid(const BinGrid& expected, const BinGrid& actual, const char* what) {
  if (!(expected == actual)) throw Error(ErrorCode::GridMismatch, what);
}

void require_size(std::size_t expected, Eigen::Index actual, const char* what) {
  if (static_cast<std::size_t>(actual) != expected) throw Error(ErrorCode::GridMismatch, what);
}

// Probability that N(centre, sigma) falls in [lo, hi).
double gaussian_bin_mass(double lo, double hi, double centre, double sigma) {
  const double scale = 1.0 / (sigma * std::sqrt(2.0));
  const double a = (lo - centre) * scale;
  const double b = (hi - centre) * scale;
  // erfc keeps precision in the far tails on either side
  if (a >= 0.0) return 0.5 * (std::erfc(a) - std::erfc(b));
  if (b <= 0.0) return 0.5 * (std::erfc(-b) - std::erfc(-a));
  return 1.0 - 0.5 * (std::erfc(-a) + std::erfc(b));
}

}  // namespace

Eigen::VectorXd fold_values(const ResponseMatrix& response, const Eigen::VectorXd& truth) {
  require_size(response.cols(), truth.size(), "fold: truth histogram does not match response");
  const Eigen::MatrixXd& rho = response.rho();
  const Eigen::VectorXd& wx = response.truth_grid().widths();
  const std::size_t m = response.cols();
  Eigen::VectorXd out(rho.rows());
  parallel_for(response.rows(), m, [&](std::size_t k) {
    const auto i = static_cast<Eigen::Index>(k);
    out[i] = ordered_sum(m, [&](std::size_t c) {
      const auto j = static_cast<Eigen::Index>(c);
      return rho(i, j) * truth[j] * wx[j];
    });
  });
  return out;
}

Eigen::VectorXd transpose_fold_values(const ResponseMatrix& response,
                                      const Eigen::VectorXd& measured) {
  require_size(response.rows(), measured.size(),
               "transpose_fold: measured histogram does not match response");
  const Eigen::MatrixXd& rho = response.rho();
  const Eigen::VectorXd& wy = response.measured_grid().widths();
  const std::size_t n = response.rows();
  Eigen::VectorXd out(rho.cols());
  parallel_for(response.cols(), n, [&](std::size_t c) {
    const auto j = static_cast<Eigen::Index>(c);
    out[j] = ordered_sum(n, [&](std::size_t k) {
      const auto i = static_cast<Eigen::Index>(k);
      return measured[i] * rho(i, j) * wy[i];
    });
  });
  return out;
}

Histogram fold(const ResponseMatrix& response, const Histogram& truth) {
  require_grid(response.truth_grid(), truth.grid(), "fold: truth grid differs from response");
  return Histogram(response.measured_grid(), fold_values(response, truth.values()));
}

Histogram transpose_fold(const ResponseMatrix& response, const Histogram& measured) {
  require_grid(response.measured_grid(), measured.grid(),
               "transpose_fold: measured grid differs from response");
  return Histogram(response.truth_grid(), transpose_fold_values(response, measured.values()));
}

Eigen::MatrixXd overlap_kernel(const ResponseMatrix& response) {
  const Eigen::MatrixXd& rho = response.rho();
  const Eigen::VectorXd& wy = response.measured_grid().widths();
  const std::size_t n = response.rows();
  const auto m = static_cast<Eigen::Index>(response.cols());
  Eigen::MatrixXd alpha(m, m);
  // lower triangle per row, then mirrored: alpha is symmetric bit for bit
  parallel_for(response.cols(), response.cols() * n, [&](std::size_t zk) {
    const auto z = static_cast<Eigen::Index>(zk);
    for (Eigen::Index j = 0; j <= z; ++j) {
      alpha(z, j) = ordered_sum(n, [&](std::size_t k) {
        const auto i = static_cast<Eigen::Index>(k);
        return rho(i, z) * rho(i, j) * wy[i];
      });
    }
  });
  for (Eigen::Index z = 0; z < m; ++z) {
    for (Eigen::Index j = z + 1; j < m; ++j) alpha(z, j) = alpha(j, z);
  }
  return alpha;
}

namespace {

double regularity_of(const Eigen::MatrixXd& alpha, const Eigen::VectorXd& wx) {
  const auto m = static_cast<std::size_t>(alpha.rows());
  double best = 0.0;
  for (Eigen::Index j = 0; j < alpha.cols(); ++j) {
    const double col = ordered_sum(m, [&](std::size_t k) {
      const auto z = static_cast<Eigen::Index>(k);
      return wx[z] * alpha(z, j);
    });
    best = std::max(best, col);
  }
  return best;
}

}  // namespace

double compute_K(const ResponseMatrix& response) {
  const double k = regularity_of(overlap_kernel(response), response.truth_grid().widths());
  if (!(k > 0.0)) throw Error(ErrorCode::ZeroResponse, "response matrix is identically zero");
  return k;
}

CompositeOperator::CompositeOperator(BinGrid truth_grid, Eigen::MatrixXd kernel,
                                     double normalization)
    : grid_(std::move(truth_grid)), kernel_(std::move(kernel)), normalization_(normalization) {
  const auto m = static_cast<Eigen::Index>(grid_.size());
  if (kernel_.rows() != m || kernel_.cols() != m) {
    throw Error(ErrorCode::ShapeMismatch, "composite kernel must be square over the truth grid");
  }
  if (!kernel_.allFinite() || !(normalization_ > 0.0) || !std::isfinite(normalization_)) {
    throw Error(ErrorCode::InvalidArgument, "composite operator needs finite entries and K > 0");
  }
}

CompositeOperator CompositeOperator::scaled_identity(const BinGrid& grid, double c) {
  const auto m = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd kernel = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index j = 0; j < m; ++j) kernel(j, j) = c / grid.widths()[j];
  return CompositeOperator(grid, std::move(kernel), c > 0.0 ? 1.0 / c : 1.0);
}

Eigen::VectorXd CompositeOperator::apply(const Eigen::VectorXd& f) const {
  require_size(grid_.size(), f.size(), "composite operator applied to a foreign histogram");
  const std::size_t m = grid_.size();
  const Eigen::VectorXd& wx = grid_.widths();
  Eigen::VectorXd out(f.size());
  parallel_for(m, m, [&](std::size_t zk) {
    const auto z = static_cast<Eigen::Index>(zk);
    out[z] = ordered_sum(m, [&](std::size_t k) {
      const auto j = static_cast<Eigen::Index>(k);
      return kernel_(z, j) * f[j] * wx[j];
    });
  });
  return out;
}

Eigen::MatrixXd CompositeOperator::matrix() const {
  return kernel_ * grid_.widths().asDiagonal();
}

CompositeOperator composite(const ResponseMatrix& response, std::optional<double> normalization) {
  Eigen::MatrixXd alpha = overlap_kernel(response);
  const double k_rho = regularity_of(alpha, response.truth_grid().widths());
  if (!(k_rho > 0.0)) throw Error(ErrorCode::ZeroResponse, "response matrix is identically zero");
  double k = k_rho;
  if (normalization) {
    if (!(*normalization >= k_rho * (1.0 - 1e-12))) {
      throw Error(ErrorCode::BadParams, "normalization " + std::to_string(*normalization) +
                                            " is below the regularity constant " +
                                            std::to_string(k_rho));
    }
    k = *normalization;
  }
  alpha /= k;
  return CompositeOperator(response.truth_grid(), std::move(alpha), k);
}

ResponseMatrix gaussian_kernel(const BinGrid& grid, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::NonPositiveSigma, "gaussian kernel width must be positive");
  }
  const auto n = static_cast<Eigen::Index>(grid.size());
  const auto& edges = grid.edges();
  Eigen::MatrixXd rho(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double centre = grid.center(static_cast<std::size_t>(j));
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      rho(i, j) = gaussian_bin_mass(edges[ii], edges[ii + 1], centre, sigma) / grid.widths()[i];
    }
  }
  return ResponseMatrix(grid, grid, std::move(rho));
}

ResponseMatrix cyclic_gaussian_kernel(const BinGrid& grid, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::NonPositiveSigma, "gaussian kernel width must be positive");
  }
  const std::size_t n = grid.size();
  const double width = grid.width(0);
  for (std::size_t k = 1; k < n; ++k) {
    if (std::abs(grid.width(k) - width) > 1e-12 * width) {
      throw Error(ErrorCode::InvalidArgument, "cyclic kernel needs a uniform grid");
    }
  }
  // wrapped probability of each offset, summed over enough periodic images
  std::vector<double> offset_mass(n, 0.0);
  const double sigma_bins = sigma / width;
  const auto images = static_cast<long>(std::ceil((12.0 * sigma_bins + 1.0) / static_cast<double>(n)));
  for (std::size_t d = 0; d < n; ++d) {
    for (long p = -images; p <= images; ++p) {
      const double offset = static_cast<double>(d) + static_cast<double>(p) * static_cast<double>(n);
      offset_mass[d] += gaussian_bin_mass(offset - 0.5, offset + 0.5, 0.0, sigma_bins);
    }
  }
  const double total = ordered_sum(n, [&](std::size_t d) { return offset_mass[d]; });
  const auto nn = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd rho(nn, nn);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          offset_mass[(i + n - j) % n] / total / width;
    }
  }
  return ResponseMatrix(grid, grid, std::move(rho));
}

ResponseMatrix compose(const ResponseMatrix& kernel, const ResponseMatrix& response) {
  if (!(kernel.truth_grid() == response.measured_grid())) {
    throw Error(ErrorCode::GridMismatch, "kernel input grid differs from the response's measured grid");
  }
  const Eigen::MatrixXd& eta = kernel.rho();
  const Eigen::MatrixXd& rho = response.rho();
  const Eigen::VectorXd& wy = response.measured_grid().widths();
  const std::size_t n = response.rows();
  Eigen::MatrixXd out(eta.rows(), rho.cols());
  parallel_for(kernel.rows(), n * response.cols(), [&](std::size_t kk) {
    const auto k = static_cast<Eigen::Index>(kk);
    for (Eigen::Index j = 0; j < rho.cols(); ++j) {
      out(k, j) = ordered_sum(n, [&](std::size_t ik) {
        const auto i = static_cast<Eigen::Index>(ik);
        return eta(k, i) * rho(i, j) * wy[i];
      });
    }
  });
  return ResponseMatrix::envelope(kernel.measured_grid(), response.truth_grid(), std::move(out));
}

std::pair<ResponseMatrix, Histogram> precondition(const ResponseMatrix& response,
                                                  const Histogram& measured,
                                                  const ResponseMatrix& kernel) {
  if (!(kernel.measured_grid() == response.measured_grid()) ||
      !(kernel.truth_grid() == response.measured_grid())) {
    throw Error(ErrorCode::GridMismatch, "smoothing kernel must be square on the measured grid");
  }
  require_grid(response.measured_grid(), measured.grid(),
               "precondition: measured grid differs from response");
  ResponseMatrix smoothed = compose(kernel, response);
  // composing two column-normalized maps stays column-normalized; re-validate
  ResponseMatrix checked(smoothed.measured_grid(), smoothed.truth_grid(), smoothed.rho());
  return {std::move(checked), fold(kernel, measured)};
}

}  // namespace unfold
