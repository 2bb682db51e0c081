#pragma once

// Reference implementations used to validate the iteration: a dense
// eigendecomposition of the composite operator, Monte Carlo covariance and
// toy-problem generators. Nothing here calls the iterative code path except
// mc_covariance, which deliberately unfolds every replica with it.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>

#include <Eigen/Core>

#include "unfold/histogram.hpp"

namespace unfold::oracle {

inline constexpr std::size_t kMaxSpectralBins = 64;
inline constexpr double kKernelThreshold = 1e-10;

/// SplitMix64 used as a counter-based generator: the k-th output of stream
/// (seed, stream) is a pure function of (seed, stream, k).
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  double uniform();  ///< in [0, 1)

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Eigendecomposition of A = K^{-1} A_rho^T A_rho in the measure-weighted
/// inner product, via the symmetric matrix W^{1/2} (alpha / K) W^{1/2}.
class Spectral {
 public:
  explicit Spectral(const ResponseMatrix& response,
                    std::optional<double> normalization = std::nullopt);

  double normalization() const noexcept { return normalization_; }
  double regularity() const noexcept { return regularity_; }
  /// Ascending eigenvalues.
  const Eigen::VectorXd& spectrum() const noexcept { return eigenvalues_; }
  std::size_t kernel_dimension() const;

  /// Matrix of phi(A) acting on density vectors.
  template <typename Phi>
  Eigen::MatrixXd function_of(Phi phi) const {
    Eigen::VectorXd d(eigenvalues_.size());
    for (Eigen::Index k = 0; k < d.size(); ++k) d[k] = phi(eigenvalues_[k]);
    return inv_sqrt_w_.asDiagonal() * eigenvectors_ * d.asDiagonal() *
           eigenvectors_.transpose() * sqrt_w_.asDiagonal();
  }

  /// W-orthogonal projector onto span of eigenvalues below the threshold.
  Eigen::MatrixXd kernel_projector() const;
  /// (I - A)^p.
  Eigen::MatrixXd residual_operator(std::size_t power) const;
  /// sum_{n<=N} (I - A)^n.
  Eigen::MatrixXd partial_sum_operator(std::size_t order) const;
  /// The composite operator itself (as a plain matrix on densities).
  Eigen::MatrixXd composite_matrix() const;
  /// K^{-1} A_rho^T as an m x n matrix on densities.
  const Eigen::MatrixXd& back_projection() const noexcept { return back_; }
  /// T_N = sum_{n<=N} (I - A)^n K^{-1} A_rho^T, so f_N = T_N g.
  Eigen::MatrixXd transfer(std::size_t order) const;

  /// L2 norm with the truth widths.
  double norm(const Eigen::VectorXd& h) const;
  double inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;

 private:
  double normalization_ = 0.0;
  double regularity_ = 0.0;
  Eigen::VectorXd weights_;
  Eigen::VectorXd sqrt_w_;
  Eigen::VectorXd inv_sqrt_w_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
  Eigen::MatrixXd back_;
};

struct SpectralUnfold {
  Eigen::VectorXd f;
  Eigen::MatrixXd kernel_projector;
  Eigen::VectorXd spectrum;
};

/// f_N by the closed form sum_k [sum_{n<=N} (1 - lambda_k)^n] <u_k, f_0> u_k.
/// Throws TooLarge above kMaxSpectralBins truth bins.
SpectralUnfold spectral_unfold(const ResponseMatrix& response, const Histogram& measured,
                               std::size_t order,
                               std::optional<double> normalization = std::nullopt);

/// Empirical covariance of f_N over Poisson replicas of the expected counts
/// total * fold(R, f_true) * w_y. Each replica is unfolded with the library
/// iteration; replica r draws from CounterRng(seed, r).
Eigen::MatrixXd mc_covariance(const ResponseMatrix& response, const Histogram& truth,
                              double total_counts, std::size_t order, std::size_t replicas,
                              std::uint64_t seed,
                              std::optional<double> normalization = std::nullopt);

/// Expected counts per measured bin for a unit-mass truth scaled to `total_counts`.
Eigen::VectorXd expected_counts(const ResponseMatrix& response, const Histogram& truth,
                                double total_counts);

/// One Poisson draw per bin from CounterRng(seed, stream).
Histogram poisson_sample(const BinGrid& grid, const Eigen::VectorXd& expected,
                         std::uint64_t seed, std::uint64_t stream = 0);

enum class ToyKind { GaussConvCyclic, GaussConvTruncated, RankDeficient, ScaledIdentity };

std::string_view to_string(ToyKind kind);
/// Accepts "gauss-cyclic", "gauss-truncated", "rank-deficient", "scaled-identity".
std::optional<ToyKind> parse_toy_kind(std::string_view text);

struct ToyParams {
  double sigma = 2.0;  ///< Gaussian width in bins (GaussConv kinds)
  double scale = 0.5;  ///< c of ScaledIdentity(c)
};

struct Toy {
  ResponseMatrix response;
  Histogram truth;  ///< non-negative, unit mass
  /// K to use instead of K_rho (ScaledIdentity only: 1 / c).
  std::optional<double> normalization;
};

/// Unit-width toy problems. GaussConv kinds and ScaledIdentity are square
/// (n == m); RankDeficient uses n = m - 1 measured bins with truth bins 0
/// and 1 sharing one column, so the kernel is at least one-dimensional.
Toy make_toy(ToyKind kind, std::size_t m, std::size_t n, const ToyParams& params,
             std::uint64_t seed);

struct RandomResponseOptions {
  /// Weight of the structured (near-diagonal) part; the rest is random.
  double structured_weight = 0.6;
  bool random_widths = true;
  /// Column efficiencies are drawn uniformly in [min_efficiency, 1].
  double min_efficiency = 0.6;
};

/// Random valid response (n measured x m truth bins). Truth bin j maps
/// mostly to measured bin floor(j * n / m); when n < m this leaves a kernel.
ResponseMatrix random_response(std::size_t m, std::size_t n, CounterRng& rng,
                               const RandomResponseOptions& options = {});

/// Strictly positive unit-mass density on `grid`.
Histogram random_truth(const BinGrid& grid, CounterRng& rng);

}  // namespace unfold::oracle
