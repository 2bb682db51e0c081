#include "unfold/oracle.hpp"

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <boost/random/poisson_distribution.hpp>

#include "unfold/error.hpp"
#include "unfold/folding.hpp"
#include "unfold/numeric.hpp"
#include "unfold/unfolder.hpp"

namespace unfold::oracle {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(seed + kGolden) ^ mix64(stream * kGolden + 0x632be59bd9b4e019ULL)) {}

CounterRng::result_type CounterRng::operator()() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double CounterRng::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

Spectral::Spectral(const ResponseMatrix& response, std::optional<double> normalization) {
  const auto m = static_cast<std::size_t>(response.cols());
  if (m > kMaxSpectralBins) {
    throw Error(ErrorCode::TooLarge, "spectral oracle is limited to " +
                                         std::to_string(kMaxSpectralBins) + " truth bins, got " +
                                         std::to_string(m));
  }
  const Eigen::MatrixXd& rho = response.rho();
  const Eigen::VectorXd& wy = response.measured_grid().widths();
  weights_ = response.truth_grid().widths();

  const Eigen::MatrixXd alpha = rho.transpose() * wy.asDiagonal() * rho;
  regularity_ = (weights_.transpose() * alpha).maxCoeff();
  if (!(regularity_ > 0.0)) throw Error(ErrorCode::ZeroResponse, "response matrix is identically zero");
  normalization_ = normalization.value_or(regularity_);

  sqrt_w_ = weights_.array().sqrt();
  inv_sqrt_w_ = sqrt_w_.cwiseInverse();
  const Eigen::MatrixXd sym =
      sqrt_w_.asDiagonal() * (alpha / normalization_) * sqrt_w_.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (sym + sym.transpose()));
  eigenvalues_ = solver.eigenvalues();
  eigenvectors_ = solver.eigenvectors();
  back_ = rho.transpose() * wy.asDiagonal() / normalization_;
}

std::size_t Spectral::kernel_dimension() const {
  const double cut = kKernelThreshold * std::max(eigenvalues_.maxCoeff(), 0.0);
  std::size_t dim = 0;
  for (Eigen::Index k = 0; k < eigenvalues_.size(); ++k) dim += eigenvalues_[k] <= cut ? 1 : 0;
  return dim;
}

Eigen::MatrixXd Spectral::kernel_projector() const {
  const double cut = kKernelThreshold * std::max(eigenvalues_.maxCoeff(), 0.0);
  return function_of([cut](double lambda) { return lambda <= cut ? 1.0 : 0.0; });
}

Eigen::MatrixXd Spectral::residual_operator(std::size_t power) const {
  return function_of([power](double lambda) {
    return std::pow(1.0 - lambda, static_cast<double>(power));
  });
}

Eigen::MatrixXd Spectral::partial_sum_operator(std::size_t order) const {
  return function_of([order](double lambda) {
    double sum = 0.0;
    double term = 1.0;
    for (std::size_t n = 0; n <= order; ++n) {
      sum += term;
      term *= 1.0 - lambda;
    }
    return sum;
  });
}

Eigen::MatrixXd Spectral::composite_matrix() const {
  return function_of([](double lambda) { return lambda; });
}

Eigen::MatrixXd Spectral::transfer(std::size_t order) const {
  return partial_sum_operator(order) * back_;
}

double Spectral::inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
  return (u.array() * v.array() * weights_.array()).sum();
}

double Spectral::norm(const Eigen::VectorXd& h) const { return std::sqrt(inner(h, h)); }

SpectralUnfold spectral_unfold(const ResponseMatrix& response, const Histogram& measured,
                               std::size_t order, std::optional<double> normalization) {
  if (!(measured.grid() == response.measured_grid())) {
    throw Error(ErrorCode::GridMismatch, "measured grid differs from the response");
  }
  Spectral spectral(response, normalization);
  SpectralUnfold out;
  out.f = spectral.transfer(order) * measured.values();
  out.kernel_projector = spectral.kernel_projector();
  out.spectrum = spectral.spectrum();
  return out;
}

Eigen::VectorXd expected_counts(const ResponseMatrix& response, const Histogram& truth,
                                double total_counts) {
  const Eigen::VectorXd& wx = truth.grid().widths();
  const Eigen::VectorXd& wy = response.measured_grid().widths();
  const Eigen::VectorXd g = response.rho() * (truth.values().array() * wx.array()).matrix();
  return (total_counts * g.array() * wy.array()).matrix();
}

namespace {

double poisson_draw(CounterRng& rng, double mean) {
  if (!(mean > 0.0)) return 0.0;
  boost::random::poisson_distribution<long, double> dist(mean);
  return static_cast<double>(dist(rng));
}

}  // namespace

Histogram poisson_sample(const BinGrid& grid, const Eigen::VectorXd& expected,
                         std::uint64_t seed, std::uint64_t stream) {
  CounterRng rng(seed, stream);
  Eigen::VectorXd counts(expected.size());
  for (Eigen::Index i = 0; i < expected.size(); ++i) counts[i] = poisson_draw(rng, expected[i]);
  return Histogram(grid, std::move(counts), HistogramKind::Counts);
}

Eigen::MatrixXd mc_covariance(const ResponseMatrix& response, const Histogram& truth,
                              double total_counts, std::size_t order, std::size_t replicas,
                              std::uint64_t seed, std::optional<double> normalization) {
  if (replicas < 1000) {
    throw Error(ErrorCode::BadReplicaCount, "Monte Carlo covariance needs at least 1000 replicas");
  }
  if ((truth.values().array() < 0.0).any() || !(total_counts >= 0.0)) {
    throw Error(ErrorCode::BadParams, "truth must be non-negative with a non-negative total");
  }
  const Eigen::VectorXd expected = expected_counts(response, truth, total_counts);
  const Eigen::VectorXd& wy = response.measured_grid().widths();
  const CompositeOperator op = composite(response, normalization);
  const auto m = static_cast<Eigen::Index>(response.cols());

  Eigen::MatrixXd samples(m, static_cast<Eigen::Index>(replicas));
  parallel_for(replicas, static_cast<std::size_t>(m * m) * (order + 1), [&](std::size_t r) {
    CounterRng rng(seed, r);
    Eigen::VectorXd g(expected.size());
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = poisson_draw(rng, expected[i]) / wy[i];
    const Histogram f0 = init(op, response, Histogram(response.measured_grid(), std::move(g)));
    const IterationTrace trace = run_from(op, f0.values(), order, false);
    samples.col(static_cast<Eigen::Index>(r)) = trace.last();
  });

  const Eigen::VectorXd mean = samples.rowwise().mean();
  const Eigen::MatrixXd centred = samples.colwise() - mean;
  return centred * centred.transpose() / static_cast<double>(replicas - 1);
}

std::string_view to_string(ToyKind kind) {
  switch (kind) {
    case ToyKind::GaussConvCyclic: return "gauss-cyclic";
    case ToyKind::GaussConvTruncated: return "gauss-truncated";
    case ToyKind::RankDeficient: return "rank-deficient";
    case ToyKind::ScaledIdentity: return "scaled-identity";
  }
  return "unknown";
}

std::optional<ToyKind> parse_toy_kind(std::string_view text) {
  for (ToyKind kind : {ToyKind::GaussConvCyclic, ToyKind::GaussConvTruncated,
                       ToyKind::RankDeficient, ToyKind::ScaledIdentity}) {
    if (text == to_string(kind)) return kind;
  }
  return std::nullopt;
}

namespace {

// Two-peak truth on a unit grid, positions jittered by the seed.
Histogram peaked_truth(const BinGrid& grid, std::uint64_t seed) {
  CounterRng rng(seed, 0x7275746bULL);
  const double span = grid.edges().back() - grid.edges().front();
  const double lo = grid.edges().front();
  const double c1 = lo + span * (0.30 + 0.05 * rng.uniform());
  const double c2 = lo + span * (0.62 + 0.05 * rng.uniform());
  const double s1 = span * (0.07 + 0.03 * rng.uniform());
  const double s2 = span * (0.09 + 0.03 * rng.uniform());
  Eigen::VectorXd v(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double x = grid.center(j);
    const double a = (x - c1) / s1;
    const double b = (x - c2) / s2;
    v[static_cast<Eigen::Index>(j)] = 0.6 * std::exp(-0.5 * a * a) / s1 +
                                      0.4 * std::exp(-0.5 * b * b) / s2 + 0.02 / span;
  }
  const double mass = (v.array() * grid.widths().array()).sum();
  return Histogram(grid, v / mass);
}

}  // namespace

Toy make_toy(ToyKind kind, std::size_t m, std::size_t n, const ToyParams& params,
             std::uint64_t seed) {
  if (m < 2) throw Error(ErrorCode::BadParams, "toy problems need at least 2 truth bins");
  const BinGrid truth_grid = BinGrid::uniform(m);
  Histogram truth = peaked_truth(truth_grid, seed);
  const auto require_square = [&] {
    if (n != m && n != 0) throw Error(ErrorCode::BadParams, "this toy kind is square (n == m)");
  };
  switch (kind) {
    case ToyKind::GaussConvCyclic:
      require_square();
      return {cyclic_gaussian_kernel(truth_grid, params.sigma), std::move(truth), std::nullopt};
    case ToyKind::GaussConvTruncated:
      require_square();
      return {gaussian_kernel(truth_grid, params.sigma), std::move(truth), std::nullopt};
    case ToyKind::ScaledIdentity: {
      require_square();
      if (!(params.scale > 0.0 && params.scale <= 1.0)) {
        throw Error(ErrorCode::BadParams, "ScaledIdentity needs 0 < c <= 1");
      }
      ResponseMatrix identity(truth_grid, truth_grid,
                              Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(m),
                                                        static_cast<Eigen::Index>(m)));
      return {std::move(identity), std::move(truth), 1.0 / params.scale};
    }
    case ToyKind::RankDeficient: {
      const std::size_t rows = n == 0 ? m - 1 : n;
      if (rows >= m || rows < 1) {
        throw Error(ErrorCode::BadParams, "RankDeficient needs fewer measured than truth bins");
      }
      const BinGrid measured = BinGrid::uniform(rows);
      Eigen::MatrixXd rho = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows),
                                                  static_cast<Eigen::Index>(m));
      for (std::size_t j = 0; j < m; ++j) {
        // bins 0 and 1 always share the target; the rest spread over the grid
        const std::size_t target = j == 0 ? 0 : ((j - 1) * rows) / (m - 1);
        const auto col = static_cast<Eigen::Index>(j);
        rho(static_cast<Eigen::Index>(target), col) += 0.7;
        if (target > 0) rho(static_cast<Eigen::Index>(target - 1), col) += 0.15;
        if (target + 1 < rows) rho(static_cast<Eigen::Index>(target + 1), col) += 0.15;
      }
      return {ResponseMatrix(measured, truth_grid, std::move(rho)), std::move(truth), std::nullopt};
    }
  }
  throw Error(ErrorCode::BadParams, "unknown toy kind");
}

namespace {

BinGrid random_grid(std::size_t bins, CounterRng& rng, bool random_widths) {
  std::vector<double> edges(bins + 1, 0.0);
  for (std::size_t k = 0; k < bins; ++k) {
    edges[k + 1] = edges[k] + (random_widths ? 0.5 + rng.uniform() : 1.0);
  }
  return BinGrid(std::move(edges));
}

}  // namespace

ResponseMatrix random_response(std::size_t m, std::size_t n, CounterRng& rng,
                               const RandomResponseOptions& options) {
  if (m == 0 || n == 0) throw Error(ErrorCode::BadParams, "random response needs bins");
  const BinGrid truth = random_grid(m, rng, options.random_widths);
  const BinGrid measured = random_grid(n, rng, options.random_widths);
  Eigen::MatrixXd rho(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < m; ++j) {
    Eigen::VectorXd r(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < r.size(); ++i) r[i] = rng.uniform();
    r /= r.sum();
    Eigen::VectorXd prob = (1.0 - options.structured_weight) * r;
    prob[static_cast<Eigen::Index>((j * n) / m)] += options.structured_weight;
    const double efficiency =
        options.min_efficiency + (1.0 - options.min_efficiency) * rng.uniform();
    prob *= efficiency / prob.sum();
    rho.col(static_cast<Eigen::Index>(j)) = prob.array() / measured.widths().array();
  }
  return ResponseMatrix(measured, truth, std::move(rho));
}

Histogram random_truth(const BinGrid& grid, CounterRng& rng) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(grid.size()));
  for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = 0.2 + rng.uniform();
  const double mass = (v.array() * grid.widths().array()).sum();
  return Histogram(grid, v / mass);
}

}  // namespace unfold::oracle
