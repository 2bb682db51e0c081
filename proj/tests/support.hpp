#pragma once

// Small builders shared by the test suites.

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "unfold/histogram.hpp"
#include "unfold/oracle.hpp"

namespace unfold::testing {

inline BinGrid unit_grid(std::size_t n) { return BinGrid::uniform(n); }

inline Histogram density(const BinGrid& grid, std::vector<double> v) {
  return Histogram(grid, Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
}

inline Histogram counts(const BinGrid& grid, std::vector<double> v) {
  return Histogram(grid, Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())),
                   HistogramKind::Counts);
}

/// rho(i, i) = 1 / w_i: every event stays in its bin.
inline ResponseMatrix identity_response(const BinGrid& grid) {
  Eigen::VectorXd d = grid.widths().cwiseInverse();
  return ResponseMatrix(grid, grid, d.asDiagonal().toDenseMatrix());
}

inline ResponseMatrix identity_response(std::size_t n) { return identity_response(unit_grid(n)); }

/// rho = 0.5 everywhere on two unit bins.
inline ResponseMatrix uniform2() {
  return ResponseMatrix(unit_grid(2), unit_grid(2), Eigen::MatrixXd::Constant(2, 2, 0.5));
}

inline double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

struct Instance {
  ResponseMatrix response;
  Histogram truth;
};

/// Random response of size n x m (both drawn in [lo, hi]) with a random truth.
inline Instance random_instance(std::uint64_t seed, std::size_t lo = 2, std::size_t hi = 32,
                                const oracle::RandomResponseOptions& options = {}) {
  oracle::CounterRng rng(seed, 0);
  const auto draw = [&] { return lo + static_cast<std::size_t>(rng.uniform() * static_cast<double>(hi - lo + 1)); };
  const std::size_t m = draw();
  const std::size_t n = draw();
  ResponseMatrix r = oracle::random_response(m, n, rng, options);
  Histogram f = oracle::random_truth(r.truth_grid(), rng);
  return {std::move(r), std::move(f)};
}

}  // namespace unfold::testing
