#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace unfold {

/// One-dimensional binning. Edges are strictly increasing and finite; the
/// widths define the discrete measure every integral in the library uses.
class BinGrid {
 public:
  explicit BinGrid(std::vector<double> edges);

  /// `bins` equal bins of width `width` starting at `lo`.
  static BinGrid uniform(std::size_t bins, double lo = 0.0, double width = 1.0);

  std::size_t size() const noexcept { return widths_.size(); }
  const std::vector<double>& edges() const noexcept { return edges_; }
  const Eigen::VectorXd& widths() const noexcept { return widths_; }
  double width(std::size_t k) const { return widths_[static_cast<Eigen::Index>(k)]; }
  double center(std::size_t k) const { return 0.5 * (edges_[k] + edges_[k + 1]); }
  double min_width() const { return widths_.minCoeff(); }

  bool operator==(const BinGrid& other) const noexcept { return edges_ == other.edges_; }

 private:
  std::vector<double> edges_;
  Eigen::VectorXd widths_;
};

enum class HistogramKind { Counts, Density };

/// Per-bin values over a grid. Counts must be non-negative; densities are
/// signed (iterates are never clipped).
class Histogram {
 public:
  Histogram(BinGrid grid, Eigen::VectorXd values, HistogramKind kind = HistogramKind::Density);

  static Histogram zeros(const BinGrid& grid, HistogramKind kind = HistogramKind::Density);

  const BinGrid& grid() const noexcept { return grid_; }
  const Eigen::VectorXd& values() const noexcept { return values_; }
  HistogramKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return grid_.size(); }
  double operator[](std::size_t k) const { return values_[static_cast<Eigen::Index>(k)]; }

  /// Measure-weighted L2 norm over the grid.
  double l2_norm() const;
  /// Sum of |value_k| * width_k (for counts: the plain sum of |counts|).
  double l1_mass() const;

 private:
  BinGrid grid_;
  Eigen::VectorXd values_;
  HistogramKind kind_;
};

/// counts -> unit-mass density: out_k = c_k / (w_k * total).
Histogram normalize_counts(const Histogram& counts);

/// counts -> events per unit of the axis: out_k = c_k / w_k.
Histogram counts_to_density(const Histogram& counts);

/// Discretized response rho(y|x): rows are measured bins, columns truth bins.
/// Entries are bin-averaged densities in 1/y-unit, so the probability of
/// landing in measured bin i from truth bin j is rho(i, j) * w_y[i].
class ResponseMatrix {
 public:
  static constexpr double kColumnTolerance = 1e-9;

  ResponseMatrix(BinGrid measured, BinGrid truth, Eigen::MatrixXd rho);

  /// Same invariants except the per-column normalization; used for
  /// envelopes such as s_rho which bound a deviation, not a probability.
  static ResponseMatrix envelope(BinGrid measured, BinGrid truth, Eigen::MatrixXd values);

  const BinGrid& measured_grid() const noexcept { return measured_; }
  const BinGrid& truth_grid() const noexcept { return truth_; }
  const Eigen::MatrixXd& rho() const noexcept { return rho_; }
  std::size_t rows() const noexcept { return measured_.size(); }
  std::size_t cols() const noexcept { return truth_.size(); }
  double operator()(std::size_t i, std::size_t j) const {
    return rho_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  /// sum_i rho(i, j) * w_y[i] for every truth column j.
  Eigen::VectorXd column_efficiency() const;

 private:
  ResponseMatrix(BinGrid measured, BinGrid truth, Eigen::MatrixXd rho, bool check_columns);

  BinGrid measured_;
  BinGrid truth_;
  Eigen::MatrixXd rho_;
};

/// Factor E of a covariance, Cov = E * E^T. Rows index the bins the
/// covariance describes; columns are free (non-square factors allowed).
class ErrorMatrix {
 public:
  explicit ErrorMatrix(Eigen::MatrixXd factor);

  const Eigen::MatrixXd& factor() const noexcept { return factor_; }
  Eigen::Index rows() const noexcept { return factor_.rows(); }
  Eigen::Index cols() const noexcept { return factor_.cols(); }

  Eigen::MatrixXd covariance() const;

 private:
  Eigen::MatrixXd factor_;
};

/// Set of truth bins U over which averages are taken.
class CompactRegion {
 public:
  CompactRegion(std::vector<std::size_t> bins, const BinGrid& grid);

  static CompactRegion single(std::size_t bin, const BinGrid& grid) { return {{bin}, grid}; }
  static CompactRegion all(const BinGrid& grid);

  const std::vector<std::size_t>& bins() const noexcept { return bins_; }
  double volume() const noexcept { return volume_; }

  /// xi_U = chi_U / Volume(U) as a density on the grid.
  Eigen::VectorXd indicator_density(const BinGrid& grid) const;
  /// (1/Volume(U)) * sum_{j in U} h_j w_j.
  double average(const Eigen::VectorXd& h, const BinGrid& grid) const;

 private:
  std::vector<std::size_t> bins_;
  double volume_;
};

/// sum_{j in U} w_j; throws IndexOutOfRange for bins outside the grid.
double region_volume(const CompactRegion& region, const BinGrid& grid);

}  // namespace unfold
