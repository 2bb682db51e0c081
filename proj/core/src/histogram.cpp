#include "unfold/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "unfold/error.hpp"
#include "unfold/numeric.hpp"

namespace unfold {

namespace {

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

}  // namespace

BinGrid::BinGrid(std::vector<double> edges) : edges_(std::move(edges)) {
  if (edges_.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "a bin grid needs at least 2 edges");
  }
  widths_.resize(static_cast<Eigen::Index>(edges_.size() - 1));
  for (std::size_t k = 0; k + 1 < edges_.size(); ++k) {
    const double w = edges_[k + 1] - edges_[k];
    if (!std::isfinite(edges_[k]) || !std::isfinite(edges_[k + 1]) || !std::isfinite(w) ||
        !(w > 0.0)) {
      throw Error(ErrorCode::InvalidArgument,
                  "bin edges must be finite and strictly increasing (edge " + std::to_string(k) +
                      ")");
    }
    widths_[static_cast<Eigen::Index>(k)] = w;
  }
}

BinGrid BinGrid::uniform(std::size_t bins, double lo, double width) {
  std::vector<double> edges(bins + 1);
  for (std::size_t k = 0; k <= bins; ++k) edges[k] = lo + width * static_cast<double>(k);
  return BinGrid(std::move(edges));
}

Histogram::Histogram(BinGrid grid, Eigen::VectorXd values, HistogramKind kind)
    : grid_(std::move(grid)), values_(std::move(values)), kind_(kind) {
  if (static_cast<std::size_t>(values_.size()) != grid_.size()) {
    throw Error(ErrorCode::ShapeMismatch, "histogram has " + std::to_string(values_.size()) +
                                              " values for " + std::to_string(grid_.size()) +
                                              " bins");
  }
  if (!values_.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "histogram values must be finite");
  }
  if (kind_ == HistogramKind::Counts && (values_.array() < 0.0).any()) {
    throw Error(ErrorCode::NegativeCounts, "counts must be non-negative");
  }
}

Histogram Histogram::zeros(const BinGrid& grid, HistogramKind kind) {
  return Histogram(grid, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size())), kind);
}

double Histogram::l2_norm() const { return weighted_norm(values_, grid_.widths()); }

double Histogram::l1_mass() const {
  if (kind_ == HistogramKind::Counts) {
    return ordered_sum(size(), [&](std::size_t k) { return std::abs(values_[static_cast<Eigen::Index>(k)]); });
  }
  return ordered_sum(size(), [&](std::size_t k) {
    const auto j = static_cast<Eigen::Index>(k);
    return std::abs(values_[j]) * grid_.widths()[j];
  });
}

Histogram normalize_counts(const Histogram& counts) {
  if (counts.kind() != HistogramKind::Counts) {
    throw Error(ErrorCode::InvalidArgument, "normalize_counts expects a counts histogram");
  }
  const double total = ordered_sum(counts.size(), [&](std::size_t k) { return counts[k]; });
  if (!(total > 0.0)) throw Error(ErrorCode::EmptyHistogram, "histogram total is zero");
  Eigen::VectorXd out = counts.values().array() / (counts.grid().widths().array() * total);
  return Histogram(counts.grid(), std::move(out), HistogramKind::Density);
}

Histogram counts_to_density(const Histogram& counts) {
  if (counts.kind() != HistogramKind::Counts) {
    throw Error(ErrorCode::InvalidArgument, "counts_to_density expects a counts histogram");
  }
  Eigen::VectorXd out = counts.values().array() / counts.grid().widths().array();
  return Histogram(counts.grid(), std::move(out), HistogramKind::Density);
}

ResponseMatrix::ResponseMatrix(BinGrid measured, BinGrid truth, Eigen::MatrixXd rho)
    : ResponseMatrix(std::move(measured), std::move(truth), std::move(rho), true) {}

ResponseMatrix ResponseMatrix::envelope(BinGrid measured, BinGrid truth, Eigen::MatrixXd values) {
  return ResponseMatrix(std::move(measured), std::move(truth), std::move(values), false);
}

ResponseMatrix::ResponseMatrix(BinGrid measured, BinGrid truth, Eigen::MatrixXd rho,
                               bool check_columns)
    : measured_(std::move(measured)), truth_(std::move(truth)), rho_(std::move(rho)) {
  if (static_cast<std::size_t>(rho_.rows()) != measured_.size() ||
      static_cast<std::size_t>(rho_.cols()) != truth_.size()) {
    throw Error(ErrorCode::ShapeMismatch,
                "response is " + std::to_string(rho_.rows()) + "x" + std::to_string(rho_.cols()) +
                    ", grids need " + std::to_string(measured_.size()) + "x" +
                    std::to_string(truth_.size()));
  }
  if (!all_finite(rho_)) throw Error(ErrorCode::InvalidArgument, "response entries must be finite");
  if ((rho_.array() < 0.0).any()) {
    throw Error(ErrorCode::InvalidArgument, "response entries must be non-negative");
  }
  if (check_columns) {
    const Eigen::VectorXd eff = column_efficiency();
    for (Eigen::Index j = 0; j < eff.size(); ++j) {
      if (eff[j] > 1.0 + kColumnTolerance) {
        throw Error(ErrorCode::InvalidArgument,
                    "response column " + std::to_string(j) + " integrates to " +
                        std::to_string(eff[j]) + " > 1");
      }
    }
  }
}

Eigen::VectorXd ResponseMatrix::column_efficiency() const {
  Eigen::VectorXd eff(rho_.cols());
  const Eigen::VectorXd& wy = measured_.widths();
  for (Eigen::Index j = 0; j < rho_.cols(); ++j) {
    eff[j] = ordered_sum(rows(), [&](std::size_t k) {
      const auto i = static_cast<Eigen::Index>(k);
      return rho_(i, j) * wy[i];
    });
  }
  return eff;
}

ErrorMatrix::ErrorMatrix(Eigen::MatrixXd factor) : factor_(std::move(factor)) {
  if (!factor_.allFinite()) throw Error(ErrorCode::InvalidArgument, "error factor must be finite");
}

Eigen::MatrixXd ErrorMatrix::covariance() const {
  const Eigen::Index rows = factor_.rows();
  const auto cols = static_cast<std::size_t>(factor_.cols());
  Eigen::MatrixXd cov(rows, rows);
  for (Eigen::Index a = 0; a < rows; ++a) {
    for (Eigen::Index b = 0; b <= a; ++b) {
      const double v = ordered_sum(cols, [&](std::size_t k) {
        const auto c = static_cast<Eigen::Index>(k);
        return factor_(a, c) * factor_(b, c);
      });
      cov(a, b) = v;
      cov(b, a) = v;
    }
  }
  return cov;
}

CompactRegion::CompactRegion(std::vector<std::size_t> bins, const BinGrid& grid)
    : bins_(std::move(bins)), volume_(0.0) {
  if (bins_.empty()) throw Error(ErrorCode::InvalidArgument, "region must contain a bin");
  std::sort(bins_.begin(), bins_.end());
  bins_.erase(std::unique(bins_.begin(), bins_.end()), bins_.end());
  volume_ = region_volume(*this, grid);
}

CompactRegion CompactRegion::all(const BinGrid& grid) {
  std::vector<std::size_t> bins(grid.size());
  for (std::size_t k = 0; k < bins.size(); ++k) bins[k] = k;
  return CompactRegion(std::move(bins), grid);
}

Eigen::VectorXd CompactRegion::indicator_density(const BinGrid& grid) const {
  Eigen::VectorXd xi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t j : bins_) xi[static_cast<Eigen::Index>(j)] = 1.0 / volume_;
  return xi;
}

double CompactRegion::average(const Eigen::VectorXd& h, const BinGrid& grid) const {
  if (static_cast<std::size_t>(h.size()) != grid.size()) {
    throw Error(ErrorCode::GridMismatch, "region average over a histogram of another grid");
  }
  const double integral = ordered_sum(bins_.size(), [&](std::size_t k) {
    const auto j = static_cast<Eigen::Index>(bins_[k]);
    return h[j] * grid.widths()[j];
  });
  return integral / volume_;
}

double region_volume(const CompactRegion& region, const BinGrid& grid) {
  const auto& bins = region.bins();
  for (std::size_t j : bins) {
    if (j >= grid.size()) {
      throw Error(ErrorCode::IndexOutOfRange,
                  "region bin " + std::to_string(j) + " outside grid of " +
                      std::to_string(grid.size()) + " bins");
    }
  }
  return ordered_sum(bins.size(), [&](std::size_t k) { return grid.width(bins[k]); });
}

}  // namespace unfold
