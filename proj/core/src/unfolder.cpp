#include "unfold/unfolder.hpp"

#include <string>

#include "unfold/error.hpp"
#include "unfold/numeric.hpp"

namespace unfold {

Histogram init(const CompositeOperator& op, const ResponseMatrix& response,
               const Histogram& measured) {
  if (!(op.truth_grid() == response.truth_grid())) {
    throw Error(ErrorCode::GridMismatch, "operator and response use different truth grids");
  }
  Histogram back = transpose_fold(response, measured);
  Eigen::VectorXd f0 = back.values() / op.normalization();
  return Histogram(response.truth_grid(), std::move(f0));
}

Histogram init(const ResponseMatrix& response, const Histogram& measured) {
  const double k = compute_K(response);
  Histogram back = transpose_fold(response, measured);
  return Histogram(response.truth_grid(), back.values() / k);
}

Eigen::VectorXd step(const CompositeOperator& op, const Eigen::VectorXd& f0,
                     const Eigen::VectorXd& fN) {
  if (static_cast<std::size_t>(f0.size()) != op.size() ||
      static_cast<std::size_t>(fN.size()) != op.size()) {
    throw Error(ErrorCode::GridMismatch, "step: iterate does not live on the operator's grid");
  }
  const Eigen::VectorXd afN = op.apply(fN);
  Eigen::VectorXd next(fN.size());
  for (Eigen::Index j = 0; j < fN.size(); ++j) next[j] = fN[j] + (f0[j] - afN[j]);
  return next;
}

Histogram step(const CompositeOperator& op, const Histogram& f0, const Histogram& fN) {
  if (!(f0.grid() == op.truth_grid()) || !(fN.grid() == op.truth_grid())) {
    throw Error(ErrorCode::GridMismatch, "step: histogram grid differs from the operator's");
  }
  return Histogram(op.truth_grid(), step(op, f0.values(), fN.values()));
}

IterationTrace::IterationTrace(CompositeOperator op, Eigen::VectorXd f0, std::size_t max_order,
                               bool store_iterates)
    : op_(std::move(op)), f0_(std::move(f0)) {
  const Eigen::VectorXd& w = op_.truth_grid().widths();
  if (store_iterates) iterates_.reserve(max_order + 1);
  norms_.reserve(max_order + 1);
  step_norms_.reserve(max_order);

  Eigen::VectorXd current = f0_;
  norms_.push_back(weighted_norm(current, w));
  if (store_iterates) iterates_.push_back(current);
  for (std::size_t n = 0; n < max_order; ++n) {
    Eigen::VectorXd next = step(op_, f0_, current);
    step_norms_.push_back(weighted_norm(next - current, w));
    norms_.push_back(weighted_norm(next, w));
    current = std::move(next);
    if (store_iterates) iterates_.push_back(current);
  }
  last_ = std::move(current);
}

const Eigen::VectorXd& IterationTrace::iterate(std::size_t order) const {
  if (iterates_.empty()) {
    if (order == max_order()) return last_;
    throw Error(ErrorCode::InsufficientTrace, "trace was recorded without iterates");
  }
  if (order >= iterates_.size()) {
    throw Error(ErrorCode::InsufficientTrace, "iterate " + std::to_string(order) +
                                                  " requested from a trace of order " +
                                                  std::to_string(max_order()));
  }
  return iterates_[order];
}

double IterationTrace::distance(std::size_t m, std::size_t n) const {
  return weighted_norm(iterate(m) - iterate(n), grid().widths());
}

IterationTrace run_from(const CompositeOperator& op, const Eigen::VectorXd& f0,
                        std::size_t max_order, bool store_iterates) {
  return IterationTrace(op, f0, max_order, store_iterates);
}

IterationTrace run(const ResponseMatrix& response, const Histogram& measured,
                   const RunOptions& options) {
  if (options.smoothing) {
    auto [smoothed_response, smoothed_measured] =
        precondition(response, measured, *options.smoothing);
    RunOptions inner = options;
    inner.smoothing.reset();
    return run(smoothed_response, smoothed_measured, inner);
  }
  CompositeOperator op = composite(response, options.normalization);
  Histogram f0 = init(op, response, measured);
  return IterationTrace(std::move(op), f0.values(), options.max_order, options.store_iterates);
}

IndicatorIterates indicator_iterates(const CompositeOperator& op, const CompactRegion& region,
                                     std::size_t max_order) {
  const BinGrid& grid = op.truth_grid();
  region_volume(region, grid);  // range check
  IndicatorIterates out;
  out.xi = region.indicator_density(grid);
  out.xi_iterates.reserve(max_order + 1);
  out.capital_xi_iterates.reserve(max_order + 1);

  const Eigen::VectorXd small_start = op.apply(out.xi);
  Eigen::VectorXd small = small_start;
  Eigen::VectorXd capital = out.xi;
  out.xi_iterates.push_back(small);
  out.capital_xi_iterates.push_back(capital);
  for (std::size_t n = 0; n < max_order; ++n) {
    small = step(op, small_start, small);
    capital = step(op, out.xi, capital);
    out.xi_iterates.push_back(small);
    out.capital_xi_iterates.push_back(capital);
  }
  return out;
}

}  // namespace unfold
