#include "unfold/bias.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "unfold/error.hpp"
#include "unfold/numeric.hpp"

namespace unfold {

std::size_t MRule::operator()(std::size_t n) const {
  return std::max(scale * (n + 1), n + offset);
}

std::string MRule::to_string() const {
  return std::to_string(scale) + "n+" + std::to_string(offset);
}

MRule MRule::parse(std::string_view text) {
  std::string compact;
  for (char c : text) {
    if (c != ' ' && c != '\t' && c != '*') compact.push_back(c);
  }
  const auto npos = compact.find('n');
  const auto plus = compact.find('+');
  if (npos == std::string::npos || plus == std::string::npos || plus != npos + 1) {
    throw Error(ErrorCode::ParseError, "m_rule must look like '4n+50', got '" + std::string(text) + "'");
  }
  MRule rule;
  const char* begin = compact.data();
  if (npos == 0) {
    rule.scale = 1;
  } else {
    auto [ptr, ec] = std::from_chars(begin, begin + npos, rule.scale);
    if (ec != std::errc() || ptr != begin + npos) {
      throw Error(ErrorCode::ParseError, "m_rule scale is not an integer: '" + std::string(text) + "'");
    }
  }
  const char* off_begin = begin + plus + 1;
  const char* off_end = begin + compact.size();
  auto [ptr, ec] = std::from_chars(off_begin, off_end, rule.offset);
  if (ec != std::errc() || ptr != off_end) {
    throw Error(ErrorCode::ParseError, "m_rule offset is not an integer: '" + std::string(text) + "'");
  }
  if (rule.scale == 0 || rule.offset == 0) {
    throw Error(ErrorCode::ParseError, "m_rule must give M > N");
  }
  return rule;
}

namespace {

void check_orders(std::size_t n, std::size_t m, double eps) {
  if (m <= n) {
    throw Error(ErrorCode::BadOrder,
                "comparison order M=" + std::to_string(m) + " must exceed N=" + std::to_string(n));
  }
  if (!(eps >= 0.0) || !std::isfinite(eps)) {
    throw Error(ErrorCode::InvalidArgument, "eps must be finite and non-negative");
  }
}

}  // namespace

double bias_bound_global(const IterationTrace& trace, std::size_t n, std::size_t m, double eps,
                         const CompactRegion& region) {
  check_orders(n, m, eps);
  const double volume = region_volume(region, trace.grid());
  return (1.0 + eps) * trace.distance(m, n) / std::sqrt(volume);
}

double bias_bound_local(const IterationTrace& trace, const IndicatorIterates& xi, std::size_t n,
                        std::size_t m, double eps, BiasVariant variant) {
  check_orders(n, m, eps);
  const Eigen::VectorXd& w = trace.grid().widths();
  const double fm = weighted_norm(trace.iterate(m), w);
  if (n >= xi.xi_iterates.size() ||
      (variant == BiasVariant::General && m >= xi.xi_iterates.size())) {
    throw Error(ErrorCode::InsufficientTrace, "indicator iterates do not reach the requested order");
  }
  const Eigen::VectorXd& reference = variant == BiasVariant::General ? xi.xi_at(m) : xi.xi;
  return (1.0 + eps) * fm * weighted_norm(reference - xi.xi_at(n), w);
}

std::vector<double> kernel_probe(const CompositeOperator& op, const CompactRegion& region,
                                 std::size_t max_order) {
  const BinGrid& grid = op.truth_grid();
  region_volume(region, grid);
  const Eigen::VectorXd xi = region.indicator_density(grid);
  const Eigen::VectorXd start = op.apply(xi);
  std::vector<double> levels;
  levels.reserve(max_order + 1);
  Eigen::VectorXd current = start;
  levels.push_back(weighted_norm(xi - current, grid.widths()));
  for (std::size_t n = 0; n < max_order; ++n) {
    current = step(op, start, current);
    levels.push_back(weighted_norm(xi - current, grid.widths()));
  }
  return levels;
}

}  // namespace unfold
