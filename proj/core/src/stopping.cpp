#include "unfold/stopping.hpp"

#include <string>

#include "unfold/error.hpp"
#include "unfold/numeric.hpp"

namespace unfold {

PenaltyTrace evaluate_penalty(const IterationTrace& trace,
                              std::span<const Eigen::VectorXd> sigma_by_order,
                              const PenaltyConfig& config) {
  const BinGrid& grid = trace.grid();
  std::vector<CompactRegion> regions = config.regions;
  if (regions.empty()) {
    for (std::size_t j = 0; j < grid.size(); ++j) regions.push_back(CompactRegion::single(j, grid));
  }

  std::size_t last = 0;
  if (config.max_order) {
    last = *config.max_order;
    if (config.m_rule(last) > trace.max_order() || last >= sigma_by_order.size()) {
      throw Error(ErrorCode::InsufficientTrace,
                  "scanning to N=" + std::to_string(last) + " needs iterates up to M=" +
                      std::to_string(config.m_rule(last)) + " and " + std::to_string(last + 1) +
                      " error records");
    }
  } else {
    if (config.m_rule(0) > trace.max_order() || sigma_by_order.empty()) {
      throw Error(ErrorCode::InsufficientTrace,
                  "trace of order " + std::to_string(trace.max_order()) +
                      " is too short for the comparison rule " + config.m_rule.to_string());
    }
    while (last + 1 < sigma_by_order.size() && config.m_rule(last + 1) <= trace.max_order()) ++last;
  }

  PenaltyTrace out;
  out.bias_weight = config.bias_weight;
  out.stat_weight = config.stat_weight;
  out.records.reserve(last + 1);
  const Eigen::VectorXd& w = grid.widths();
  for (std::size_t n = 0; n <= last; ++n) {
    const std::size_t m = config.m_rule(n);
    const double bias = ordered_sum(regions.size(), [&](std::size_t r) {
      return bias_bound_global(trace, n, m, config.eps, regions[r]);
    });
    const Eigen::VectorXd& sigma = sigma_by_order[n];
    if (static_cast<std::size_t>(sigma.size()) != grid.size()) {
      throw Error(ErrorCode::ShapeMismatch, "sigma record does not match the truth grid");
    }
    const double stat = ordered_sum(grid.size(), [&](std::size_t k) {
      const auto j = static_cast<Eigen::Index>(k);
      return sigma[j] * w[j];
    });
    const double penalty = config.bias_weight * bias + config.stat_weight * stat;
    out.records.push_back({n, bias, stat, penalty});
    if (penalty < out.records[out.best_order].penalty) out.best_order = n;
  }
  return out;
}

}  // namespace unfold
