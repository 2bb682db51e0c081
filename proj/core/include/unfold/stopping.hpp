#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "unfold/bias.hpp"
#include "unfold/histogram.hpp"
#include "unfold/unfolder.hpp"

namespace unfold {

/// penalty(N) = bias_weight * bias_term(N) + stat_weight * stat_term(N).
/// The weighted sum is one admissible penalty, not the only one.
struct PenaltyConfig {
  double bias_weight = 1.0;
  double stat_weight = 1.0;
  double eps = kDefaultBiasEpsilon;
  MRule m_rule{};
  /// Regions summed in the bias term; empty means every single truth bin.
  std::vector<CompactRegion> regions;
  /// Last N scanned. Defaults to the largest N the trace can support.
  std::optional<std::size_t> max_order;
};

struct PenaltyRecord {
  std::size_t order;
  double bias_term;
  double stat_term;
  double penalty;
};

struct PenaltyTrace {
  std::vector<PenaltyRecord> records;
  std::size_t best_order = 0;
  double bias_weight = 1.0;
  double stat_weight = 1.0;

  const PenaltyRecord& best() const { return records.at(best_order); }
};

/// Exhaustive scan over N = 0..max_order. bias_term(N) sums
/// bias_bound_global(N, M(N), eps, U) over the regions; stat_term(N) is
/// sum_j sigma_j(N) w_j. Ties go to the smallest N.
PenaltyTrace evaluate_penalty(const IterationTrace& trace,
                              std::span<const Eigen::VectorXd> sigma_by_order,
                              const PenaltyConfig& config = {});

}  // namespace unfold
