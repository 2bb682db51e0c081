#pragma once

#include <cstddef>
#include <functional>

#include <Eigen/Core>

namespace unfold {

/// Terms are summed in ascending index order; above this count the sum is
/// split into a fixed binary tree of blocks no larger than this.
inline constexpr std::size_t kPairwiseThreshold = 1024;

namespace detail {

template <typename Term>
double ordered_sum_range(std::size_t begin, std::size_t end, const Term& term) {
  if (end - begin <= kPairwiseThreshold) {
    double acc = 0.0;
    for (std::size_t k = begin; k < end; ++k) acc += term(k);
    return acc;
  }
  const std::size_t mid = begin + (end - begin) / 2;
  return ordered_sum_range(begin, mid, term) + ordered_sum_range(mid, end, term);
}

}  // namespace detail

/// Reproducible sum of term(0) + ... + term(count - 1).
template <typename Term>
double ordered_sum(std::size_t count, const Term& term) {
  return detail::ordered_sum_range(0, count, term);
}

/// Measure-weighted inner product sum_j u_j v_j w_j.
double weighted_dot(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                    const Eigen::VectorXd& weights);

/// Measure-weighted L2 norm, ||h||^2 = sum_j h_j^2 w_j.
double weighted_norm(const Eigen::VectorXd& h, const Eigen::VectorXd& weights);

/// Thread cap for internal loops. UNFOLD_THREADS overrides the hardware
/// default; set_thread_limit() overrides both (0 restores the default).
std::size_t thread_limit();
void set_thread_limit(std::size_t threads);

/// Calls body(k) for k in [0, count). Each index is handled by exactly one
/// thread, so results never depend on the thread count as long as body(k)
/// only writes slot k.
void parallel_for(std::size_t count, std::size_t work_per_index,
                  const std::function<void(std::size_t)>& body);

}  // namespace unfold
