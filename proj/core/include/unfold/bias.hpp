#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "unfold/histogram.hpp"
#include "unfold/unfolder.hpp"

namespace unfold {

/// Heuristic default for the (1 + eps) safety factor of the bias estimators.
inline constexpr double kDefaultBiasEpsilon = 0.05;

/// Rule choosing the comparison order M for a given N:
/// M(N) = max(scale * (N + 1), N + offset). The textual form is "<scale>n+<offset>";
/// the default "4n+50" gives max(4(N+1), N+50).
///
/// The true threshold beyond which the estimators are guaranteed is not
/// constructive; this rule is an engineering default, not a certificate.
struct MRule {
  std::size_t scale = 4;
  std::size_t offset = 50;

  std::size_t operator()(std::size_t n) const;
  std::string to_string() const;
  static MRule parse(std::string_view text);

  bool operator==(const MRule&) const = default;
};

/// (1/sqrt(Volume(U))) * (1 + eps) * ||f_M - f_N||.
double bias_bound_global(const IterationTrace& trace, std::size_t n, std::size_t m, double eps,
                         const CompactRegion& region);

enum class BiasVariant {
  /// (1 + eps) ||f_M|| ||xi_{U,M} - xi_{U,N}||, valid in general.
  General,
  /// (1 + eps) ||f_M|| ||xi_U - xi_{U,N}||, valid when A_rho is one-to-one.
  Injective,
};

double bias_bound_local(const IterationTrace& trace, const IndicatorIterates& xi, std::size_t n,
                        std::size_t m, double eps, BiasVariant variant = BiasVariant::General);

/// ||xi_U - xi_{U,N}|| for N = 0..max_order. Decay to zero is consistent with
/// an injective response on span{xi_U}; a plateau at L > 0 estimates
/// ||P_ker xi_U||.
std::vector<double> kernel_probe(const CompositeOperator& op, const CompactRegion& region,
                                 std::size_t max_order);

}  // namespace unfold
