#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "unfold/bias.hpp"
#include "unfold/unfolder.hpp"

namespace unfold {

/// Settings of one unfolding run; echoed verbatim into the report.
struct UnfoldConfig {
  /// Largest iteration order scanned by the stopping rule.
  std::size_t n_max = kDefaultMaxIterations;
  double eps = kDefaultBiasEpsilon;
  MRule m_rule{};
  double weights_bias = 1.0;
  double weights_stat = 1.0;
  /// Width of the Gaussian smoothing kernel on the measured grid.
  std::optional<double> smoothing_sigma;
  std::optional<std::string> systematics_sg_file;
  std::optional<std::string> systematics_srho_file;
  std::uint64_t seed = 0;
  /// Replaces K_rho when set (must be >= K_rho).
  std::optional<double> normalization_k;

  bool operator==(const UnfoldConfig&) const = default;
};

}  // namespace unfold
