#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "unfold/config.hpp"
#include "unfold/histogram.hpp"
#include "unfold/stopping.hpp"

namespace unfold {

inline constexpr int kReportSchemaVersion = 1;
/// Upper limit on the kernel-probe length used in reports.
inline constexpr std::size_t kReportProbeOrder = 500;

struct UnfoldInputs {
  ResponseMatrix response;
  /// Measured histogram in counts (Poisson statistics apply).
  Histogram measured;
  /// Systematic envelope of the measured histogram, in counts.
  std::optional<Histogram> sg;
  /// Systematic envelope of the response, in response units.
  std::optional<ResponseMatrix> srho;
};

/// Kernel-probe summary over every single-bin region.
struct ProbeSummary {
  std::size_t order = 0;
  /// ||xi_U - xi_{U,N}|| / ||xi_U|| at the final order, per truth bin.
  std::vector<double> final_levels;
  double max_final_level = 0.0;
  /// Largest final level among bins whose level stopped moving.
  double max_plateau_level = 0.0;
  std::size_t plateau_bins = 0;
  std::string verdict;
};

struct UnfoldReport {
  int schema_version = kReportSchemaVersion;
  UnfoldConfig config;
  std::vector<double> truth_edges;
  double total_counts = 0.0;
  double k_rho = 0.0;
  double normalization = 0.0;
  std::size_t iterations = 0;  ///< order the iteration was run to
  std::size_t best_order = 0;

  Eigen::VectorXd unfolded;
  Eigen::VectorXd sigma;
  /// Per-bin (1 + eps) ||f_M - f_N|| / sqrt(w_j); drives the penalty.
  Eigen::VectorXd bias_bound;
  /// Per-bin (1 + eps) ||f_M|| ||xi_{U,M} - xi_{U,N}||, U = {j}.
  Eigen::VectorXd bias_bound_local;
  std::size_t bias_comparison_order = 0;
  std::optional<Eigen::VectorXd> syst_bound_sg;
  std::optional<double> c_factor;
  std::optional<Eigen::VectorXd> syst_bound_srho;
  std::optional<double> d_factor;
  std::optional<double> fnorm_estimate;
  Eigen::MatrixXd covariance;
  PenaltyTrace penalty;
  ProbeSummary probe;
};

/// Full run: optional smoothing, iteration to M(n_max), statistical
/// propagation, penalty scan, and the bounds at the chosen order. Values are
/// in the counts-scaled density convention (events per unit x).
UnfoldReport unfold_measurement(const UnfoldInputs& inputs, const UnfoldConfig& config);

ProbeSummary summarize_probe(const CompositeOperator& op, std::size_t order);

std::string report_to_json(const UnfoldReport& report);
/// bin_center,value,sigma,bias_bound[,syst_bound_sg][,syst_bound_srho]
std::string report_plot_csv(const UnfoldReport& report);

}  // namespace unfold
