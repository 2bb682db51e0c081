#include "unfold/pipeline.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "unfold/error.hpp"
#include "unfold/folding.hpp"
#include "unfold/io.hpp"
#include "unfold/numeric.hpp"
#include "unfold/propagation.hpp"
#include "unfold/unfolder.hpp"

namespace unfold {

namespace {

constexpr double kProbeFloor = 1e-6;
constexpr double kPlateauRelativeDrop = 1e-3;
constexpr std::size_t kMinProbeOrderForVerdict = 10;

// Xi_{U,N} for U = {bin}.
Eigen::VectorXd capital_xi(const CompositeOperator& op, std::size_t bin, std::size_t order) {
  const Eigen::VectorXd xi = CompactRegion::single(bin, op.truth_grid()).indicator_density(op.truth_grid());
  Eigen::VectorXd current = xi;
  for (std::size_t n = 0; n < order; ++n) current = step(op, xi, current);
  return current;
}

// ||xi_{U,M} - xi_{U,N}|| for U = {bin}, without keeping the iterates.
double xi_gap(const CompositeOperator& op, std::size_t bin, std::size_t n, std::size_t m) {
  const BinGrid& grid = op.truth_grid();
  const Eigen::VectorXd f0 = op.apply(CompactRegion::single(bin, grid).indicator_density(grid));
  Eigen::VectorXd current = f0;
  Eigen::VectorXd at_n = f0;
  for (std::size_t k = 0; k < m; ++k) {
    if (k == n) at_n = current;
    current = step(op, f0, current);
  }
  return weighted_norm(current - at_n, grid.widths());
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

ProbeSummary summarize_probe(const CompositeOperator& op, std::size_t order) {
  const BinGrid& grid = op.truth_grid();
  ProbeSummary out;
  out.order = order;
  out.final_levels.resize(grid.size());
  std::vector<double> earlier(grid.size());
  parallel_for(grid.size(), grid.size() * grid.size() * (order + 1), [&](std::size_t j) {
    const CompactRegion region = CompactRegion::single(j, grid);
    const std::vector<double> levels = kernel_probe(op, region, order);
    const double scale = weighted_norm(region.indicator_density(grid), grid.widths());
    out.final_levels[j] = levels.back() / scale;
    earlier[j] = levels[order - order / 10] / scale;
  });
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double level = out.final_levels[j];
    out.max_final_level = std::max(out.max_final_level, level);
    const bool settled = level > kProbeFloor && earlier[j] - level <= kPlateauRelativeDrop * level;
    if (order >= kMinProbeOrderForVerdict && settled) {
      ++out.plateau_bins;
      out.max_plateau_level = std::max(out.max_plateau_level, level);
    }
  }
  if (out.plateau_bins > 0) {
    out.verdict = "plateau: irrecoverable (kernel) component detected";
  } else if (out.max_final_level <= kProbeFloor) {
    out.verdict = "decayed: consistent with an injective response";
  } else {
    out.verdict = "still decaying: inconclusive at this order";
  }
  return out;
}

UnfoldReport unfold_measurement(const UnfoldInputs& inputs, const UnfoldConfig& config) {
  const ResponseMatrix& raw = inputs.response;
  if (!(inputs.measured.grid() == raw.measured_grid())) {
    throw Error(ErrorCode::GridMismatch, "measured histogram edges differ from the response's measured_edges");
  }
  if (inputs.measured.kind() != HistogramKind::Counts) {
    throw Error(ErrorCode::InvalidArgument, "measured histogram must hold counts");
  }
  if (inputs.sg && !(inputs.sg->grid() == raw.measured_grid())) {
    throw Error(ErrorCode::GridMismatch, "systematics_sg edges differ from the response's measured_edges");
  }
  if (inputs.srho && (!(inputs.srho->measured_grid() == raw.measured_grid()) ||
                      !(inputs.srho->truth_grid() == raw.truth_grid()))) {
    throw Error(ErrorCode::GridMismatch, "systematics_srho edges differ from the response's");
  }

  ResponseMatrix response = raw;
  Histogram measured = counts_to_density(inputs.measured);
  ErrorMatrix err = err_from_poisson(inputs.measured);
  std::optional<Histogram> sg;
  if (inputs.sg) sg = counts_to_density(Histogram(inputs.sg->grid(), inputs.sg->values(), HistogramKind::Counts));
  std::optional<ResponseMatrix> srho = inputs.srho;

  if (config.smoothing_sigma) {
    const ResponseMatrix kernel = gaussian_kernel(raw.measured_grid(), *config.smoothing_sigma);
    auto [smoothed_response, smoothed_measured] = precondition(response, measured, kernel);
    response = std::move(smoothed_response);
    measured = std::move(smoothed_measured);
    err = smooth_error(kernel, err);
    if (sg) sg = fold(kernel, *sg);
    if (srho) srho = compose(kernel, *srho);
  }

  UnfoldReport report;
  report.config = config;
  report.truth_edges = response.truth_grid().edges();
  report.total_counts = ordered_sum(inputs.measured.size(), [&](std::size_t k) { return inputs.measured[k]; });
  report.k_rho = compute_K(response);

  const CompositeOperator op = composite(response, config.normalization_k);
  report.normalization = op.normalization();
  report.iterations = config.m_rule(config.n_max);

  const Histogram f0 = init(op, response, measured);
  const IterationTrace trace = run_from(op, f0.values(), report.iterations);
  const std::vector<Eigen::VectorXd> sigmas = stat_sigma_trace(op, response, err, config.n_max);

  PenaltyConfig penalty_config;
  penalty_config.bias_weight = config.weights_bias;
  penalty_config.stat_weight = config.weights_stat;
  penalty_config.eps = config.eps;
  penalty_config.m_rule = config.m_rule;
  penalty_config.max_order = config.n_max;
  report.penalty = evaluate_penalty(trace, sigmas, penalty_config);

  const std::size_t best = report.penalty.best_order;
  const std::size_t compare = config.m_rule(best);
  const BinGrid& grid = response.truth_grid();
  report.best_order = best;
  report.bias_comparison_order = compare;
  report.unfolded = trace.iterate(best);

  const ErrorMatrix e = propagate_stat(op, response, err, best);
  report.covariance = e.covariance();
  report.sigma = stat_sigma(e);

  const auto m = static_cast<Eigen::Index>(grid.size());
  report.bias_bound.resize(m);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    report.bias_bound[static_cast<Eigen::Index>(j)] =
        bias_bound_global(trace, best, compare, config.eps, CompactRegion::single(j, grid));
  }
  report.fnorm_estimate = (1.0 + config.eps) * trace.norms()[compare];
  report.bias_bound_local.resize(m);
  parallel_for(grid.size(), grid.size() * grid.size() * (compare + 1), [&](std::size_t j) {
    report.bias_bound_local[static_cast<Eigen::Index>(j)] = *report.fnorm_estimate * xi_gap(op, j, best, compare);
  });

  if (sg || srho) {
    std::vector<Eigen::VectorXd> xis(grid.size());
    parallel_for(grid.size(), grid.size() * grid.size() * (best + 1),
                 [&](std::size_t j) { xis[j] = capital_xi(op, j, best); });
    const auto bounds = [&](const SystematicFactor& factor) {
      Eigen::VectorXd bound(m);
      for (std::size_t j = 0; j < grid.size(); ++j) {
        bound[static_cast<Eigen::Index>(j)] = syst_bound(Histogram(grid, xis[j]), factor, report.fnorm_estimate);
      }
      return bound;
    };
    if (sg) {
      const SystematicFactor c = systematic_factor(response, MeasuredPdfEnvelope{*sg}, op.normalization());
      report.c_factor = c.value;
      report.syst_bound_sg = bounds(c);
    }
    if (srho) {
      const SystematicFactor d = systematic_factor(response, ResponseEnvelope{*srho}, op.normalization());
      report.d_factor = d.value;
      report.syst_bound_srho = bounds(d);
    }
  }

  report.probe = summarize_probe(op, std::min(config.n_max, kReportProbeOrder));
  return report;
}

std::string report_to_json(const UnfoldReport& r) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["schema_version"] = r.schema_version;

  const UnfoldConfig& c = r.config;
  ordered_json cfg;
  cfg["n_max"] = c.n_max;
  cfg["eps"] = c.eps;
  cfg["m_rule"] = c.m_rule.to_string();
  cfg["weights_bias"] = c.weights_bias;
  cfg["weights_stat"] = c.weights_stat;
  cfg["smoothing_sigma"] = c.smoothing_sigma ? ordered_json(*c.smoothing_sigma) : ordered_json(nullptr);
  cfg["systematics_sg_file"] = c.systematics_sg_file ? ordered_json(*c.systematics_sg_file) : ordered_json(nullptr);
  cfg["systematics_srho_file"] = c.systematics_srho_file ? ordered_json(*c.systematics_srho_file) : ordered_json(nullptr);
  cfg["seed"] = c.seed;
  cfg["normalization_k"] = c.normalization_k ? ordered_json(*c.normalization_k) : ordered_json(nullptr);
  j["config"] = cfg;

  j["units"] = "events per unit of the truth axis (counts-scaled density)";
  j["truth_edges"] = r.truth_edges;
  j["total_counts"] = r.total_counts;
  j["k_rho"] = r.k_rho;
  j["normalization"] = r.normalization;
  j["iterations"] = r.iterations;
  j["n_opt"] = r.best_order;
  j["bias_comparison_order"] = r.bias_comparison_order;
  j["unfolded"] = to_vector(r.unfolded);
  j["unfolded_clipped"] = to_vector(r.unfolded.cwiseMax(0.0));
  j["sigma"] = to_vector(r.sigma);
  j["bias_bound"] = to_vector(r.bias_bound);
  j["bias_bound_local"] = to_vector(r.bias_bound_local);
  j["fnorm_estimate"] = r.fnorm_estimate ? ordered_json(*r.fnorm_estimate) : ordered_json(nullptr);

  ordered_json syst;
  syst["c_factor"] = r.c_factor ? ordered_json(*r.c_factor) : ordered_json(nullptr);
  syst["bound_sg"] = r.syst_bound_sg ? ordered_json(to_vector(*r.syst_bound_sg)) : ordered_json(nullptr);
  syst["d_factor"] = r.d_factor ? ordered_json(*r.d_factor) : ordered_json(nullptr);
  syst["bound_srho"] = r.syst_bound_srho ? ordered_json(to_vector(*r.syst_bound_srho)) : ordered_json(nullptr);
  j["systematics"] = syst;

  ordered_json cov = ordered_json::array();
  for (Eigen::Index a = 0; a < r.covariance.rows(); ++a) cov.push_back(to_vector(r.covariance.row(a)));
  j["covariance"] = cov;

  ordered_json penalty;
  penalty["form"] = "weighted sum of bias and statistical terms (one admissible penalty)";
  penalty["weights"] = {{"bias", r.penalty.bias_weight}, {"stat", r.penalty.stat_weight}};
  penalty["n_opt"] = r.penalty.best_order;
  ordered_json records = ordered_json::array();
  for (const auto& rec : r.penalty.records) {
    records.push_back({{"n", rec.order}, {"bias_term", rec.bias_term},
                       {"stat_term", rec.stat_term}, {"penalty", rec.penalty}});
  }
  penalty["records"] = records;
  j["penalty"] = penalty;

  ordered_json probe;
  probe["order"] = r.probe.order;
  probe["max_final_level"] = r.probe.max_final_level;
  probe["plateau_bins"] = r.probe.plateau_bins;
  probe["max_plateau_level"] = r.probe.max_plateau_level;
  probe["final_levels"] = r.probe.final_levels;
  probe["verdict"] = r.probe.verdict;
  j["kernel_probe"] = probe;

  return j.dump(2) + "\n";
}

std::string report_plot_csv(const UnfoldReport& r) {
  std::ostringstream out;
  out << "bin_center,value,sigma,bias_bound";
  if (r.syst_bound_sg) out << ",syst_bound_sg";
  if (r.syst_bound_srho) out << ",syst_bound_srho";
  out << '\n';
  for (Eigen::Index j = 0; j < r.unfolded.size(); ++j) {
    const auto k = static_cast<std::size_t>(j);
    out << io::format_double(0.5 * (r.truth_edges[k] + r.truth_edges[k + 1])) << ','
        << io::format_double(r.unfolded[j]) << ',' << io::format_double(r.sigma[j]) << ','
        << io::format_double(r.bias_bound[j]);
    if (r.syst_bound_sg) out << ',' << io::format_double((*r.syst_bound_sg)[j]);
    if (r.syst_bound_srho) out << ',' << io::format_double((*r.syst_bound_srho)[j]);
    out << '\n';
  }
  return out.str();
}

}  // namespace unfold
