#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <ostream>
#include <string>

#include <CLI11.hpp>

#include "unfold/error.hpp"
#include "unfold/folding.hpp"
#include "unfold/io.hpp"
#include "unfold/numeric.hpp"
#include "unfold/oracle.hpp"
#include "unfold/pipeline.hpp"
#include "unfold/unfolder.hpp"

namespace unfold::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kDemoBins = 32;
constexpr std::size_t kDemoRankDeficientBins = 8;
constexpr std::size_t kDemoScaledIdentityBins = 10;
constexpr double kDemoEvents = 10000.0;
constexpr std::size_t kDemoMaxOrder = 200;
constexpr std::size_t kDemoResidualOrders = 10;

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::NegativeCounts:
    case ErrorCode::EmptyHistogram:
      return kExitInput;
    case ErrorCode::GridMismatch:
    case ErrorCode::ShapeMismatch:
      return kExitGrid;
    case ErrorCode::ZeroResponse:
      return kExitZeroResponse;
    default:
      return kExitFailure;
  }
}

fs::path resolve_against(const fs::path& base_file, const std::string& p) {
  fs::path path(p);
  if (path.is_absolute()) return path;
  return base_file.parent_path() / path;
}

fs::path default_plot_path(const fs::path& report) {
  fs::path plot = report;
  plot.replace_extension(".plot.csv");
  return plot;
}

void write_report(const UnfoldReport& report, const fs::path& report_path, const fs::path& plot_path) {
  io::save_text(report_path, report_to_json(report));
  io::save_text(plot_path, report_plot_csv(report));
}

int cmd_fold(const std::string& response_file, const std::string& truth_file, const std::string& out_file,
             bool closure, std::size_t iterations, std::ostream& out) {
  const ResponseMatrix response = io::load_response(response_file);
  const Histogram truth = io::load_histogram(truth_file);
  if (!(truth.grid() == response.truth_grid())) {
    throw Error(ErrorCode::GridMismatch, "truth edges (" + truth_file + ") differ from truth_edges of " + response_file);
  }
  const Histogram folded = fold(response, truth);
  io::save_histogram(out_file, folded);
  out << "folded " << truth.size() << " truth bins into " << folded.size() << " measured bins -> " << out_file << '\n';

  if (closure) {
    RunOptions options;
    options.max_order = iterations;
    options.store_iterates = false;
    const IterationTrace trace = run(response, folded, options);
    const Histogram refolded = fold(response, Histogram(response.truth_grid(), trace.last()));
    const Eigen::VectorXd diff = refolded.values() - folded.values();
    const double folded_gap = weighted_norm(diff, response.measured_grid().widths());
    const double truth_gap =
        weighted_norm(trace.last() - truth.values(), response.truth_grid().widths());
    out << "closure at N = " << iterations << ": ||fold(f_N) - g|| = " << sci(folded_gap)
        << ", ||f_N - f|| = " << sci(truth_gap) << '\n';
    out << "warning: agreement of the folded result with the measurement does not certify the unfolded "
           "result; folding loses discrimination power on pdfs, so use the bias and error bounds instead.\n";
  }
  return kExitOk;
}

int cmd_unfold(const std::string& response_file, const std::string& measured_file, const std::string& config_file,
               const std::string& report_file, const std::string& plot_file, std::ostream& out) {
  const UnfoldConfig config = io::load_config(config_file);
  UnfoldInputs inputs{io::load_response(response_file), io::load_histogram(measured_file, HistogramKind::Counts),
                      std::nullopt, std::nullopt};
  if (config.systematics_sg_file) {
    inputs.sg = io::load_histogram(resolve_against(config_file, *config.systematics_sg_file), HistogramKind::Counts);
  }
  if (config.systematics_srho_file) {
    inputs.srho = io::load_response(resolve_against(config_file, *config.systematics_srho_file), true);
  }
  const UnfoldReport report = unfold_measurement(inputs, config);
  const fs::path plot = plot_file.empty() ? default_plot_path(report_file) : fs::path(plot_file);
  write_report(report, report_file, plot);
  out << "N_opt = " << report.best_order << " (M = " << report.bias_comparison_order << "), K = "
      << fixed(report.normalization, 6) << '\n';
  out << "kernel probe: " << report.probe.verdict << '\n';
  out << "report -> " << report_file << ", plot data -> " << plot.string() << '\n';
  return kExitOk;
}

int cmd_demo(oracle::ToyKind kind, std::uint64_t seed, const std::string& out_dir, std::ostream& out) {
  using oracle::ToyKind;
  std::size_t m = kDemoBins;
  if (kind == ToyKind::RankDeficient) m = kDemoRankDeficientBins;
  if (kind == ToyKind::ScaledIdentity) m = kDemoScaledIdentityBins;
  const oracle::Toy toy = oracle::make_toy(kind, m, 0, {}, seed);

  const fs::path dir(out_dir);
  fs::create_directories(dir);

  const Eigen::VectorXd expected = oracle::expected_counts(toy.response, toy.truth, kDemoEvents);
  const Histogram measured = oracle::poisson_sample(toy.response.measured_grid(), expected, seed);

  UnfoldConfig config;
  config.n_max = kDemoMaxOrder;
  config.seed = seed;
  config.normalization_k = toy.normalization;

  io::save_response(dir / "response.csv", toy.response);
  io::save_histogram(dir / "truth.csv", toy.truth);
  io::save_histogram(dir / "measured.csv", measured);
  io::save_config(dir / "config.txt", config);

  const UnfoldReport report = unfold_measurement({toy.response, measured, std::nullopt, std::nullopt}, config);
  write_report(report, dir / "report.json", dir / "report.plot.csv");

  const oracle::Spectral spectral(toy.response, toy.normalization);
  out << "demo " << oracle::to_string(kind) << " (seed " << seed << ", " << m << " truth bins)\n";
  out << "K = " << fixed(report.k_rho, 6);
  if (kind == ToyKind::GaussConvCyclic) out << " (|K - 1| = " << sci(std::abs(report.k_rho - 1.0)) << ")";
  out << '\n';
  if (toy.normalization) out << "K used = " << fixed(report.normalization, 6) << '\n';
  out << "spectrum of A: [" << sci(spectral.spectrum().minCoeff()) << ", " << sci(spectral.spectrum().maxCoeff())
      << "], kernel dimension " << spectral.kernel_dimension() << '\n';
  out << "kernel probe (N = " << report.probe.order << "): " << report.probe.verdict
      << "; max level " << sci(report.probe.max_final_level);
  if (report.probe.plateau_bins > 0) {
    out << ", plateau " << sci(report.probe.max_plateau_level) << " in " << report.probe.plateau_bins << " bins";
  }
  out << '\n';

  if (kind == ToyKind::ScaledIdentity) {
    // Noise-free: f - f_N = (1 - c)^{N+1} f exactly.
    const Histogram g = fold(toy.response, toy.truth);
    const CompositeOperator op = composite(toy.response, toy.normalization);
    const Histogram f0 = init(op, toy.response, g);
    const IterationTrace trace = run_from(op, f0.values(), kDemoResidualOrders);
    const double c = 1.0 / report.normalization;
    const double fnorm = weighted_norm(toy.truth.values(), toy.truth.grid().widths());
    out << "residual law: N, ||f - f_N|| / ||f||, (1 - c)^(N+1)\n";
    for (std::size_t n = 0; n <= kDemoResidualOrders; ++n) {
      const double ratio =
          weighted_norm(toy.truth.values() - trace.iterate(n), toy.truth.grid().widths()) / fnorm;
      out << "  " << n << ", " << sci(ratio) << ", " << sci(std::pow(1.0 - c, static_cast<double>(n + 1)))
          << '\n';
    }
  }
  out << "N_opt = " << report.best_order << "; files written to " << dir.string() << '\n';
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Linear iterative unfolding of binned distributions"};
  app.require_subcommand(1);

  std::string response_file, truth_file, out_file, measured_file, config_file, report_file, plot_file;
  std::string demo_kind, demo_dir;
  std::uint64_t demo_seed = 0;
  bool closure = false;
  std::size_t closure_iterations = 200;

  CLI::App* fold_cmd = app.add_subcommand("fold", "Fold a truth histogram with a response");
  fold_cmd->add_option("response", response_file, "response CSV")->required();
  fold_cmd->add_option("truth", truth_file, "truth histogram CSV (density)")->required();
  fold_cmd->add_option("out", out_file, "output histogram CSV")->required();
  fold_cmd->add_flag("--closure", closure, "also unfold the folded result and report the closure");
  fold_cmd->add_option("--iterations", closure_iterations, "iteration order for --closure");

  CLI::App* unfold_cmd = app.add_subcommand("unfold", "Unfold a measured histogram");
  unfold_cmd->add_option("response", response_file, "response CSV")->required();
  unfold_cmd->add_option("measured", measured_file, "measured histogram CSV (counts)")->required();
  unfold_cmd->add_option("config", config_file, "config file")->required();
  unfold_cmd->add_option("report", report_file, "output report (JSON)")->required();
  unfold_cmd->add_option("--plot", plot_file, "plot-data CSV (default: <report stem>.plot.csv)");

  CLI::App* demo_cmd = app.add_subcommand("demo", "Generate a toy problem and run the full pipeline");
  demo_cmd->add_option("kind", demo_kind, "gauss-cyclic | gauss-truncated | rank-deficient | scaled-identity")
      ->required();
  demo_cmd->add_option("seed", demo_seed, "random seed")->required();
  demo_cmd->add_option("out_dir", demo_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  try {
    if (fold_cmd->parsed()) return cmd_fold(response_file, truth_file, out_file, closure, closure_iterations, out);
    if (unfold_cmd->parsed()) {
      return cmd_unfold(response_file, measured_file, config_file, report_file, plot_file, out);
    }
    const auto kind = oracle::parse_toy_kind(demo_kind);
    if (!kind) {
      err << "error: unknown demo kind '" << demo_kind
          << "' (expected gauss-cyclic, gauss-truncated, rank-deficient or scaled-identity)\n";
      return kExitInput;
    }
    return cmd_demo(*kind, demo_seed, demo_dir, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace unfold::cli
