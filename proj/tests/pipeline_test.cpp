#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "support.hpp"
#include "unfold/error.hpp"
#include "unfold/numeric.hpp"
#include "unfold/pipeline.hpp"

namespace unfold {
namespace {

using testing::counts;
using testing::identity_response;
using testing::unit_grid;

UnfoldConfig small_config(std::size_t n_max = 40) {
  UnfoldConfig c;
  c.n_max = n_max;
  return c;
}

UnfoldInputs noisy_toy(oracle::ToyKind kind, std::size_t bins, std::uint64_t seed) {
  const oracle::Toy toy = oracle::make_toy(kind, bins, 0, {.sigma = 1.0, .scale = 0.5}, seed);
  const Eigen::VectorXd expected = oracle::expected_counts(toy.response, toy.truth, 10000.0);
  return {toy.response, oracle::poisson_sample(toy.response.measured_grid(), expected, seed), {}, {}};
}

TEST(Pipeline, IdentityResponse) {
  const UnfoldInputs in{identity_response(2), counts(unit_grid(2), {100, 400}), {}, {}};
  const UnfoldReport r = unfold_measurement(in, small_config());
  EXPECT_EQ(r.best_order, 0u);
  EXPECT_EQ(r.k_rho, 1.0);
  EXPECT_EQ(r.total_counts, 500.0);
  EXPECT_NEAR(r.unfolded[0], 100.0, 1e-12);
  EXPECT_NEAR(r.unfolded[1], 400.0, 1e-12);
  EXPECT_NEAR(r.sigma[0], 10.0, 1e-12);
  EXPECT_NEAR(r.sigma[1], 20.0, 1e-12);
  EXPECT_EQ(r.bias_bound.maxCoeff(), 0.0);
  EXPECT_EQ(r.bias_bound_local.maxCoeff(), 0.0);
  EXPECT_EQ(r.probe.max_final_level, 0.0);
  EXPECT_FALSE(r.syst_bound_sg);
  EXPECT_FALSE(r.syst_bound_srho);
}

TEST(Pipeline, ChosenOrderMinimizesPenaltyColumn) {
  const UnfoldReport r = unfold_measurement(noisy_toy(oracle::ToyKind::GaussConvTruncated, 12, 1), small_config(60));
  double best = r.penalty.records.front().penalty;
  for (const auto& rec : r.penalty.records) best = std::min(best, rec.penalty);
  EXPECT_EQ(r.penalty.records[r.best_order].penalty, best);
  EXPECT_EQ(r.iterations, MRule{}(60));
  EXPECT_EQ(r.bias_comparison_order, MRule{}(r.best_order));
  // sigma is the square root of the covariance diagonal
  EXPECT_LT((r.sigma - r.covariance.diagonal().cwiseSqrt()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Pipeline, Deterministic) {
  const UnfoldInputs in = noisy_toy(oracle::ToyKind::GaussConvCyclic, 16, 2);
  EXPECT_EQ(report_to_json(unfold_measurement(in, small_config())),
            report_to_json(unfold_measurement(in, small_config())));
}

TEST(Pipeline, ThreadCountDoesNotChangeReport) {
  const UnfoldInputs in = noisy_toy(oracle::ToyKind::GaussConvTruncated, 20, 3);
  set_thread_limit(1);
  const std::string one = report_to_json(unfold_measurement(in, small_config()));
  set_thread_limit(4);
  const std::string four = report_to_json(unfold_measurement(in, small_config()));
  set_thread_limit(0);
  EXPECT_EQ(one, four);
}

TEST(Pipeline, GridMismatchAndKind) {
  UnfoldInputs in{identity_response(3), counts(unit_grid(2), {1, 2}), {}, {}};
  try {
    unfold_measurement(in, small_config());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::GridMismatch);
  }
  in.measured = Histogram(unit_grid(3), Eigen::Vector3d(1, 2, 3));
  try {
    unfold_measurement(in, small_config());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
  }
}

TEST(Pipeline, SystematicsAreReported) {
  UnfoldInputs in = noisy_toy(oracle::ToyKind::GaussConvTruncated, 10, 4);
  const BinGrid& mgrid = in.response.measured_grid();
  in.sg = Histogram(mgrid, in.measured.values() * 0.02, HistogramKind::Counts);
  in.srho = ResponseMatrix::envelope(mgrid, in.response.truth_grid(), in.response.rho() * 0.05);
  const UnfoldReport r = unfold_measurement(in, small_config());
  ASSERT_TRUE(r.syst_bound_sg && r.syst_bound_srho && r.c_factor && r.d_factor && r.fnorm_estimate);
  EXPECT_GT(*r.c_factor, 0.0);
  EXPECT_GT(*r.d_factor, 0.0);
  EXPECT_GT(r.syst_bound_sg->minCoeff(), 0.0);
  EXPECT_GT(r.syst_bound_srho->minCoeff(), 0.0);
  // doubling the envelope doubles the bound
  in.sg = Histogram(mgrid, in.measured.values() * 0.04, HistogramKind::Counts);
  const UnfoldReport twice = unfold_measurement(in, small_config());
  EXPECT_LT((*twice.syst_bound_sg - 2.0 * *r.syst_bound_sg).cwiseAbs().maxCoeff(),
            1e-12 * r.syst_bound_sg->maxCoeff());
}

TEST(Pipeline, SmoothingRuns) {
  UnfoldConfig c = small_config();
  c.smoothing_sigma = 0.8;
  const UnfoldReport r = unfold_measurement(noisy_toy(oracle::ToyKind::GaussConvCyclic, 12, 5), c);
  EXPECT_TRUE(r.unfolded.allFinite());
  EXPECT_TRUE(r.sigma.allFinite());
}

TEST(Pipeline, NormalizationOverride) {
  UnfoldConfig c = small_config();
  c.normalization_k = 3.0;
  const UnfoldReport r = unfold_measurement(noisy_toy(oracle::ToyKind::GaussConvCyclic, 12, 6), c);
  EXPECT_EQ(r.normalization, 3.0);
  EXPECT_NEAR(r.k_rho, 1.0, 1e-9);
  c.normalization_k = 0.5;
  EXPECT_THROW(unfold_measurement(noisy_toy(oracle::ToyKind::GaussConvCyclic, 12, 6), c), Error);
}

TEST(Report, JsonSchema) {
  UnfoldInputs in = noisy_toy(oracle::ToyKind::RankDeficient, 8, 7);
  in.sg = Histogram(in.response.measured_grid(), in.measured.values() * 0.01, HistogramKind::Counts);
  const UnfoldReport r = unfold_measurement(in, small_config(30));
  const auto j = nlohmann::json::parse(report_to_json(r));
  EXPECT_EQ(j["schema_version"], kReportSchemaVersion);
  EXPECT_EQ(j["n_opt"], r.best_order);
  EXPECT_EQ(j["unfolded"].size(), 8u);
  EXPECT_EQ(j["covariance"].size(), 8u);
  EXPECT_EQ(j["penalty"]["records"].size(), 31u);
  EXPECT_TRUE(j["systematics"]["bound_srho"].is_null());
  EXPECT_EQ(j["systematics"]["bound_sg"].size(), 8u);
  EXPECT_TRUE(j["config"]["normalization_k"].is_null());
  EXPECT_EQ(j["config"]["m_rule"], "4n+50");
  for (double v : j["unfolded_clipped"]) EXPECT_GE(v, 0.0);
  EXPECT_EQ(j["kernel_probe"]["verdict"], r.probe.verdict);
  EXPECT_EQ(r.probe.verdict.rfind("plateau", 0), 0u);
}

TEST(Report, PlotCsv) {
  const UnfoldReport r = unfold_measurement(noisy_toy(oracle::ToyKind::GaussConvCyclic, 6, 8), small_config());
  const std::string csv = report_plot_csv(r);
  EXPECT_EQ(csv.rfind("bin_center,value,sigma,bias_bound\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
}

TEST(Probe, Verdicts) {
  EXPECT_EQ(summarize_probe(composite(testing::uniform2()), 50).plateau_bins, 2u);
  const ProbeSummary id = summarize_probe(composite(identity_response(3)), 50);
  EXPECT_EQ(id.plateau_bins, 0u);
  EXPECT_EQ(id.verdict.rfind("decayed", 0), 0u);
  const ProbeSummary early = summarize_probe(composite(testing::uniform2()), 5);
  EXPECT_EQ(early.plateau_bins, 0u);  // too short to call
}

}  // namespace
}  // namespace unfold
