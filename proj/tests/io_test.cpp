#include <cmath>
#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "support.hpp"
#include "unfold/error.hpp"
#include "unfold/io.hpp"

namespace unfold {
namespace {

using testing::unit_grid;

std::string parse_error(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    return e.message();
  }
  ADD_FAILURE() << "no error";
  return {};
}

TEST(FormatDouble, RoundTripsExactly) {
  oracle::CounterRng rng(3, 0);
  for (int k = 0; k < 2000; ++k) {
    const double x = (rng.uniform() - 0.5) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    EXPECT_EQ(std::stod(io::format_double(x)), x);
  }
  EXPECT_EQ(io::format_double(0.5), "5.0000000000000000e-01");
}

TEST(HistogramIo, RoundTrip) {
  oracle::CounterRng rng(5, 0);
  const BinGrid grid({-1.0, -0.25, 0.1, 3.0});
  const Histogram h(grid, Eigen::Vector3d(rng.uniform(), 1e-300, 12345.678));
  std::stringstream s;
  io::write_histogram(s, h);
  const Histogram back = io::read_histogram(s);
  EXPECT_EQ(back.grid().edges(), grid.edges());
  EXPECT_EQ(back.values(), h.values());
}

TEST(HistogramIo, AcceptsCommentsBlankLinesAndAnyOrder) {
  std::istringstream s("# edges: 0, 1, 3\n\n1, 2.5\n# note\n0,1\n");
  const Histogram h = io::read_histogram(s, HistogramKind::Counts);
  EXPECT_EQ(h[0], 1.0);
  EXPECT_EQ(h[1], 2.5);
  EXPECT_EQ(h.kind(), HistogramKind::Counts);
}

TEST(HistogramIo, ErrorsNameFieldAndLine) {
  auto read = [](const char* text) {
    return parse_error([&] {
      std::istringstream s(text);
      io::read_histogram(s);
    });
  };
  EXPECT_EQ(read(""), "line 0: empty histogram file");
  EXPECT_NE(read("edges: 0,1\n0,1\n").find("line 1"), std::string::npos);
  EXPECT_NE(read("# edges: 0,1\n0,abc\n").find("line 2: field 'value'"), std::string::npos);
  EXPECT_NE(read("# edges: 0,1\nx,1\n").find("field 'bin_index'"), std::string::npos);
  EXPECT_NE(read("# edges: 0,1,2\n0,1\n").find("bin_index 1 missing"), std::string::npos);
  EXPECT_NE(read("# edges: 0,1\n0,1\n0,2\n").find("line 3"), std::string::npos);
  EXPECT_NE(read("# edges: 0,1\n5,1\n").find("out of range"), std::string::npos);
  EXPECT_NE(read("# edges: 1,0\n0,1\n").find("edges"), std::string::npos);
  EXPECT_NE(read("# edges: 0,1\n0,1,2\n").find("line 2"), std::string::npos);
}

TEST(ResponseIo, RoundTrip) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = testing::random_instance(seed, 2, 20);
    std::stringstream s;
    io::write_response(s, inst.response);
    const ResponseMatrix back = io::read_response(s);
    EXPECT_EQ(back.rho(), inst.response.rho());
    EXPECT_EQ(back.truth_grid().edges(), inst.response.truth_grid().edges());
    EXPECT_EQ(back.measured_grid().edges(), inst.response.measured_grid().edges());
  }
}

TEST(ResponseIo, Errors) {
  auto read = [](const char* text, bool envelope = false) {
    return parse_error([&] {
      std::istringstream s(text);
      io::read_response(s, envelope);
    });
  };
  EXPECT_NE(read("# measured_edges: 0,1\n").find("truth_edges"), std::string::npos);
  EXPECT_NE(read("# measured_edges: 0,1\n# truth_edges: 0,1\n0,0,q\n").find("line 3: field 'rho'"),
            std::string::npos);
  EXPECT_NE(read("# measured_edges: 0,1\n# truth_edges: 0,1\n0,3,1\n").find("j 3 out of range"),
            std::string::npos);
  EXPECT_NE(read("# measured_edges: 0,1\n# truth_edges: 0,1\n0,0,1\n0,0,1\n").find("listed twice"),
            std::string::npos);
  // column efficiency above one is only allowed for envelopes
  const char* heavy = "# measured_edges: 0,1\n# truth_edges: 0,1\n0,0,2\n";
  EXPECT_NE(read(heavy).find("rho"), std::string::npos);
  std::istringstream s(heavy);
  EXPECT_EQ(io::read_response(s, true)(0, 0), 2.0);
}

TEST(ConfigIo, RoundTrip) {
  UnfoldConfig c;
  c.n_max = 77;
  c.eps = 0.125;
  c.m_rule = MRule{3, 9};
  c.weights_bias = 0.3;
  c.weights_stat = 2.0;
  c.smoothing_sigma = 1.5;
  c.systematics_sg_file = "sg.csv";
  c.systematics_srho_file = "dir/srho.csv";
  c.seed = 18446744073709551615ULL;
  c.normalization_k = 2.0;
  std::stringstream s;
  io::write_config(s, c);
  EXPECT_EQ(io::read_config(s), c);

  std::stringstream d;
  io::write_config(d, UnfoldConfig{});
  EXPECT_EQ(io::read_config(d), UnfoldConfig{});
}

TEST(ConfigIo, DefaultsAndComments) {
  std::istringstream s("# everything default but n_max\n\n n_max = 12   # trailing\n");
  UnfoldConfig expected;
  expected.n_max = 12;
  EXPECT_EQ(io::read_config(s), expected);
}

TEST(ConfigIo, ErrorsNameFieldAndLine) {
  auto read = [](const char* text) {
    return parse_error([&] {
      std::istringstream s(text);
      io::read_config(s);
    });
  };
  EXPECT_EQ(read("n_max = 5\nfoo = 1\n"), "line 2: unknown key 'foo'");
  EXPECT_EQ(read("eps = -1\n"), "line 1: field 'eps' must be non-negative");
  EXPECT_NE(read("\nn_max = x\n").find("line 2: field 'n_max'"), std::string::npos);
  EXPECT_NE(read("m_rule = 4n\n").find("field 'm_rule'"), std::string::npos);
  EXPECT_NE(read("seed = -3\n").find("field 'seed'"), std::string::npos);
  EXPECT_NE(read("smoothing_sigma = 0\n").find("smoothing_sigma"), std::string::npos);
  EXPECT_NE(read("normalization_k = -1\n").find("normalization_k"), std::string::npos);
  EXPECT_EQ(read("eps = 1\neps = 2\n"), "line 2: key 'eps' given twice");
  EXPECT_EQ(read("n_max\n"), "line 1: expected 'key = value'");
}

TEST(Files, LoadPrefixesPath) {
  const auto dir = std::filesystem::temp_directory_path() / "unfold_io_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "bad.csv";
  io::save_text(path, "# edges: 0,1\n0,nan?\n");
  const std::string msg = parse_error([&] { io::load_histogram(path); });
  EXPECT_EQ(msg.rfind(path.string() + ": line 2", 0), 0u) << msg;
  try {
    io::load_config(dir / "missing.txt");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
  }
  const Histogram h(unit_grid(2), Eigen::Vector2d(1, 2));
  io::save_histogram(dir / "h.csv", h);
  EXPECT_EQ(io::load_histogram(dir / "h.csv").values(), h.values());
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace unfold
