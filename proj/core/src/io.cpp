#include "unfold/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string_view>
#include <utility>
#include <vector>

#include "unfold/error.hpp"

namespace unfold::io {

std::string format_double(double value) {
  char buf[40];
  const int len = std::snprintf(buf, sizeof buf, "%.16e", value);
  return std::string(buf, static_cast<std::size_t>(len));
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what);
}

double parse_double(std::string_view text, std::size_t line, const char* field) {
  text = trim(text);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    parse_fail(line, std::string("field '") + field + "' is not a number: '" + std::string(text) + "'");
  }
  return value;
}

std::size_t parse_index(std::string_view text, std::size_t line, const char* field) {
  text = trim(text);
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    parse_fail(line, std::string("field '") + field + "' is not an index: '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

// Reads lines with their 1-based numbers, skipping blank ones.
struct LineReader {
  std::istream& in;
  std::size_t number = 0;

  bool next(std::string& line) {
    while (std::getline(in, line)) {
      ++number;
      if (!trim(line).empty()) return true;
    }
    return false;
  }
};

std::vector<double> parse_edges_header(std::string_view line, std::string_view key,
                                       std::size_t number) {
  std::string_view body = trim(line);
  if (body.empty() || body.front() != '#') parse_fail(number, "expected '# " + std::string(key) + ": ...'");
  body = trim(body.substr(1));
  if (body.substr(0, key.size()) != key || body.size() <= key.size() || body[key.size()] != ':') {
    parse_fail(number, "expected header '" + std::string(key) + ":'");
  }
  body = body.substr(key.size() + 1);
  std::vector<double> edges;
  for (auto part : split(body, ',')) edges.push_back(parse_double(part, number, std::string(key).c_str()));
  return edges;
}

BinGrid make_grid(std::vector<double> edges, std::size_t line, std::string_view key) {
  try {
    return BinGrid(std::move(edges));
  } catch (const Error& e) {
    parse_fail(line, std::string(key) + ": " + e.message());
  }
}

void join_edges(std::ostream& out, const BinGrid& grid) {
  const auto& edges = grid.edges();
  for (std::size_t k = 0; k < edges.size(); ++k) {
    if (k) out << ',';
    out << format_double(edges[k]);
  }
  out << '\n';
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path.string() + "'");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

void write_histogram(std::ostream& out, const Histogram& h) {
  out << "# edges: ";
  join_edges(out, h.grid());
  for (std::size_t k = 0; k < h.size(); ++k) out << k << ',' << format_double(h[k]) << '\n';
}

Histogram read_histogram(std::istream& in, HistogramKind kind) {
  LineReader reader{in};
  std::string line;
  if (!reader.next(line)) parse_fail(reader.number, "empty histogram file");
  const std::size_t header_line = reader.number;
  BinGrid grid = make_grid(parse_edges_header(line, "edges", header_line), header_line, "edges");

  Eigen::VectorXd values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size()));
  std::vector<bool> seen(grid.size(), false);
  while (reader.next(line)) {
    const auto body = trim(line);
    if (body.front() == '#') continue;
    const auto fields = split(body, ',');
    if (fields.size() != 2) parse_fail(reader.number, "expected 'bin_index,value'");
    const std::size_t k = parse_index(fields[0], reader.number, "bin_index");
    if (k >= grid.size()) parse_fail(reader.number, "bin_index " + std::to_string(k) + " out of range");
    if (seen[k]) parse_fail(reader.number, "bin_index " + std::to_string(k) + " listed twice");
    seen[k] = true;
    values[static_cast<Eigen::Index>(k)] = parse_double(fields[1], reader.number, "value");
  }
  for (std::size_t k = 0; k < seen.size(); ++k) {
    if (!seen[k]) parse_fail(reader.number, "bin_index " + std::to_string(k) + " missing");
  }
  try {
    return Histogram(std::move(grid), std::move(values), kind);
  } catch (const Error& e) {
    parse_fail(reader.number, std::string("value: ") + e.message());
  }
}

void write_response(std::ostream& out, const ResponseMatrix& r) {
  out << "# measured_edges: ";
  join_edges(out, r.measured_grid());
  out << "# truth_edges: ";
  join_edges(out, r.truth_grid());
  for (std::size_t i = 0; i < r.rows(); ++i) {
    for (std::size_t j = 0; j < r.cols(); ++j) {
      if (r(i, j) != 0.0) out << i << ',' << j << ',' << format_double(r(i, j)) << '\n';
    }
  }
}

ResponseMatrix read_response(std::istream& in, bool envelope) {
  LineReader reader{in};
  std::string line;
  if (!reader.next(line)) parse_fail(reader.number, "empty response file");
  BinGrid measured = make_grid(parse_edges_header(line, "measured_edges", reader.number),
                               reader.number, "measured_edges");
  if (!reader.next(line)) parse_fail(reader.number, "missing truth_edges header");
  BinGrid truth = make_grid(parse_edges_header(line, "truth_edges", reader.number), reader.number,
                            "truth_edges");

  Eigen::MatrixXd rho = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(measured.size()),
                                              static_cast<Eigen::Index>(truth.size()));
  std::set<std::pair<std::size_t, std::size_t>> seen;
  while (reader.next(line)) {
    const auto body = trim(line);
    if (body.front() == '#') continue;
    const auto fields = split(body, ',');
    if (fields.size() != 3) parse_fail(reader.number, "expected 'i,j,rho'");
    const std::size_t i = parse_index(fields[0], reader.number, "i");
    const std::size_t j = parse_index(fields[1], reader.number, "j");
    if (i >= measured.size()) parse_fail(reader.number, "i " + std::to_string(i) + " out of range");
    if (j >= truth.size()) parse_fail(reader.number, "j " + std::to_string(j) + " out of range");
    if (!seen.emplace(i, j).second) {
      parse_fail(reader.number, "entry (" + std::to_string(i) + "," + std::to_string(j) + ") listed twice");
    }
    rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
        parse_double(fields[2], reader.number, "rho");
  }
  try {
    if (envelope) return ResponseMatrix::envelope(std::move(measured), std::move(truth), std::move(rho));
    return ResponseMatrix(std::move(measured), std::move(truth), std::move(rho));
  } catch (const Error& e) {
    parse_fail(reader.number, std::string("rho: ") + e.message());
  }
}

void write_config(std::ostream& out, const UnfoldConfig& c) {
  out << "n_max = " << c.n_max << '\n';
  out << "eps = " << format_double(c.eps) << '\n';
  out << "m_rule = " << c.m_rule.to_string() << '\n';
  out << "weights_bias = " << format_double(c.weights_bias) << '\n';
  out << "weights_stat = " << format_double(c.weights_stat) << '\n';
  if (c.smoothing_sigma) out << "smoothing_sigma = " << format_double(*c.smoothing_sigma) << '\n';
  if (c.systematics_sg_file) out << "systematics_sg_file = " << *c.systematics_sg_file << '\n';
  if (c.systematics_srho_file) out << "systematics_srho_file = " << *c.systematics_srho_file << '\n';
  out << "seed = " << c.seed << '\n';
  if (c.normalization_k) out << "normalization_k = " << format_double(*c.normalization_k) << '\n';
}

UnfoldConfig read_config(std::istream& in) {
  UnfoldConfig c;
  LineReader reader{in};
  std::string line;
  std::set<std::string> seen;
  while (reader.next(line)) {
    std::string_view body = trim(line);
    if (const auto hash = body.find('#'); hash != std::string_view::npos) body = trim(body.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) parse_fail(reader.number, "expected 'key = value'");
    const std::string key(trim(body.substr(0, eq)));
    const std::string_view value = trim(body.substr(eq + 1));
    if (!seen.insert(key).second) parse_fail(reader.number, "key '" + key + "' given twice");
    const std::size_t n = reader.number;
    if (key == "n_max") {
      c.n_max = parse_index(value, n, "n_max");
    } else if (key == "eps") {
      c.eps = parse_double(value, n, "eps");
      if (!(c.eps >= 0.0)) parse_fail(n, "field 'eps' must be non-negative");
    } else if (key == "m_rule") {
      try {
        c.m_rule = MRule::parse(value);
      } catch (const Error& e) {
        parse_fail(n, std::string("field 'm_rule': ") + e.message());
      }
    } else if (key == "weights_bias") {
      c.weights_bias = parse_double(value, n, "weights_bias");
    } else if (key == "weights_stat") {
      c.weights_stat = parse_double(value, n, "weights_stat");
    } else if (key == "smoothing_sigma") {
      c.smoothing_sigma = parse_double(value, n, "smoothing_sigma");
      if (!(*c.smoothing_sigma > 0.0)) parse_fail(n, "field 'smoothing_sigma' must be positive");
    } else if (key == "systematics_sg_file") {
      c.systematics_sg_file = std::string(value);
    } else if (key == "systematics_srho_file") {
      c.systematics_srho_file = std::string(value);
    } else if (key == "seed") {
      std::uint64_t seed = 0;
      auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), seed);
      if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) {
        parse_fail(n, "field 'seed' is not an unsigned integer");
      }
      c.seed = seed;
    } else if (key == "normalization_k") {
      c.normalization_k = parse_double(value, n, "normalization_k");
      if (!(*c.normalization_k > 0.0)) parse_fail(n, "field 'normalization_k' must be positive");
    } else {
      parse_fail(n, "unknown key '" + key + "'");
    }
  }
  return c;
}

Histogram load_histogram(const std::filesystem::path& path, HistogramKind kind) {
  auto in = open_in(path);
  try {
    return read_histogram(in, kind);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.message());
  }
}

ResponseMatrix load_response(const std::filesystem::path& path, bool envelope) {
  auto in = open_in(path);
  try {
    return read_response(in, envelope);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.message());
  }
}

UnfoldConfig load_config(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return read_config(in);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.message());
  }
}

void save_histogram(const std::filesystem::path& path, const Histogram& h) {
  auto out = open_out(path);
  write_histogram(out, h);
}

void save_response(const std::filesystem::path& path, const ResponseMatrix& r) {
  auto out = open_out(path);
  write_response(out, r);
}

void save_config(const std::filesystem::path& path, const UnfoldConfig& config) {
  auto out = open_out(path);
  write_config(out, config);
}

void save_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

}  // namespace unfold::io
