#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "unfold/config.hpp"
#include "unfold/histogram.hpp"

namespace unfold::io {

/// Doubles are written in scientific notation with 17 significant digits,
/// which round-trips every finite value exactly.
std::string format_double(double value);

// Histogram CSV:
//   # edges: e0,e1,...,en
//   0,v0
//   1,v1
//   ...
void write_histogram(std::ostream& out, const Histogram& h);
Histogram read_histogram(std::istream& in, HistogramKind kind = HistogramKind::Density);

// Response CSV:
//   # measured_edges: ...
//   # truth_edges: ...
//   i,j,rho          (entries not listed are zero)
void write_response(std::ostream& out, const ResponseMatrix& r);
/// `envelope` skips the column-normalization check (for s_rho files).
ResponseMatrix read_response(std::istream& in, bool envelope = false);

// Config: one `key = value` per line, '#' starts a comment.
void write_config(std::ostream& out, const UnfoldConfig& config);
UnfoldConfig read_config(std::istream& in);

Histogram load_histogram(const std::filesystem::path& path,
                         HistogramKind kind = HistogramKind::Density);
ResponseMatrix load_response(const std::filesystem::path& path, bool envelope = false);
UnfoldConfig load_config(const std::filesystem::path& path);

void save_histogram(const std::filesystem::path& path, const Histogram& h);
void save_response(const std::filesystem::path& path, const ResponseMatrix& r);
void save_config(const std::filesystem::path& path, const UnfoldConfig& config);
void save_text(const std::filesystem::path& path, const std::string& text);

}  // namespace unfold::io
