#pragma once

#include <string>
#include <vector>

#include "speedmeter/model.hpp"

namespace speedmeter::io {

// "%.8e": ASCII, '.' decimal point, 9 significant digits.
std::string format_number(double v);

// Writes through a temporary sibling and renames it over `path`, so a failed write
// never leaves a partial file behind.
void write_file_atomic(const std::string& path, const std::string& contents);

std::string read_file(const std::string& path);

// f_hz,re,im,mag,phase_deg
std::string format_tf_csv(const model::ComplexResponse& tf);

// Accepts a header row, then f_hz,re,im with optional trailing columns.
model::ComplexResponse parse_tf_csv(const std::string& text, const std::string& origin);

struct Series {
  std::vector<double> values;
  double rate = 0.0;  // Hz
};

// Two columns (t, value) with uniform spacing, or one column sampled at `fallback_rate`.
// An optional non-numeric header line is skipped.
Series parse_series_csv(const std::string& text, const std::string& origin, double fallback_rate);

std::string format_series_csv(const std::vector<double>& values, double rate);

}  // namespace speedmeter::io
