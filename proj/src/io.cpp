#include "speedmeter/io.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "speedmeter/error.hpp"

namespace speedmeter::io {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    const auto a = field.find_first_not_of(" \t");
    const auto b = field.find_last_not_of(" \t");
    out.push_back(a == std::string::npos ? std::string() : field.substr(a, b - a + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool to_double(const std::string& s, double& out) {
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return !s.empty() && ec == std::errc() && ptr == end;
}

// Splits into lines, dropping a trailing CR and blank lines; keeps 1-based line numbers.
std::vector<std::pair<std::size_t, std::string>> numbered_lines(const std::string& text) {
  std::vector<std::pair<std::size_t, std::string>> out;
  std::stringstream ss(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(ss, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    out.emplace_back(n, line);
  }
  return out;
}

bool is_header(const std::string& line) {
  const auto fields = split_fields(line);
  double ignored = 0.0;
  return !fields.empty() && !to_double(fields.front(), ignored);
}

[[noreturn]] void parse_fail(const std::string& origin, std::size_t line, const std::string& what) {
  throw Error(ErrorCode::parse, origin + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.8e", v);
  return buf;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot write '" + path + "': " + std::strerror(errno));
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ignored;
      fs::remove(tmp, ignored);
      throw Error(ErrorCode::io, "write failed for '" + path + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw Error(ErrorCode::io, "cannot replace '" + path + "': " + ec.message());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string format_tf_csv(const model::ComplexResponse& tf) {
  std::string out = "f_hz,re,im,mag,phase_deg\n";
  for (std::size_t i = 0; i < tf.size(); ++i) {
    const auto v = tf.values[i];
    out += format_number(tf.freqs[i]) + ',' + format_number(v.real()) + ',' +
           format_number(v.imag()) + ',' + format_number(std::abs(v)) + ',' +
           format_number(std::arg(v) * 180.0 / model::kPi) + '\n';
  }
  return out;
}

model::ComplexResponse parse_tf_csv(const std::string& text, const std::string& origin) {
  model::ComplexResponse out;
  const auto lines = numbered_lines(text);
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const auto& [n, line] = lines[k];
    if (k == 0 && is_header(line)) continue;
    const auto fields = split_fields(line);
    if (fields.size() < 3) parse_fail(origin, n, "expected at least 3 columns (f_hz,re,im)");
    double f = 0.0, re = 0.0, im = 0.0;
    if (!to_double(fields[0], f)) parse_fail(origin, n, "bad frequency '" + fields[0] + "'");
    if (!to_double(fields[1], re)) parse_fail(origin, n, "bad real part '" + fields[1] + "'");
    if (!to_double(fields[2], im)) parse_fail(origin, n, "bad imaginary part '" + fields[2] + "'");
    if (!std::isfinite(f) || !std::isfinite(re) || !std::isfinite(im)) {
      parse_fail(origin, n, "non-finite value");
    }
    if (!out.freqs.empty() && !(f > out.freqs.back())) {
      parse_fail(origin, n, "frequencies must strictly increase");
    }
    out.freqs.push_back(f);
    out.values.emplace_back(re, im);
  }
  if (out.freqs.empty()) throw Error(ErrorCode::parse, origin + ": no data rows");
  return out;
}

Series parse_series_csv(const std::string& text, const std::string& origin, double fallback_rate) {
  Series out;
  std::vector<double> times;
  std::size_t columns = 0;
  const auto lines = numbered_lines(text);
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const auto& [n, line] = lines[k];
    if (k == 0 && is_header(line)) continue;
    const auto fields = split_fields(line);
    if (columns == 0) {
      columns = fields.size();
      if (columns != 1 && columns != 2) parse_fail(origin, n, "expected 1 or 2 columns");
    } else if (fields.size() != columns) {
      parse_fail(origin, n, "expected " + std::to_string(columns) + " columns");
    }
    for (std::size_t c = 0; c < columns; ++c) {
      double v = 0.0;
      if (!to_double(fields[c], v) || !std::isfinite(v)) {
        parse_fail(origin, n, "bad number '" + fields[c] + "'");
      }
      if (columns == 2 && c == 0) {
        times.push_back(v);
      } else {
        out.values.push_back(v);
      }
    }
  }
  if (out.values.empty()) throw Error(ErrorCode::parse, origin + ": no data rows");

  if (columns == 1) {
    if (!(fallback_rate > 0.0)) {
      throw invalid_argument("single-column series needs a positive sample rate");
    }
    out.rate = fallback_rate;
    return out;
  }
  if (times.size() < 2) throw Error(ErrorCode::parse, origin + ": need at least two samples");
  const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  if (!(dt > 0.0)) throw Error(ErrorCode::parse, origin + ": time column must increase");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (std::abs(times[i] - times[i - 1] - dt) > 1e-3 * dt + 2e-8 * std::abs(times[i])) {
      throw Error(ErrorCode::parse, origin + ": non-uniform sampling near row " + std::to_string(i + 1));
    }
  }
  out.rate = 1.0 / dt;
  return out;
}

std::string format_series_csv(const std::vector<double>& values, double rate) {
  std::string out = "t,length\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    out += format_number(static_cast<double>(i) / rate) + ',' + format_number(values[i]) + '\n';
  }
  return out;
}

}  // namespace speedmeter::io
