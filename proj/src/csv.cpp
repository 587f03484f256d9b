#include "simclust/bench.hpp"
#include "simclust/error.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

namespace simclust::bench {
namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
  fail(ErrorKind::parse, "line " + std::to_string(line) + ": " + what);
}

template <typename T>
T parse_field(std::string_view field, std::size_t line) {
  T value{};
  const char* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc() || ptr != end) {
    parse_error(line, "'" + std::string(field) + "' is not a number");
  }
  return value;
}

}  // namespace

std::string to_csv(const PointSet& points) {
  points.validate();
  std::string out;
  const std::size_t d = points.dims();
  for (std::size_t k = 0; k < d; ++k) {
    if (k) out += ',';
    out += 'x' + std::to_string(k);
  }
  if (points.labels) out += ",label";
  out += '\n';
  char buf[32];
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      if (k) out += ',';
      std::snprintf(buf, sizeof buf, "%.17g",
                    points.coords(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)));
      out += buf;
    }
    if (points.labels) out += ',' + std::to_string((*points.labels)[i]);
    out += '\n';
  }
  return out;
}

void write_csv(const PointSet& points, const std::filesystem::path& path) {
  const std::string text = to_csv(points);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::input, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorKind::input, "failed writing " + path.string());
}

PointSet parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) fail(ErrorKind::input, "CSV is empty");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  bool has_label = false;
  std::size_t d = 0;
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == "x" + std::to_string(k)) {
      if (has_label) parse_error(line_no, "label must be the last column");
      ++d;
    } else if (header[k] == "label" && k + 1 == header.size()) {
      has_label = true;
    } else {
      parse_error(line_no, "unexpected header field '" + std::string(header[k]) + "'");
    }
  }
  if (d == 0) parse_error(line_no, "header declares no coordinate columns");

  std::vector<double> values;
  std::vector<int> labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != header.size()) {
      parse_error(line_no, "expected " + std::to_string(header.size()) + " fields, found " +
                               std::to_string(fields.size()));
    }
    for (std::size_t k = 0; k < d; ++k) values.push_back(parse_field<double>(fields[k], line_no));
    if (has_label) {
      const int label = parse_field<int>(fields[d], line_no);
      if (label < 1) parse_error(line_no, "labels must be positive");
      labels.push_back(label);
    }
  }
  const std::size_t n = values.size() / d;
  if (n == 0) fail(ErrorKind::input, "CSV has no data rows (N = 0)");
  PointSet out;
  out.coords.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      out.coords(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = values[i * d + k];
    }
  }
  if (has_label) out.labels = std::move(labels);
  out.validate();
  return out;
}

PointSet read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::input, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

}  // namespace simclust::bench
