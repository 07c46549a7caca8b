#pragma once

// Minimal numeric CSV reader: header row, comma separator, '.' decimal.

#include "tuneinf/core.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace tuneinf {

struct CsvTable {
  std::vector<std::string> header;
  RowMat values;

  int column(const std::string& name) const {
    for (std::size_t j = 0; j < header.size(); ++j)
      if (header[j] == name) return static_cast<int>(j);
    return -1;
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && (s[a] == ' ' || s[a] == '\t' || s[a] == '\r' || s[a] == '"')) ++a;
  while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r' || s[b - 1] == '"')) --b;
  return std::string(s.substr(a, b - a));
}

inline std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

inline CsvTable parse_csv(std::istream& in, const std::string& source = "<stream>") {
  CsvTable t;
  std::string line;
  std::size_t line_no = 0;
  // skip UTF-8 BOM and blank leading lines
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (!detail::trim(line).empty()) break;
  }
  if (detail::trim(line).empty()) throw Error(ErrorCode::InvalidInput, source + ": empty CSV");
  t.header = detail::split_commas(line);
  const std::size_t cols = t.header.size();

  std::vector<double> buf;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_commas(line);
    if (fields.size() != cols)
      throw Error(ErrorCode::InvalidInput, source + ": line " + std::to_string(line_no) + " has " +
                                               std::to_string(fields.size()) + " fields, expected " +
                                               std::to_string(cols));
    for (std::size_t j = 0; j < cols; ++j) {
      const std::string& f = fields[j];
      double v = 0.0;
      const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (f.empty() || res.ec != std::errc() || res.ptr != f.data() + f.size() || !std::isfinite(v))
        throw Error(ErrorCode::InvalidInput, source + ": line " + std::to_string(line_no) + ", column '" +
                                                 t.header[j] + "': cannot parse '" + f + "' as a number");
      buf.push_back(v);
    }
    ++rows;
  }
  t.values = Eigen::Map<RowMat>(buf.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  return t;
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open " + path);
  return parse_csv(in, path);
}

}  // namespace tuneinf
