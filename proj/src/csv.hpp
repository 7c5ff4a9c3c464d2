#pragma once

// Minimal delimiter-separated reader shared by the parsers. Fields are
// trimmed; quoting is not supported because none of the schemas need it.

#include <charconv>
#include <cmath>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "glucolens/error.hpp"

namespace glucolens::csv {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::vector<std::string> split(std::string_view line, char delim = ',') {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = line.find(delim, pos);
    out.emplace_back(trim(line.substr(pos, next == std::string_view::npos ? next : next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

struct Row {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

class Reader {
 public:
  // Reads and checks the header line verbatim (after trimming).
  Reader(std::istream& in, std::string_view expected_header) : in_(in) {
    std::string header;
    if (!std::getline(in_, header)) {
      fail(ErrorCode::MalformedRow, "line 1: missing header");
    }
    line_ = 1;
    if (trim(header) != expected_header) {
      fail(ErrorCode::MalformedRow,
           fmt::format("line 1: expected header '{}', got '{}'", expected_header, trim(header)));
    }
    columns_ = split(expected_header).size();
  }

  // Returns false at end of input. Blank lines are skipped.
  bool next(Row& row) {
    std::string text;
    while (std::getline(in_, text)) {
      ++line_;
      if (trim(text).empty()) continue;
      row.line = line_;
      row.fields = split(text);
      if (row.fields.size() != columns_) {
        fail(ErrorCode::MalformedRow, fmt::format("line {}: expected {} fields, got {}", line_,
                                                  columns_, row.fields.size()));
      }
      return true;
    }
    return false;
  }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
  std::size_t columns_ = 0;
};

inline double to_double(const Row& row, std::size_t col) {
  const std::string& s = row.fields.at(col);
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    fail(ErrorCode::MalformedRow, fmt::format("line {}: bad number '{}'", row.line, s));
  }
  return v;
}

// Re-raises parse failures of a single field with the row's line number.
template <typename F>
auto with_line(const Row& row, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.detail().rfind("line ", 0) == 0) throw;
    throw Error(e.code(), fmt::format("line {}: {}", row.line, e.detail()));
  }
}

}  // namespace glucolens::csv
