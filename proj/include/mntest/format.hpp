#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mntest/counts.hpp"
#include "mntest/errors.hpp"

namespace mntest {

inline constexpr int kSignificantDigits = 10;

/// Text form used in every CSV and JSON output: 10 significant digits.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", kSignificantDigits, v);
  return buf;
}

/// v rounded to 10 significant digits. The shortest round-trip form of the
/// result has at most 10 digits, so JSON written from it re-serializes to
/// the same bytes.
inline double round_sig(double v) {
  if (!std::isfinite(v)) return v;
  return std::strtod(format_number(v).c_str(), nullptr);
}

/// JSON value for a real: rounded number, or null when not finite.
inline nlohmann::json json_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return round_sig(v);
}

// ---------------------------------------------------------------------------
// Counts file: CSV with header category,count1,count2
// ---------------------------------------------------------------------------

struct CountsTable {
  std::vector<std::string> categories;
  TwoSampleCounts counts;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    fields.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

inline Count parse_count(std::string_view field, std::size_t line_no) {
  Count v = 0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (field.empty() || ec != std::errc() || ptr != last) {
    throw ParseError("line " + std::to_string(line_no) + ": '" + std::string(field) +
                     "' is not an integer count");
  }
  if (v < 0) {
    throw ParseError("line " + std::to_string(line_no) + ": negative count");
  }
  return v;
}

}  // namespace detail

inline CountsTable parse_counts_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<std::string> names;
  std::vector<Count> c1, c2;
  std::set<std::string, std::less<>> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (!have_header) {
      if (fields.size() != 3 || fields[0] != "category" || fields[1] != "count1" ||
          fields[2] != "count2") {
        throw ParseError("expected header 'category,count1,count2'");
      }
      have_header = true;
      continue;
    }
    if (fields.size() != 3) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 3 fields");
    }
    std::string name(fields[0]);
    if (!seen.insert(name).second) {
      throw ParseError("line " + std::to_string(line_no) + ": duplicate category '" + name + "'");
    }
    c1.push_back(detail::parse_count(fields[1], line_no));
    c2.push_back(detail::parse_count(fields[2], line_no));
    names.push_back(std::move(name));
  }
  if (!have_header) throw ParseError("counts file is empty");
  if (names.empty()) throw ParseError("counts file has no categories");
  return {std::move(names), make_two_sample(std::move(c1), std::move(c2))};
}

inline CountsTable read_counts_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return parse_counts_csv(in);
}

inline void write_counts_csv(std::ostream& out, const std::vector<std::string>& categories,
                             const TwoSampleCounts& ts) {
  out << "category,count1,count2\n";
  for (std::size_t i = 0; i < ts.k(); ++i) {
    out << categories[i] << ',' << ts.group1()[i] << ',' << ts.group2()[i] << '\n';
  }
}

/// JSON form of a TestOutcome with rounded reals.
inline nlohmann::json outcome_json(const TestOutcome& o) {
  nlohmann::json diag = nlohmann::json::object();
  for (const auto& [key, value] : o.diagnostics) diag[key] = json_number(value);
  return {{"method", method_name(o.method)},
          {"statistic", json_number(o.statistic)},
          {"p_value", json_number(o.p_value)},
          {"reject", o.reject},
          {"alpha", json_number(o.alpha)},
          {"diagnostics", diag}};
}

}  // namespace mntest
