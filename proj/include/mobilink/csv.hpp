#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mobilink {

// Minimal strict CSV support for the library's file formats: comma-separated,
// UTF-8, no quoting. Identifiers are restricted to [A-Za-z0-9_:.-]+ so they
// never need escaping. Fields that may contain commas (report config JSON)
// are written with standard double-quote escaping by the writer below.

inline bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
              (c >= '0' && c <= '9') || c == '_' || c == ':' || c == '.' ||
              c == '-';
    if (!ok) return false;
  }
  return true;
}

inline std::vector<std::string> split_csv_row(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      break;
    }
    fields.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

class CsvReader {
 public:
  CsvReader(const std::string& path, const std::string& expected_header)
      : path_(path), in_(path) {
    if (!in_) throw std::runtime_error("cannot open file: " + path);
    std::string header;
    if (!std::getline(in_, header))
      throw std::runtime_error(path + ": empty file, expected header '" +
                               expected_header + "'");
    strip_cr(header);
    if (header != expected_header)
      throw std::runtime_error(path + ": bad header '" + header +
                               "', expected '" + expected_header + "'");
    n_fields_ = split_csv_row(expected_header).size();
  }

  // Reads the next data row; returns false at EOF. Blank lines are skipped.
  bool next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      strip_cr(line);
      if (line.empty()) continue;
      fields = split_csv_row(line);
      if (fields.size() != n_fields_) {
        std::ostringstream os;
        os << path_ << ":" << line_no_ + 1 << ": expected " << n_fields_
           << " fields, got " << fields.size();
        throw std::runtime_error(os.str());
      }
      return true;
    }
    return false;
  }

  // 1-based line number of the row most recently returned (header is line 1).
  std::size_t line() const { return line_no_ + 1; }

  [[noreturn]] void fail(const std::string& field, const std::string& why) const {
    std::ostringstream os;
    os << path_ << ":" << line() << ": field '" << field << "': " << why;
    throw std::runtime_error(os.str());
  }

 private:
  static void strip_cr(std::string& s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
  }

  std::string path_;
  std::ifstream in_;
  std::size_t n_fields_ = 0;
  std::size_t line_no_ = 0;  // data rows read so far
};

inline double parse_double(const CsvReader& r, const std::string& name,
                           const std::string& s) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    r.fail(name, "not a number: '" + s + "'");
  return v;
}

inline std::int64_t parse_int(const CsvReader& r, const std::string& name,
                              const std::string& s) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    r.fail(name, "not an integer: '" + s + "'");
  return v;
}

// Formats a double with enough digits to round-trip exactly.
inline double parse_double_str(const std::string& s) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw std::runtime_error("not a number: '" + s + "'");
  return v;
}

inline std::int64_t parse_int_str(const std::string& s) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw std::runtime_error("not an integer: '" + s + "'");
  return v;
}

inline std::string format_double(double v) {
  char buf[40];
  int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

// Quotes a CSV field if it contains a comma, quote, or newline.
inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& header) : out_(path) {
    if (!out_) throw std::runtime_error("cannot open file for writing: " + path);
    out_ << header << '\n';
  }

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << fields[i];
    }
    out_ << '\n';
  }

  void close() { out_.close(); }

 private:
  std::ofstream out_;
};

}  // namespace mobilink
