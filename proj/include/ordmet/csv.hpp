#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ordmet {

// Parse / format error carrying the source line for diagnostics.
class CsvError : public std::runtime_error {
 public:
  CsvError(std::string file, std::size_t line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
        file_(std::move(file)),
        line_(line) {}
  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

namespace csv {

// Split one record. Fields may be double-quoted; embedded quotes are doubled.
inline std::vector<std::string> split_record(const std::string& raw,
                                             const std::string& file,
                                             std::size_t line_no) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  std::size_t i = 0;
  const std::size_t n = raw.size();
  out.reserve(4);
  while (i <= n) {
    if (i == n) {
      if (quoted) throw CsvError(file, line_no, "unterminated quoted field");
      out.push_back(field);
      break;
    }
    const char c = raw[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < n && raw[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      if (!field.empty()) throw CsvError(file, line_no, "quote inside unquoted field");
      quoted = true;
    } else if (c == ',') {
      out.push_back(field);
      field.clear();
    } else if (c == '\r') {
      // tolerate CRLF line endings
    } else {
      field.push_back(c);
    }
    ++i;
  }
  return out;
}

inline bool needs_quoting(const std::string& s) {
  return s.find_first_of(",\"\n\r") != std::string::npos;
}

inline std::string quote(const std::string& s) {
  if (!needs_quoting(s)) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

struct Row {
  std::size_t line_no = 0;
  std::vector<std::string> fields;
};

// Whole-file reader: header plus data rows. Blank lines are skipped.
struct Table {
  std::vector<std::string> header;
  std::vector<Row> rows;
};

inline Table read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CsvError(path, 0, "cannot open file");
  Table t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = split_record(line, path, line_no);
    if (t.header.empty()) {
      t.header = std::move(fields);
    } else {
      if (fields.size() != t.header.size()) {
        throw CsvError(path, line_no,
                       "expected " + std::to_string(t.header.size()) + " fields, got " +
                           std::to_string(fields.size()));
      }
      t.rows.push_back(Row{line_no, std::move(fields)});
    }
  }
  if (t.header.empty()) throw CsvError(path, 0, "missing header row");
  return t;
}

inline void write_line(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    os << quote(fields[i]);
  }
  os << '\n';
}

// Strict integer parse; rejects trailing garbage and empty fields.
inline long long parse_int(const std::string& s, const std::string& file, std::size_t line_no,
                           const std::string& what) {
  if (s.empty()) throw CsvError(file, line_no, what + ": empty field");
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    throw CsvError(file, line_no, what + ": not an integer: '" + s + "'");
  }
  if (pos != s.size()) throw CsvError(file, line_no, what + ": not an integer: '" + s + "'");
  return v;
}

}  // namespace csv
}  // namespace ordmet
