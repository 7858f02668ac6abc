#include "gtab/csv.hpp"

#include <charconv>
#include <fstream>

#include "gtab/error.hpp"
#include "gtab/types.hpp"

namespace gtab::csv {

std::vector<std::string> split_line(std::string_view line, char delim) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim || (delim == ' ' && c == '\t')) {
      if (delim == ' ' && cur.empty()) continue;  // runs of whitespace
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!(delim == ' ' && cur.empty())) out.push_back(std::move(cur));
  return out;
}

char detect_delimiter(std::string_view line) {
  if (line.find(',') != std::string_view::npos) return ',';
  if (line.find('\t') != std::string_view::npos) return '\t';
  return ' ';
}

Table read(const std::filesystem::path& path, bool has_header) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string() + ": cannot open file");
  Table t;
  std::string line;
  std::size_t lineno = 0;
  char delim = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (delim == 0) delim = detect_delimiter(line);
    auto fields = split_line(line, delim);
    if (has_header && t.header.empty() && t.rows.empty()) {
      for (auto& f : fields) f = trim(f);
      t.header = std::move(fields);
      continue;
    }
    t.rows.push_back(std::move(fields));
    t.line_numbers.push_back(lineno);
  }
  if (has_header && t.header.empty()) throw InputError(path.string() + ": missing header row");
  return t;
}

std::string quote(std::string_view field, char delim) {
  if (field.find_first_of(std::string{delim, '"', '\n'}) == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_double(double v) {
  if (is_missing(v)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

bool parse_double(std::string_view cell, double& out) {
  std::string s = trim(cell);
  if (s.empty() || s == "nan" || s == "NaN" || s == "NA" || s == "-nan") {
    out = kMissing;
    return true;
  }
  const char* first = s.data();
  if (*first == '+') ++first;
  auto res = std::from_chars(first, s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace gtab::csv
