#include "fnlab/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>

#include "fnlab/types.hpp"

namespace fnlab::csv {

std::string format(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return cells;
}

namespace {

std::string trimmed(std::string_view cell) {
  std::size_t b = 0, e = cell.size();
  while (b < e && (cell[b] == ' ' || cell[b] == '\t')) ++b;
  while (e > b && (cell[e - 1] == ' ' || cell[e - 1] == '\t' || cell[e - 1] == '\r')) --e;
  return std::string(cell.substr(b, e - b));
}

}  // namespace

double parse_double(std::string_view cell, long line, std::size_t column) {
  const std::string s = trimmed(cell);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
    throw ParseError("column " + std::to_string(column) + ": not a number: '" + s + "'", line);
  return v;
}

long parse_long(std::string_view cell, long line, std::size_t column) {
  const std::string s = trimmed(cell);
  char* end = nullptr;
  errno = 0;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
    throw ParseError("column " + std::to_string(column) + ": not an integer: '" + s + "'", line);
  return v;
}

LineReader::LineReader(const std::string& path) : in_(path) {
  if (!in_) throw Error("cannot open '" + path + "' for reading");
}

bool LineReader::next(std::string& line) {
  while (std::getline(in_, line)) {
    ++line_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    return true;
  }
  return false;
}

Writer::Writer(const std::string& path, const std::vector<std::string>& header_comments)
    : path_(path), out_(path, std::ios::binary) {
  if (!out_) throw Error("cannot open '" + path + "' for writing");
  for (const auto& c : header_comments) out_ << "# " << c << '\n';
}

void Writer::row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
}

void Writer::close() {
  out_.flush();
  if (!out_) throw Error("write to '" + path_ + "' failed");
  out_.close();
}

}  // namespace fnlab::csv
