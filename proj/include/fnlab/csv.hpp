#ifndef FNLAB_CSV_HPP
#define FNLAB_CSV_HPP

#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace fnlab::csv {

// Shortest round-trip is not needed; every value carries 17 significant digits.
std::string format(double value);

std::vector<std::string_view> split(std::string_view line, char sep = ',');

// Throws ParseError(line) naming the column on failure.
double parse_double(std::string_view cell, long line, std::size_t column);
long parse_long(std::string_view cell, long line, std::size_t column);

/// Line reader that skips `#` comment lines and blank lines while keeping the
/// physical line number for error messages.
class LineReader {
 public:
  explicit LineReader(const std::string& path);
  bool next(std::string& line);
  long line_number() const { return line_; }

 private:
  std::ifstream in_;
  long line_ = 0;
};

/// Output file that begins with the comment block shared by every artifact.
class Writer {
 public:
  Writer(const std::string& path, const std::vector<std::string>& header_comments);
  std::ofstream& stream() { return out_; }
  void row(const std::vector<std::string>& cells);
  void close();

 private:
  std::string path_;
  std::ofstream out_;
};

}  // namespace fnlab::csv

#endif  // FNLAB_CSV_HPP
