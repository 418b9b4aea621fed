#include <string>

#include "fnlab/csv.hpp"
#include "fnlab/net.hpp"

namespace fnlab {

void write_model(const ModelParams<double>& w, const std::string& path,
                 const std::vector<std::string>& header_comments) {
  csv::Writer out(path, header_comments);
  auto& s = out.stream();
  s << "W1," << w.num_classes << ',' << w.width << ',' << w.dim << ',' << csv::format(w.init_sigma)
    << '\n';
  for (Eigen::Index row = 0; row < w.weights.rows(); ++row) {
    for (Eigen::Index c = 0; c < w.weights.cols(); ++c) {
      if (c) s << ',';
      s << csv::format(w.weights(row, c));
    }
    s << '\n';
  }
  out.close();
}

ModelParams<double> read_model(const std::string& path) {
  csv::LineReader in(path);
  std::string line;
  if (!in.next(line)) throw ParseError("missing W1 header row", in.line_number());
  const auto head = csv::split(line);
  if (head.size() != 5 || head[0] != "W1")
    throw ParseError("expected header 'W1,K,m,d,sigma0'", in.line_number());
  ModelParams<double> w;
  w.num_classes = static_cast<int>(csv::parse_long(head[1], in.line_number(), 1));
  w.width = static_cast<int>(csv::parse_long(head[2], in.line_number(), 2));
  w.dim = static_cast<int>(csv::parse_long(head[3], in.line_number(), 3));
  w.init_sigma = csv::parse_double(head[4], in.line_number(), 4);
  if (w.num_classes < 1 || w.width < 1 || w.dim < 1)
    throw SchemaError("model header K, m, d must be positive");
  const long rows = static_cast<long>(w.num_classes) * w.width;
  w.weights.resize(rows, w.dim);
  long row = 0;
  while (in.next(line)) {
    const long ln = in.line_number();
    if (row >= rows) throw SchemaError("more weight rows than K*m");
    const auto cells = csv::split(line);
    if (cells.size() != static_cast<std::size_t>(w.dim))
      throw SchemaError("line " + std::to_string(ln) + ": expected " + std::to_string(w.dim) +
                        " weights, found " + std::to_string(cells.size()));
    for (int c = 0; c < w.dim; ++c) w.weights(row, c) = csv::parse_double(cells[static_cast<std::size_t>(c)], ln, static_cast<std::size_t>(c));
    ++row;
  }
  if (row != rows)
    throw ParseError("truncated model: " + std::to_string(row) + " of " + std::to_string(rows) +
                         " weight rows",
                     in.line_number());
  return w;
}

}  // namespace fnlab
