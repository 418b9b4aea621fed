#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "fnlab/csv.hpp"
#include "fnlab/datagen.hpp"

namespace fnlab {

void write_dataset(const Dataset<double>& ds, const std::string& path,
                   const std::vector<std::string>& header_comments) {
  ds.check();
  csv::Writer w(path, header_comments);
  auto& out = w.stream();
  const int d = ds.dim();
  out << "FNDS1," << ds.num_classes << ',' << d << ',' << ds.size() << '\n';
  for (int i = 0; i < ds.size(); ++i) {
    out << ds.labels[static_cast<std::size_t>(i)] << ',' << ds.feature_slots[static_cast<std::size_t>(i)];
    for (int r = 0; r < d; ++r) out << ',' << csv::format(ds.patch1(r, i));
    for (int r = 0; r < d; ++r) out << ',' << csv::format(ds.patch2(r, i));
    out << '\n';
  }
  w.close();
}

Dataset<double> read_dataset(const std::string& path) {
  csv::LineReader in(path);
  std::string line;
  if (!in.next(line)) throw ParseError("missing FNDS1 header row", in.line_number());
  const auto head = csv::split(line);
  if (head.size() != 4 || head[0] != "FNDS1")
    throw ParseError("expected header 'FNDS1,K,d,n'", in.line_number());
  const long K = csv::parse_long(head[1], in.line_number(), 1);
  const long d = csv::parse_long(head[2], in.line_number(), 2);
  const long n = csv::parse_long(head[3], in.line_number(), 3);
  if (K < 1 || d < 1 || n < 1) throw SchemaError("header K, d, n must be positive");

  Dataset<double> ds;
  ds.num_classes = static_cast<int>(K);
  ds.patch1.resize(d, n);
  ds.patch2.resize(d, n);
  ds.labels.reserve(static_cast<std::size_t>(n));
  ds.feature_slots.reserve(static_cast<std::size_t>(n));
  const std::size_t expected = 2 + 2 * static_cast<std::size_t>(d);

  long row = 0;
  while (in.next(line)) {
    const long ln = in.line_number();
    const auto cells = csv::split(line);
    if (row >= n) throw SchemaError("more sample rows than the declared n=" + std::to_string(n));
    if (cells.size() != expected) {
      // A short final row means the file was cut off mid-write.
      std::string rest;
      if (cells.size() < expected && !in.next(rest))
        throw ParseError("truncated row: " + std::to_string(cells.size()) + " of " +
                             std::to_string(expected) + " fields",
                         ln);
      throw SchemaError("line " + std::to_string(ln) + ": expected " + std::to_string(expected) +
                        " fields for d=" + std::to_string(d) + ", found " +
                        std::to_string(cells.size()));
    }
    const long y = csv::parse_long(cells[0], ln, 0);
    const long slot = csv::parse_long(cells[1], ln, 1);
    if (y < 0 || y >= K) throw SchemaError("line " + std::to_string(ln) + ": label out of range");
    if (slot != 1 && slot != 2)
      throw SchemaError("line " + std::to_string(ln) + ": feature slot must be 1 or 2");
    ds.labels.push_back(static_cast<int>(y));
    ds.feature_slots.push_back(static_cast<int>(slot));
    for (long r = 0; r < d; ++r) ds.patch1(r, row) = csv::parse_double(cells[2 + r], ln, 2 + r);
    for (long r = 0; r < d; ++r)
      ds.patch2(r, row) = csv::parse_double(cells[2 + d + r], ln, 2 + d + r);
    ++row;
  }
  if (row != n)
    throw ParseError("truncated file: " + std::to_string(row) + " of " + std::to_string(n) +
                         " sample rows",
                     in.line_number());
  return ds;
}


void write_noise_matrices(const NoiseModel& noise, const std::string& path) {
  csv::Writer w(path, {});
  auto& out = w.stream();
  const int d = noise.dim();
  out << "NOISE1," << noise.num_classes() << ',' << d << '\n';
  for (int k = 0; k < noise.num_classes(); ++k) {
    const MatrixXd a = noise.dense(k);
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) {
        if (c) out << ',';
        out << csv::format(a(r, c));
      }
      out << '\n';
    }
  }
  w.close();
}

NoiseModel read_noise_matrices(const std::string& path) {
  csv::LineReader in(path);
  std::string line;
  if (!in.next(line)) throw ParseError("missing NOISE1 header row", in.line_number());
  const auto head = csv::split(line);
  if (head.size() != 3 || head[0] != "NOISE1")
    throw ParseError("expected header 'NOISE1,K,d'", in.line_number());
  const long K = csv::parse_long(head[1], in.line_number(), 1);
  const long d = csv::parse_long(head[2], in.line_number(), 2);
  if (K < 1 || d < 1) throw SchemaError("header K, d must be positive");
  std::vector<MatrixXd> maps(static_cast<std::size_t>(K), MatrixXd(d, d));
  long row = 0;
  while (in.next(line)) {
    const long ln = in.line_number();
    if (row >= K * d) throw SchemaError("more rows than K*d");
    const auto cells = csv::split(line);
    if (cells.size() != static_cast<std::size_t>(d))
      throw SchemaError("line " + std::to_string(ln) + ": expected " + std::to_string(d) + " values");
    auto& a = maps[static_cast<std::size_t>(row / d)];
    for (long c = 0; c < d; ++c) a(row % d, c) = csv::parse_double(cells[static_cast<std::size_t>(c)], ln, static_cast<std::size_t>(c));
    ++row;
  }
  if (row != K * d) throw ParseError("truncated noise file", in.line_number());
  return NoiseModel::from_matrices(std::move(maps));
}

void check_noise_orthogonality(const FeatureBank& bank, const NoiseModel& noise) {
  if (noise.dim() != bank.dim()) throw SchemaError("noise transforms and features differ in dimension");
  for (int y = 0; y < noise.num_classes(); ++y) {
    const MatrixXd proj = noise.apply_transpose(y, bank.features);  // A_y^T u_k
    for (int k = 0; k < bank.num_classes(); ++k) {
      const double scale = bank.norm(k) * std::sqrt(noise.trace_gram(y));
      if (proj.col(k).norm() > 1e-8 * std::max(scale, 1e-300))
        throw SchemaError("noise transform " + std::to_string(y) + " is not orthogonal to feature " +
                          std::to_string(k));
    }
  }
}

}  // namespace fnlab
