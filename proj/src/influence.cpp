#include "fnlab/influence.hpp"

#include <numeric>

#include "fnlab/csv.hpp"

namespace fnlab {

std::vector<int> InfluenceReport::ranking(int label) const {
  std::vector<int> idx;
  for (std::size_t e = 0; e < entries.size(); ++e)
    if (entries[e].label == label) idx.push_back(static_cast<int>(e));
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return entries[static_cast<std::size_t>(a)].score > entries[static_cast<std::size_t>(b)].score;
  });
  for (auto& i : idx) i = entries[static_cast<std::size_t>(i)].index;
  return idx;
}

InfluenceReport influence_report(const std::map<int, LabeledGroup>& groups, bool standardized) {
  InfluenceReport rep;
  rep.standardized = standardized;
  for (const auto& [label, group] : groups) {
    const VectorXd scores = influence_scores<double>(group.samples);
    std::vector<int> order(static_cast<std::size_t>(scores.size()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return scores(a) > scores(b); });
    std::vector<int> rank(order.size());
    for (std::size_t r = 0; r < order.size(); ++r) rank[static_cast<std::size_t>(order[r])] = static_cast<int>(r) + 1;
    for (Eigen::Index i = 0; i < scores.size(); ++i)
      rep.entries.push_back({group.indices[static_cast<std::size_t>(i)], label, scores(i), rank[static_cast<std::size_t>(i)]});
  }
  std::sort(rep.entries.begin(), rep.entries.end(),
            [](const InfluenceEntry& a, const InfluenceEntry& b) { return a.index < b.index; });
  return rep;
}

void write_influence_report(const InfluenceReport& rep, const std::string& path,
                            const std::vector<std::string>& header_comments) {
  auto comments = header_comments;
  comments.push_back(std::string("standardized=") + (rep.standardized ? "1" : "0"));
  csv::Writer out(path, comments);
  out.row({"index", "label", "score", "rank_within_class"});
  for (const auto& e : rep.entries)
    out.row({std::to_string(e.index), std::to_string(e.label), csv::format(e.score), std::to_string(e.rank)});
  out.close();
}

void write_cross_frobenius(const std::map<int, LabeledGroup>& groups, const std::string& path,
                           const std::vector<std::string>& header_comments) {
  std::vector<int> labels;
  std::vector<ClassStats<double>> stats;
  for (const auto& [label, group] : groups) {
    labels.push_back(label);
    stats.push_back(class_stats<double>(group.samples));
  }
  csv::Writer out(path, header_comments);
  std::vector<std::string> head{"label"};
  for (int l : labels) head.push_back(std::to_string(l));
  out.row(head);
  for (std::size_t i = 0; i < stats.size(); ++i) {
    std::vector<std::string> row{std::to_string(labels[i])};
    for (std::size_t j = 0; j < stats.size(); ++j) {
      const double f = cross_frobenius(stats[i], stats[j]);
      row.push_back(csv::format(f * f));
    }
    out.row(row);
  }
  out.close();
}

ExternalData ingest_external(const std::string& path, int label_column, bool has_header) {
  csv::LineReader in(path);
  std::string line;
  if (has_header && !in.next(line)) throw ParseError("missing header row", in.line_number());

  std::map<int, std::vector<std::vector<double>>> rows;
  std::map<int, std::vector<int>> indices;
  std::size_t width = 0;
  int count = 0;
  while (in.next(line)) {
    const long ln = in.line_number();
    const auto cells = csv::split(line);
    if (width == 0) {
      width = cells.size();
      if (label_column < 0 || static_cast<std::size_t>(label_column) >= width)
        throw SchemaError("label column " + std::to_string(label_column) + " out of range for " +
                          std::to_string(width) + " columns");
      if (width < 2) throw SchemaError("need a label column and at least one feature column");
    } else if (cells.size() != width) {
      throw SchemaError("line " + std::to_string(ln) + ": ragged row with " + std::to_string(cells.size()) +
                        " columns, expected " + std::to_string(width));
    }
    const long label = csv::parse_long(cells[static_cast<std::size_t>(label_column)], ln,
                                       static_cast<std::size_t>(label_column));
    std::vector<double> values;
    values.reserve(width - 1);
    for (std::size_t c = 0; c < width; ++c)
      if (c != static_cast<std::size_t>(label_column)) values.push_back(csv::parse_double(cells[c], ln, c));
    rows[static_cast<int>(label)].push_back(std::move(values));
    indices[static_cast<int>(label)].push_back(count++);
  }
  if (count == 0) throw SchemaError("no data rows in '" + path + "'");

  ExternalData out;
  out.dim = static_cast<int>(width - 1);
  out.rows = count;
  for (auto& [label, list] : rows) {
    LabeledGroup g;
    g.samples.resize(out.dim, static_cast<Eigen::Index>(list.size()));
    for (std::size_t i = 0; i < list.size(); ++i)
      for (int r = 0; r < out.dim; ++r) g.samples(r, static_cast<Eigen::Index>(i)) = list[i][static_cast<std::size_t>(r)];
    g.indices = std::move(indices[label]);
    out.groups.emplace(label, std::move(g));
  }
  return out;
}

void write_external(const std::string& path, const std::vector<int>& labels, const MatrixXd& rows_by_column,
                    int label_column) {
  if (static_cast<std::size_t>(rows_by_column.cols()) != labels.size())
    throw ShapeError("one label per sample column required");
  csv::Writer out(path, {});
  const auto d = rows_by_column.rows();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::vector<std::string> cells;
    Eigen::Index r = 0;
    for (Eigen::Index c = 0; c <= d; ++c) {
      if (c == label_column)
        cells.push_back(std::to_string(labels[i]));
      else
        cells.push_back(csv::format(rows_by_column(r++, static_cast<Eigen::Index>(i))));
    }
    out.row(cells);
  }
  out.close();
}

void standardize(std::map<int, LabeledGroup>& groups) {
  if (groups.empty()) return;
  const auto d = groups.begin()->second.samples.rows();
  VectorXd sum = VectorXd::Zero(d), sq = VectorXd::Zero(d);
  double n = 0;
  for (const auto& [label, g] : groups) {
    sum += g.samples.rowwise().sum();
    n += static_cast<double>(g.samples.cols());
  }
  const VectorXd mean = sum / n;
  for (const auto& [label, g] : groups) sq += (g.samples.colwise() - mean).rowwise().squaredNorm();
  VectorXd sd = (sq / std::max(n - 1.0, 1.0)).cwiseSqrt();
  for (Eigen::Index r = 0; r < d; ++r)
    if (sd(r) == 0.0) sd(r) = 1.0;
  for (auto& [label, g] : groups)
    g.samples = (g.samples.colwise() - mean).array().colwise() / sd.array();
}

}  // namespace fnlab
