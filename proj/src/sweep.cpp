#include "fnlab/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <thread>

#include "fnlab/csv.hpp"

namespace fnlab {

SweepAxis parse_sweep_axis(const std::string& name) {
  if (name == "feature_norm") return SweepAxis::FeatureNorm;
  if (name == "per_class") return SweepAxis::PerClass;
  if (name == "gamma_ratio") return SweepAxis::GammaRatio;
  throw ConfigError("sweep axis must be feature_norm, per_class or gamma_ratio, got '" + name + "'");
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::FeatureNorm:
      return "feature_norm";
    case SweepAxis::PerClass:
      return "per_class";
    case SweepAxis::GammaRatio:
      return "gamma_ratio";
  }
  return "?";
}

SweepGrid SweepGrid::from_config(const Config& cfg) {
  SweepGrid g;
  g.axis1 = parse_sweep_axis(cfg.get("axis1"));
  g.axis2 = parse_sweep_axis(cfg.get("axis2"));
  if (g.axis1 == g.axis2) throw ConfigError("sweep axes must differ");
  g.values1 = cfg.get_doubles("axis1_values");
  g.values2 = cfg.get_doubles("axis2_values");
  g.replicates = cfg.get_int("replicates");
  if (g.values1.empty() || g.values2.empty()) throw ConfigError("sweep axes must be non-empty");
  if (g.replicates < 1) throw ConfigError("replicates must be >= 1");
  g.base = cfg;
  // Validate every cell's settings before any work starts.
  for (std::size_t a = 0; a < g.values1.size(); ++a)
    for (std::size_t b = 0; b < g.values2.size(); ++b) cell_settings(g, static_cast<int>(a), static_cast<int>(b), 0);
  return g;
}

std::uint64_t cell_seed(std::uint64_t master, int i1, int i2, int replicate) {
  return derive_seed(master, static_cast<std::uint64_t>(i1) + 1, static_cast<std::uint64_t>(i2) + 1,
                     static_cast<std::uint64_t>(replicate) + 1);
}

RunSettings cell_settings(const SweepGrid& grid, int i1, int i2, int replicate) {
  Config cfg = grid.base;
  auto apply = [&](SweepAxis axis, double v) {
    switch (axis) {
      case SweepAxis::FeatureNorm:
        cfg.set("feature_norm", csv::format(v));
        break;
      case SweepAxis::PerClass:
        if (v < 1.0 || v != static_cast<double>(static_cast<long>(v)))
          throw ConfigError("per_class sweep values must be positive integers");
        cfg.set("per_class", std::to_string(static_cast<long>(v)));
        break;
      case SweepAxis::GammaRatio:
        cfg.set("gamma_ratio", csv::format(v));
        cfg.set("private_eig", "");
        break;
    }
  };
  apply(grid.axis1, grid.values1[static_cast<std::size_t>(i1)]);
  apply(grid.axis2, grid.values2[static_cast<std::size_t>(i2)]);
  RunSettings s = run_settings(cfg);
  s.seed = cell_seed(grid.base.get_u64("seed"), i1, i2, replicate);
  return s;
}

SweepRow run_cell(const SweepGrid& grid, int i1, int i2, int replicate) {
  const auto start = std::chrono::steady_clock::now();
  SweepRow row;
  row.i1 = i1;
  row.i2 = i2;
  row.axis1 = grid.values1[static_cast<std::size_t>(i1)];
  row.axis2 = grid.values2[static_cast<std::size_t>(i2)];
  row.replicate = replicate;
  const RunSettings s = cell_settings(grid, i1, i2, replicate);
  row.cell_seed = s.seed;
  row.realized_gamma = s.spec.private_eigs.empty() ? 0.0 : s.spec.private_eigs.front();
  const RunOutcome out = run_experiment(s);
  row.status = out.status;
  const auto& snr = out.ratios.snr;
  row.snr_min = *std::min_element(snr.begin(), snr.end());
  row.snr_max = *std::max_element(snr.begin(), snr.end());
  row.gamma_min = out.ratios.num_classes > 1 ? out.ratios.min_offdiag_gamma() : 0.0;
  row.gamma_max = out.ratios.num_classes > 1 ? out.ratios.max_offdiag_gamma() : 0.0;
  if (out.trained) {
    row.final_train_loss = out.trained->trace.final_loss();
    row.iterations = out.trained->trace.iterations;
    row.test_accuracy = out.eval.accuracy;
    row.longtail_accuracy = out.eval.longtail_accuracy;
    row.longtail_accepted = out.eval.longtail_accepted;
  }
  row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

std::vector<SweepRow> run_sweep(const SweepGrid& grid, int workers) {
  struct Job {
    int i1, i2, rep;
  };
  std::vector<Job> jobs;
  for (int a = 0; a < static_cast<int>(grid.values1.size()); ++a)
    for (int b = 0; b < static_cast<int>(grid.values2.size()); ++b)
      for (int r = 0; r < grid.replicates; ++r) jobs.push_back({a, b, r});

  std::vector<SweepRow> rows(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j; (j = next.fetch_add(1)) < jobs.size();) {
      try {
        rows[j] = run_cell(grid, jobs[j].i1, jobs[j].i2, jobs[j].rep);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.axis1 != b.axis1) return a.axis1 < b.axis1;
    if (a.axis2 != b.axis2) return a.axis2 < b.axis2;
    if (a.i1 != b.i1) return a.i1 < b.i1;
    if (a.i2 != b.i2) return a.i2 < b.i2;
    return a.replicate < b.replicate;
  });
  return rows;
}

void write_sweep(const std::vector<SweepRow>& rows, const SweepGrid& grid, const std::string& path,
                 const std::vector<std::string>& header_comments) {
  auto comments = header_comments;
  comments.push_back("axis1=" + to_string(grid.axis1) + " axis2=" + to_string(grid.axis2));
  csv::Writer out(path, comments);
  out.row({"axis1", "axis2", "replicate", "cell_seed", "status", "realized_gamma", "snr_min", "snr_max",
           "gamma_min", "gamma_max", "final_train_loss", "iterations", "test_acc", "longtail_acc",
           "longtail_accepted"});
  for (const auto& r : rows)
    out.row({csv::format(r.axis1), csv::format(r.axis2), std::to_string(r.replicate), std::to_string(r.cell_seed),
             r.status, csv::format(r.realized_gamma), csv::format(r.snr_min), csv::format(r.snr_max),
             csv::format(r.gamma_min), csv::format(r.gamma_max), csv::format(r.final_train_loss),
             std::to_string(r.iterations), csv::format(r.test_accuracy), csv::format(r.longtail_accuracy),
             std::to_string(r.longtail_accepted)});
  out.close();
}

void write_sweep_timing(const std::vector<SweepRow>& rows, const std::string& path,
                        const std::vector<std::string>& header_comments) {
  csv::Writer out(path, header_comments);
  out.row({"axis1", "axis2", "replicate", "wall_seconds"});
  for (const auto& r : rows)
    out.row({csv::format(r.axis1), csv::format(r.axis2), std::to_string(r.replicate), csv::format(r.wall_seconds)});
  out.close();
}

}  // namespace fnlab
