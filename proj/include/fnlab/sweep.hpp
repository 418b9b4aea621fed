#ifndef FNLAB_SWEEP_HPP
#define FNLAB_SWEEP_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "fnlab/config.hpp"

namespace fnlab {

enum class SweepAxis { FeatureNorm, PerClass, GammaRatio };

SweepAxis parse_sweep_axis(const std::string& name);
std::string to_string(SweepAxis axis);

struct SweepGrid {
  SweepAxis axis1 = SweepAxis::FeatureNorm;
  std::vector<double> values1;
  SweepAxis axis2 = SweepAxis::GammaRatio;
  std::vector<double> values2;
  int replicates = 1;
  Config base;  // fixed parameters

  static SweepGrid from_config(const Config& cfg);
};

struct SweepRow {
  double axis1 = 0.0;
  double axis2 = 0.0;
  int i1 = 0;
  int i2 = 0;
  int replicate = 0;
  std::uint64_t cell_seed = 0;
  std::string status = "ok";
  double realized_gamma = 0.0;
  double snr_min = 0.0, snr_max = 0.0;
  double gamma_min = 0.0, gamma_max = 0.0;
  double final_train_loss = 0.0;
  int iterations = 0;
  double test_accuracy = 0.0;
  double longtail_accuracy = 0.0;
  int longtail_accepted = 0;
  double wall_seconds = 0.0;
};

// Seed of one cell: depends only on the master seed and the cell's grid
// coordinates, so extending the grid leaves existing cells unchanged.
std::uint64_t cell_seed(std::uint64_t master, int i1, int i2, int replicate);

// Settings of one cell derived from the grid's base configuration.
RunSettings cell_settings(const SweepGrid& grid, int i1, int i2, int replicate);

SweepRow run_cell(const SweepGrid& grid, int i1, int i2, int replicate);

/// Runs every (cell, replicate) on a bounded worker pool. Rows come back
/// sorted by (axis1, axis2, replicate) whatever the execution order.
std::vector<SweepRow> run_sweep(const SweepGrid& grid, int workers);

void write_sweep(const std::vector<SweepRow>& rows, const SweepGrid& grid, const std::string& path,
                 const std::vector<std::string>& header_comments);
// Wall times live in a sidecar so the main CSV stays reproducible.
void write_sweep_timing(const std::vector<SweepRow>& rows, const std::string& path,
                        const std::vector<std::string>& header_comments = {});

}  // namespace fnlab

#endif  // FNLAB_SWEEP_HPP
