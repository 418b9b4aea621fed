#ifndef FNLAB_EXPERIMENT_HPP
#define FNLAB_EXPERIMENT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fnlab/datagen.hpp"
#include "fnlab/metrics.hpp"
#include "fnlab/train.hpp"

namespace fnlab {

/// Everything one train-and-evaluate run needs. All randomness flows from
/// `seed` through derive_seed: frame, training data, initialization, and
/// evaluation draws use separate streams.
struct RunSettings {
  DistributionSpec spec;
  std::vector<int> class_counts;  // training samples per class
  int width = 100;
  double init_sigma = 0.01;
  TrainConfig train;
  LongTailConfig longtail;
  int n_test = 1000;  // per class
  long draw_cap = 1000000;
  bool eval_longtail = true;
  std::uint64_t seed = 0;
  std::string noise_matrices;  // optional explicit transforms file
};

enum class Stream : std::uint64_t { Frame = 1, Data = 2, Init = 3, Eval = 4 };

inline std::uint64_t stream_seed(std::uint64_t seed, Stream s) {
  return derive_seed(seed, static_cast<std::uint64_t>(s));
}

// Frame built from the Frame stream of `seed`. A non-empty `noise_path`
// replaces the factored transforms with explicit ones, which must be
// orthogonal to the features.
SyntheticDistribution run_distribution(const DistributionSpec& spec, std::uint64_t seed,
                                       const std::string& noise_path = "");

struct Evaluation {
  double accuracy = 0.0;           // mean over classes of 1 - zero-one loss
  double longtail_accuracy = 0.0;  // pooled over the accepted long-tailed draws
  int longtail_accepted = 0;
  bool longtail_exhausted = false;
};

Evaluation evaluate(const ModelParams<double>& w, const SyntheticDistribution& dist, int n_test,
                    const LongTailConfig& lt, bool with_longtail, long draw_cap, std::uint64_t eval_seed);

struct RunOutcome {
  std::string status = "ok";  // "ok" or "diverged: ..."
  SyntheticDistribution dist;
  Dataset<double> data;
  std::optional<TrainResult> trained;
  RatioReport ratios;
  Evaluation eval;
};

// Builds the distribution, samples training data, trains, evaluates.
// Divergence is reported in `status` rather than thrown.
RunOutcome run_experiment(const RunSettings& settings);

enum class RemovalSide { High, Low };

std::string to_string(RemovalSide side);

struct RemovalOutcome {
  double fraction = 0.0;
  RemovalSide side = RemovalSide::High;
  int removed = 0;
  Evaluation eval;
  double delta_accuracy = 0.0;           // removed - baseline
  double delta_longtail_accuracy = 0.0;  // removed - baseline
  std::vector<double> frob_sq_after;     // ||cov||_F^2 of each class's noise patches after removal
};

struct RemovalStudy {
  Evaluation baseline;
  std::vector<double> frob_sq_before;
  std::vector<RemovalOutcome> outcomes;
};

/// Influence-ranked removal: within each class the noise patches are scored,
/// the top (High) or bottom (Low) floor(q * n_k) samples are dropped using one
/// fixed ranking, and a fresh network is retrained from the same
/// initialization seed as the no-removal baseline. Evaluation draws share one
/// seed across all models.
RemovalStudy removal_experiment(const SyntheticDistribution& dist, const Dataset<double>& ds,
                                const std::vector<double>& fractions, const std::vector<RemovalSide>& sides,
                                const RunSettings& settings);

// Indices kept after removing a fraction of one side of each class ranking.
std::vector<int> removal_keep_set(const Dataset<double>& ds, double fraction, RemovalSide side);

}  // namespace fnlab

#endif  // FNLAB_EXPERIMENT_HPP
