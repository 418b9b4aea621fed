#ifndef FNLAB_TRAIN_HPP
#define FNLAB_TRAIN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "fnlab/net.hpp"

namespace fnlab {

struct TrainConfig {
  double eta = 0.05;
  int max_iters = 500;       // T
  double target_loss = 0.1;  // epsilon; stop once the mean loss reaches it
  int log_every = 1;         // activation-set cadence
  bool record_history = true;  // keep per-iteration 1 - logit_y for every sample

  void validate() const;
};

/// Activation set S_i^{(t)} = {r : <w_{y_i,r}, xi_i> > 0} of every sample at
/// one iteration, packed sample-major (bit i*m + r).
struct ActivationSnapshot {
  int iteration = 0;
  std::vector<bool> active;
};

struct TrainTrace {
  int num_samples = 0;
  int width = 0;
  std::vector<int> labels;

  // One entry per evaluated iterate W^(0), ..., W^(iterations).
  std::vector<double> mean_loss;
  std::vector<double> kappa_hat;
  std::vector<double> min_one_minus_logit;
  std::vector<double> max_one_minus_logit;

  // c_i = sum over t' < iterations of (1 - logit_{y_i}(W^(t'), x_i)).
  std::vector<double> cumulative;
  // history[t][i] = 1 - logit_{y_i}(W^(t), x_i) for t < iterations, if recorded.
  std::vector<std::vector<double>> history;

  std::vector<ActivationSnapshot> activations;

  int iterations = 0;  // GD steps taken
  bool reached_target = false;

  double final_loss() const { return mean_loss.empty() ? 0.0 : mean_loss.back(); }
};

struct TrainResult {
  ModelParams<double> model;
  TrainTrace trace;
};

/// Full-batch gradient descent from `init` for at most cfg.max_iters steps.
/// Throws DivergenceError on a non-finite loss or weight.
TrainResult train(const ModelParams<double>& init, const Dataset<double>& ds, const TrainConfig& cfg);

/// b(A) = sqrt(sum_{i in A} c_i^2); empty subsets give 0.
double b_of(const TrainTrace& trace, const std::vector<int>& subset);
double b_of_class(const TrainTrace& trace, int k);

struct MonotonicityReport {
  long violations = 0;
  long comparisons = 0;  // (i, t, r) with r in S_i^{(t)}
  double fraction() const { return comparisons ? static_cast<double>(violations) / comparisons : 0.0; }
};

MonotonicityReport activation_monotonicity_report(const TrainTrace& trace);

void write_trace(const TrainTrace& trace, const std::string& path,
                 const std::vector<std::string>& header_comments = {});
void write_cumulative(const TrainTrace& trace, const std::string& path,
                      const std::vector<std::string>& header_comments = {});

}  // namespace fnlab

#endif  // FNLAB_TRAIN_HPP
