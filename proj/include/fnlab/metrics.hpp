#ifndef FNLAB_METRICS_HPP
#define FNLAB_METRICS_HPP

#include <string>
#include <vector>

#include "fnlab/datagen.hpp"
#include "fnlab/net.hpp"

namespace fnlab {

/// Signal-to-noise and noise-correlation ratios of a training set.
///
///   snr(k, j)   = |S_k|^2 ||u_k||^4 / (|S_j| ||A_k^T A_j||_F^2)
///   gamma(k, j) = |S_k| ||A_k^T A_k||_F^2 / (|S_j| ||A_k^T A_j||_F^2)
///   snr_k       = min_{j != k} snr(k, j)
///
/// Zero denominators give +infinity; `snr_infinite[k]` flags a class whose
/// cross terms all vanish. Diagonal entries of the pairwise matrices are 0.
struct RatioReport {
  int num_classes = 0;
  std::vector<int> class_counts;
  std::vector<double> feature_norms;
  MatrixXd cross_frob_sq;  // ||A_k^T A_j||_F^2
  MatrixXd snr_pair;
  MatrixXd gamma;
  std::vector<double> snr;
  std::vector<bool> snr_infinite;

  double min_offdiag_gamma() const;
  double max_offdiag_gamma() const;
};

RatioReport ratio_report(const std::vector<int>& class_counts, const FeatureBank& bank,
                         const NoiseModel& noise);
RatioReport ratio_report(const Dataset<double>& ds, const FeatureBank& bank, const NoiseModel& noise);

struct BoundConstants {
  double c1 = 1.0;
  double c2 = 1.0;
};

/// Per-class sums sum_{j != k} exp(-c1 snr(k,j)) and sum_{j != k} exp(-c2 L^2 gamma(k,j)).
/// Only the trend is meaningful; the constants are not the theory's.
struct BenignBounds {
  std::vector<double> feature_bound;  // sum_{j != k} exp(-c1 SNR_kj)
  std::vector<double> noise_bound;    // sum_{j != k} exp(-c2 L^2 Gamma_kj)
};

BenignBounds bound_eval(const RatioReport& report, double L, const BoundConstants& constants = {});

void write_ratio_report(const RatioReport& report, const BenignBounds& bounds, const std::string& path,
                        const std::vector<std::string>& header_comments = {});

// Number of samples whose own-class score is not the unique maximum.
int count_errors(const ModelParams<double>& w, const Dataset<double>& ds);

/// Monte-Carlo zero-one loss on fresh draws from class k. Ties count as errors.
double zero_one_loss(const ModelParams<double>& w, const SyntheticDistribution& dist, int k, int n_test,
                     Rng& rng);

struct LongTailConfig {
  double L = 1.0;

  void validate() const;
};

struct LongTailFlag {
  bool member = false;
  bool empty_active = false;  // R(xi) was empty
  double lhs = 0.0;           // <sum_{r in R} w_{y,r}, xi>
  double rhs = 0.0;           // L * ||A_y^T sum_{r in R} w_{y,r}||
};

/// Membership of each sample in the L-long-tailed set of its class.
std::vector<LongTailFlag> longtail_filter(const ModelParams<double>& w, const Dataset<double>& ds,
                                          const NoiseModel& noise, const LongTailConfig& cfg);

struct LongTailEstimate {
  double loss = 0.0;
  int accepted = 0;
  long draws = 0;
  bool exhausted = false;  // hit the draw cap before n_test acceptances
};

/// Zero-one loss on the long-tailed slice of class k by rejection sampling.
LongTailEstimate longtail_zero_one(const ModelParams<double>& w, const SyntheticDistribution& dist, int k,
                                   int n_test, const LongTailConfig& cfg, Rng& rng,
                                   long draw_cap = 1000000);

struct ConditionItem {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

struct ConditionInputs {
  std::vector<int> class_counts;  // |S_k|; n is their sum
  int width = 100;                // m
  double eta = 0.05;
  double init_sigma = 0.01;
  int max_iters = 500;            // T
  double C = 1.0;
  double delta = 0.1;
};

/// Evaluates each inequality of the over-parameterization / step-size
/// conditions. Informational only.
std::vector<ConditionItem> condition_check(const SyntheticDistribution& dist, const ConditionInputs& in);

void write_conditions(const std::vector<ConditionItem>& items, const std::string& path,
                      const std::vector<std::string>& header_comments = {});

/// Comparator with every neuron of class j set to
/// 2.5 log(4(K-1)/eps) u_j / ||u_j||^2.
ModelParams<double> reference_params(int width, double eps, const FeatureBank& bank);

/// Number of own-class neurons active on the sample's noise patch.
int activation_count(const ModelParams<double>& w, const Sample<double>& x);

}  // namespace fnlab

#endif  // FNLAB_METRICS_HPP
