#ifndef FNLAB_DATAGEN_HPP
#define FNLAB_DATAGEN_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fnlab/types.hpp"

namespace fnlab {

using Rng = std::mt19937_64;

enum class NoiseFamily { Gaussian, Uniform };

std::string to_string(NoiseFamily family);
NoiseFamily parse_noise_family(const std::string& name);

/// Parameterization of the class-dependent feature/noise distribution.
///
/// Noise for class k is A_k * zeta with
///   A_k = shared_eig * V V^T + private_eigs[k] * e_k e_k^T,
/// where V spans `shared_dim` directions common to every class and e_k is a
/// direction private to class k. All directions are orthogonal to every
/// feature u_k.
struct DistributionSpec {
  int num_classes = 5;
  int dim = 1000;
  std::vector<double> feature_norms;  // one per class
  int shared_dim = -1;                // < 0 resolves to dim - 2 * num_classes
  double shared_eig = 0.5;
  std::vector<double> private_eigs;   // one per class
  std::vector<double> class_probs;    // one per class
  NoiseFamily noise_family = NoiseFamily::Gaussian;
  std::uint64_t seed = 0;

  int resolved_shared_dim() const;
  int frame_columns() const { return 2 * num_classes + resolved_shared_dim(); }

  // Throws ConfigError on any violated invariant.
  void validate() const;

  // Equal class probabilities, a common feature norm, and the private
  // eigenvalue tuned so every off-diagonal noise correlation ratio equals
  // `gamma_ratio` under equal class sizes.
  static DistributionSpec balanced(int num_classes, int dim, double feature_norm,
                                   double gamma_ratio, int shared_dim = -1,
                                   double shared_eig = 0.5);
};

/// Private eigenvalue giving noise-correlation ratio `target_ratio` in the
/// shared/private construction with equal class sizes.
double gamma_for_target_ratio(double target_ratio, int shared_dim, double shared_eig);

struct FeatureBank {
  MatrixXd features;    // dim x K, column k is u_k
  MatrixXd complement;  // dim x (p + K): shared basis then private directions

  int num_classes() const { return static_cast<int>(features.cols()); }
  int dim() const { return static_cast<int>(features.rows()); }
  double norm(int k) const { return features.col(k).norm(); }
};

FeatureBank build_feature_bank(const DistributionSpec& spec, Rng& rng);

/// Per-class noise transforms, either in the factored shared/private form or
/// as explicit dense matrices.
class NoiseModel {
 public:
  NoiseModel() = default;

  static NoiseModel factored(MatrixXd shared_basis, MatrixXd private_dirs,
                             double shared_eig, std::vector<double> private_eigs);
  static NoiseModel from_matrices(std::vector<MatrixXd> maps);

  bool is_factored() const { return factored_; }
  int num_classes() const { return num_classes_; }
  int dim() const { return dim_; }

  const MatrixXd& shared_basis() const { return shared_basis_; }
  const MatrixXd& private_dirs() const { return private_dirs_; }
  double shared_eig() const { return shared_eig_; }
  const std::vector<double>& private_eigs() const { return private_eigs_; }

  // A_k * Z for a dim x cols block.
  MatrixXd apply(int k, const MatrixXd& zeta) const;
  // A_k^T * G for a dim x cols block.
  MatrixXd apply_transpose(int k, const MatrixXd& g) const;

  MatrixXd dense(int k) const;

  double cross_frob_sq(int k, int j) const;  // ||A_k^T A_j||_F^2
  double cross_op_norm(int k, int j) const;  // ||A_k^T A_j||_op
  double trace_gram(int k) const;            // Tr(A_k^T A_k) = ||A_k||_F^2
  int rank(int k) const;
  // Largest and smallest non-zero singular values of A_k.
  std::pair<double, double> positive_singular_range(int k) const;

 private:
  bool factored_ = true;
  int num_classes_ = 0;
  int dim_ = 0;
  MatrixXd shared_basis_;
  MatrixXd private_dirs_;
  double shared_eig_ = 0.0;
  std::vector<double> private_eigs_;
  std::vector<MatrixXd> maps_;
};

NoiseModel build_noise_model(const DistributionSpec& spec, const FeatureBank& bank);

template <typename Scalar>
struct Sample {
  int label = 0;
  int feature_slot = 1;  // 1 or 2
  Vector<Scalar> patch1;
  Vector<Scalar> patch2;

  const Vector<Scalar>& noise_patch() const { return feature_slot == 1 ? patch2 : patch1; }
  const Vector<Scalar>& feature_patch() const { return feature_slot == 1 ? patch1 : patch2; }
};

/// Column-major sample storage: column i of patch1/patch2 belongs to sample i.
template <typename Scalar>
struct Dataset {
  int num_classes = 0;
  std::vector<int> labels;
  std::vector<int> feature_slots;
  Matrix<Scalar> patch1;
  Matrix<Scalar> patch2;

  int size() const { return static_cast<int>(labels.size()); }
  int dim() const { return static_cast<int>(patch1.rows()); }

  std::vector<int> class_counts() const {
    std::vector<int> counts(static_cast<std::size_t>(num_classes), 0);
    for (int y : labels) ++counts[static_cast<std::size_t>(y)];
    return counts;
  }

  Sample<Scalar> sample(int i) const {
    return {labels[i], feature_slots[i], patch1.col(i), patch2.col(i)};
  }

  // dim x n matrix of the non-feature patch of every sample.
  Matrix<Scalar> noise_patches() const {
    Matrix<Scalar> out(dim(), size());
    for (int i = 0; i < size(); ++i)
      out.col(i) = feature_slots[i] == 1 ? patch2.col(i) : patch1.col(i);
    return out;
  }

  std::vector<int> indices_of_class(int k) const {
    std::vector<int> idx;
    for (int i = 0; i < size(); ++i)
      if (labels[i] == k) idx.push_back(i);
    return idx;
  }

  Dataset subset(const std::vector<int>& indices) const {
    Dataset out;
    out.num_classes = num_classes;
    out.patch1.resize(dim(), static_cast<Eigen::Index>(indices.size()));
    out.patch2.resize(dim(), static_cast<Eigen::Index>(indices.size()));
    for (std::size_t c = 0; c < indices.size(); ++c) {
      const int i = indices[c];
      out.labels.push_back(labels[i]);
      out.feature_slots.push_back(feature_slots[i]);
      out.patch1.col(static_cast<Eigen::Index>(c)) = patch1.col(i);
      out.patch2.col(static_cast<Eigen::Index>(c)) = patch2.col(i);
    }
    return out;
  }

  // Throws SchemaError if labels, slots, and patch shapes disagree.
  void check() const;
};

/// Bundle of everything needed to draw from the distribution.
struct SyntheticDistribution {
  DistributionSpec spec;
  FeatureBank bank;
  NoiseModel noise;
};

// Builds the frame from spec.seed.
SyntheticDistribution build_distribution(const DistributionSpec& spec);

// Labels from spec.class_probs.
Dataset<double> sample_dataset(const DistributionSpec& spec, const FeatureBank& bank,
                               const NoiseModel& noise, int n, Rng& rng);

// Exactly counts[k] samples of class k, grouped by class in label order.
Dataset<double> sample_stratified(const DistributionSpec& spec, const FeatureBank& bank,
                                  const NoiseModel& noise, const std::vector<int>& counts,
                                  Rng& rng);

// Draws from the conditional distribution of class k.
Dataset<double> sample_class(const DistributionSpec& spec, const FeatureBank& bank,
                             const NoiseModel& noise, int k, int count, Rng& rng);

void write_dataset(const Dataset<double>& ds, const std::string& path,
                   const std::vector<std::string>& header_comments = {});
Dataset<double> read_dataset(const std::string& path);

// Explicit noise transforms: header `NOISE1,K,d`, then K*d rows of d values
// (row r of A_0, ..., row r of A_{K-1}).
void write_noise_matrices(const NoiseModel& noise, const std::string& path);
NoiseModel read_noise_matrices(const std::string& path);

// Throws SchemaError unless u_k^T A_y = 0 (relative 1e-8) for every k, y.
void check_noise_orthogonality(const FeatureBank& bank, const NoiseModel& noise);

template <typename Scalar>
void Dataset<Scalar>::check() const {
  const auto n = labels.size();
  if (n == 0) throw SchemaError("dataset is empty");
  if (feature_slots.size() != n || static_cast<std::size_t>(patch1.cols()) != n ||
      static_cast<std::size_t>(patch2.cols()) != n || patch1.rows() != patch2.rows())
    throw SchemaError("dataset arrays have inconsistent sizes");
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes)
      throw SchemaError("label " + std::to_string(labels[i]) + " outside [0, " +
                        std::to_string(num_classes) + ")");
    if (feature_slots[i] != 1 && feature_slots[i] != 2)
      throw SchemaError("feature slot must be 1 or 2");
  }
}

}  // namespace fnlab

#endif  // FNLAB_DATAGEN_HPP
