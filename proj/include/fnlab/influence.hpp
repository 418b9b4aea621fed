#ifndef FNLAB_INFLUENCE_HPP
#define FNLAB_INFLUENCE_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "fnlab/types.hpp"

namespace fnlab {

/// Mean, scatter C = sum (x - mu)(x - mu)^T and unbiased covariance C/(n-1)
/// of one class. Samples are the columns of the input matrix.
template <typename Scalar>
struct ClassStats {
  int count = 0;
  Vector<Scalar> mean;
  Matrix<Scalar> scatter;
  Matrix<Scalar> cov;
  Scalar frob_sq = 0;     // ||cov||_F^2
  Scalar scatter_sq = 0;  // ||scatter||_F^2

  int dim() const { return static_cast<int>(mean.size()); }
};

template <typename Scalar>
ClassStats<Scalar> class_stats(const Eigen::Ref<const Matrix<Scalar>>& samples) {
  const auto n = samples.cols();
  if (n < 2) throw InsufficientDataError("class statistics need at least 2 samples, got " + std::to_string(n));
  ClassStats<Scalar> st;
  st.count = static_cast<int>(n);
  st.mean = samples.rowwise().mean();
  const Matrix<Scalar> centered = samples.colwise() - st.mean;
  st.scatter = Matrix<Scalar>::Zero(samples.rows(), samples.rows());
  st.scatter.template selfadjointView<Eigen::Lower>().rankUpdate(centered);
  st.scatter = st.scatter.template selfadjointView<Eigen::Lower>();
  st.cov = st.scatter / static_cast<Scalar>(n - 1);
  st.scatter_sq = st.scatter.squaredNorm();
  st.frob_sq = st.cov.squaredNorm();
  return st;
}

/// A~ = Q Lambda^{1/2} from the eigendecomposition of the sample covariance,
/// with negative eigenvalues clipped to zero.
template <typename Scalar>
struct NoiseEstimate {
  Matrix<Scalar> transform;
  Vector<Scalar> eigenvalues;  // ascending, after clipping
  int clipped = 0;
};

template <typename Scalar>
NoiseEstimate<Scalar> estimate_noise_transform(const ClassStats<Scalar>& stats) {
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(stats.cov);
  if (eig.info() != Eigen::Success)
    throw NumericError("eigendecomposition failed (d=" + std::to_string(stats.dim()) +
                       ", ||cov||_F^2=" + std::to_string(static_cast<double>(stats.frob_sq)) + ")");
  NoiseEstimate<Scalar> est;
  est.eigenvalues = eig.eigenvalues();
  for (Eigen::Index i = 0; i < est.eigenvalues.size(); ++i)
    if (est.eigenvalues(i) < Scalar(0)) {
      est.eigenvalues(i) = Scalar(0);
      ++est.clipped;
    }
  est.transform = eig.eigenvectors() * est.eigenvalues.cwiseSqrt().asDiagonal();
  return est;
}

/// ||A~_i^T A~_j||_F through the identity ||A~_i^T A~_j||_F^2 = tr(cov_i cov_j).
template <typename Scalar>
Scalar cross_frobenius(const ClassStats<Scalar>& a, const ClassStats<Scalar>& b) {
  if (a.dim() != b.dim()) throw ShapeError("class statistics differ in dimension");
  const Scalar tr = a.cov.cwiseProduct(b.cov).sum();  // both symmetric
  return std::sqrt(std::max(tr, Scalar(0)));
}

/// ||cov(S)||_F^2 - ||cov(S \ {x})||_F^2 via a rank-one downdate of the scatter:
/// with delta = x - mu and a = n/(n-1), C' = C - a delta delta^T, so
/// ||C'||_F^2 = ||C||_F^2 - 2a delta^T C delta + a^2 ||delta||^4.
template <typename Scalar, typename Derived>
Scalar influence_score(const ClassStats<Scalar>& st, const Eigen::MatrixBase<Derived>& x) {
  const int n = st.count;
  if (n < 3) throw InsufficientDataError("influence needs at least 3 samples in the class, got " + std::to_string(n));
  if (x.size() != st.dim()) throw ShapeError("sample dimension does not match class statistics");
  const Vector<Scalar> delta = x - st.mean;
  const Scalar a = static_cast<Scalar>(n) / static_cast<Scalar>(n - 1);
  const Scalar quad = delta.dot(st.scatter * delta);
  const Scalar dd = delta.squaredNorm();
  const Scalar loo_sq = st.scatter_sq - Scalar(2) * a * quad + a * a * dd * dd;
  const Scalar n2 = static_cast<Scalar>(n - 2);
  return st.frob_sq - std::max(loo_sq, Scalar(0)) / (n2 * n2);
}

/// Scores for every column of a class block, O(n d^2) in total.
template <typename Scalar>
Vector<Scalar> influence_scores(const Eigen::Ref<const Matrix<Scalar>>& samples) {
  const ClassStats<Scalar> st = class_stats<Scalar>(samples);
  if (st.count < 3) throw InsufficientDataError("influence needs at least 3 samples in the class");
  Vector<Scalar> out(samples.cols());
  const Matrix<Scalar> centered = samples.colwise() - st.mean;
  const Matrix<Scalar> sc = st.scatter * centered;
  const Scalar a = static_cast<Scalar>(st.count) / static_cast<Scalar>(st.count - 1);
  const Scalar n2 = static_cast<Scalar>(st.count - 2);
  for (Eigen::Index i = 0; i < samples.cols(); ++i) {
    const Scalar dd = centered.col(i).squaredNorm();
    const Scalar quad = centered.col(i).dot(sc.col(i));
    const Scalar loo_sq = st.scatter_sq - Scalar(2) * a * quad + a * a * dd * dd;
    out(i) = st.frob_sq - std::max(loo_sq, Scalar(0)) / (n2 * n2);
  }
  return out;
}

struct InfluenceEntry {
  int index = 0;  // position in the input
  int label = 0;
  double score = 0.0;
  int rank = 0;   // 1 = highest score within the class
};

struct InfluenceReport {
  std::vector<InfluenceEntry> entries;  // input order
  bool standardized = false;

  // Indices of class `label` ordered by descending score (ties by index).
  std::vector<int> ranking(int label) const;
};

/// Per-class influence scores. `groups` maps label -> (d x n_label samples,
/// original indices).
struct LabeledGroup {
  MatrixXd samples;
  std::vector<int> indices;
};

InfluenceReport influence_report(const std::map<int, LabeledGroup>& groups, bool standardized = false);

void write_influence_report(const InfluenceReport& rep, const std::string& path,
                            const std::vector<std::string>& header_comments = {});

/// K x K matrix of ||A~_i^T A~_j||_F^2 with class labels as header row/column.
void write_cross_frobenius(const std::map<int, LabeledGroup>& groups, const std::string& path,
                           const std::vector<std::string>& header_comments = {});

/// Reads a CSV with one integer label column and numeric feature columns,
/// grouping rows by label in file order.
struct ExternalData {
  std::map<int, LabeledGroup> groups;
  int dim = 0;
  int rows = 0;
};

ExternalData ingest_external(const std::string& path, int label_column, bool has_header = false);

void write_external(const std::string& path, const std::vector<int>& labels, const MatrixXd& rows_by_column,
                    int label_column = 0);

// Per-feature standardization over all rows (zero mean, unit variance;
// constant features are only centered).
void standardize(std::map<int, LabeledGroup>& groups);

}  // namespace fnlab

#endif  // FNLAB_INFLUENCE_HPP
