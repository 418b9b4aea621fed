#include "fnlab/datagen.hpp"

#include <cmath>
#include <numeric>

namespace fnlab {

std::string to_string(NoiseFamily family) {
  return family == NoiseFamily::Gaussian ? "gaussian" : "uniform";
}

NoiseFamily parse_noise_family(const std::string& name) {
  if (name == "gaussian") return NoiseFamily::Gaussian;
  if (name == "uniform") return NoiseFamily::Uniform;
  throw ConfigError("noise_family must be 'gaussian' or 'uniform', got '" + name + "'");
}

int DistributionSpec::resolved_shared_dim() const {
  return shared_dim < 0 ? dim - 2 * num_classes : shared_dim;
}

void DistributionSpec::validate() const {
  if (num_classes < 1) throw ConfigError("K must be at least 1");
  const int p = resolved_shared_dim();
  if (p < 0) throw ConfigError("shared_dim must be non-negative");
  const int min_dim = 2 * num_classes + p;
  if (dim < min_dim)
    throw ConfigError("dimension d=" + std::to_string(dim) + " too small: need d >= 2K + p = " +
                      std::to_string(min_dim));
  const auto k = static_cast<std::size_t>(num_classes);
  if (feature_norms.size() != k) throw ConfigError("feature_norms must have K entries");
  if (private_eigs.size() != k) throw ConfigError("private_eigs must have K entries");
  if (class_probs.size() != k) throw ConfigError("class_probs must have K entries");
  for (double v : feature_norms)
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("feature norms must be finite and >= 0");
  for (double v : private_eigs)
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("eigenvalues must be finite and >= 0");
  if (!(shared_eig >= 0.0) || !std::isfinite(shared_eig))
    throw ConfigError("eigenvalues must be finite and >= 0");
  double total = 0.0;
  for (double v : class_probs) {
    if (!(v >= 0.0)) throw ConfigError("class_probs entries must be >= 0");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ConfigError("class_probs must sum to 1");
}

double gamma_for_target_ratio(double target_ratio, int shared_dim, double shared_eig) {
  if (!(target_ratio >= 1.0)) throw DomainError("target noise correlation ratio must be >= 1");
  if (shared_dim < 1) throw DomainError("shared_dim must be >= 1");
  if (!(shared_eig > 0.0)) throw DomainError("shared eigenvalue must be > 0");
  return shared_eig * std::pow(static_cast<double>(shared_dim) * (target_ratio - 1.0), 0.25);
}

DistributionSpec DistributionSpec::balanced(int num_classes, int dim, double feature_norm,
                                            double gamma_ratio, int shared_dim,
                                            double shared_eig) {
  DistributionSpec spec;
  spec.num_classes = num_classes;
  spec.dim = dim;
  spec.shared_dim = shared_dim;
  spec.shared_eig = shared_eig;
  const auto k = static_cast<std::size_t>(num_classes);
  spec.feature_norms.assign(k, feature_norm);
  spec.class_probs.assign(k, 1.0 / num_classes);
  const double gamma =
      gamma_for_target_ratio(gamma_ratio, spec.resolved_shared_dim(), shared_eig);
  spec.private_eigs.assign(k, gamma);
  return spec;
}

FeatureBank build_feature_bank(const DistributionSpec& spec, Rng& rng) {
  spec.validate();
  const int d = spec.dim;
  const int cols = spec.frame_columns();
  std::normal_distribution<double> normal;
  MatrixXd gauss(d, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < d; ++r) gauss(r, c) = normal(rng);

  Eigen::HouseholderQR<MatrixXd> qr(gauss);
  MatrixXd frame = qr.householderQ() * MatrixXd::Identity(d, cols);
  // Match the Gram-Schmidt sign convention (positive diagonal of R).
  const MatrixXd& packed = qr.matrixQR();
  for (int c = 0; c < cols; ++c)
    if (packed(c, c) < 0.0) frame.col(c) = -frame.col(c);

  FeatureBank bank;
  const int K = spec.num_classes;
  bank.features.resize(d, K);
  for (int k = 0; k < K; ++k) bank.features.col(k) = frame.col(k) * spec.feature_norms[k];
  bank.complement = frame.rightCols(cols - K);
  return bank;
}

NoiseModel NoiseModel::factored(MatrixXd shared_basis, MatrixXd private_dirs, double shared_eig,
                                std::vector<double> private_eigs) {
  if (shared_basis.rows() != private_dirs.rows())
    throw ShapeError("shared basis and private directions differ in dimension");
  if (static_cast<std::size_t>(private_dirs.cols()) != private_eigs.size())
    throw ShapeError("one private eigenvalue per private direction required");
  NoiseModel m;
  m.factored_ = true;
  m.num_classes_ = static_cast<int>(private_eigs.size());
  m.dim_ = static_cast<int>(shared_basis.rows());
  m.shared_basis_ = std::move(shared_basis);
  m.private_dirs_ = std::move(private_dirs);
  m.shared_eig_ = shared_eig;
  m.private_eigs_ = std::move(private_eigs);
  return m;
}

NoiseModel NoiseModel::from_matrices(std::vector<MatrixXd> maps) {
  if (maps.empty()) throw ShapeError("at least one noise transform required");
  const auto d = maps.front().rows();
  for (const auto& a : maps)
    if (a.rows() != d || a.cols() != d) throw ShapeError("noise transforms must be square d x d");
  NoiseModel m;
  m.factored_ = false;
  m.num_classes_ = static_cast<int>(maps.size());
  m.dim_ = static_cast<int>(d);
  m.maps_ = std::move(maps);
  return m;
}

MatrixXd NoiseModel::apply(int k, const MatrixXd& zeta) const {
  if (!factored_) return maps_[k] * zeta;
  MatrixXd out(dim_, zeta.cols());
  if (shared_basis_.cols() > 0)
    out.noalias() = shared_basis_ * (shared_eig_ * (shared_basis_.transpose() * zeta));
  else
    out.setZero();
  if (private_eigs_[k] != 0.0) {
    const auto e = private_dirs_.col(k);
    out.noalias() += e * (private_eigs_[k] * (e.transpose() * zeta));
  }
  return out;
}

MatrixXd NoiseModel::apply_transpose(int k, const MatrixXd& g) const {
  if (!factored_) return maps_[k].transpose() * g;
  return apply(k, g);  // symmetric
}

MatrixXd NoiseModel::dense(int k) const {
  if (!factored_) return maps_[k];
  return apply(k, MatrixXd::Identity(dim_, dim_));
}

double NoiseModel::cross_frob_sq(int k, int j) const {
  if (!factored_) return (maps_[k].transpose() * maps_[j]).squaredNorm();
  const double s2 = shared_eig_ * shared_eig_;
  double v = static_cast<double>(shared_basis_.cols()) * s2 * s2;
  if (k == j) v += std::pow(private_eigs_[k], 4);
  return v;
}

double NoiseModel::cross_op_norm(int k, int j) const {
  if (!factored_) {
    Eigen::JacobiSVD<MatrixXd> svd(maps_[k].transpose() * maps_[j]);
    return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  }
  double v = shared_basis_.cols() > 0 ? shared_eig_ * shared_eig_ : 0.0;
  if (k == j) v = std::max(v, private_eigs_[k] * private_eigs_[k]);
  return v;
}

double NoiseModel::trace_gram(int k) const {
  if (!factored_) return maps_[k].squaredNorm();
  return static_cast<double>(shared_basis_.cols()) * shared_eig_ * shared_eig_ +
         private_eigs_[k] * private_eigs_[k];
}

int NoiseModel::rank(int k) const {
  if (!factored_) {
    Eigen::ColPivHouseholderQR<MatrixXd> qr(maps_[k]);
    return static_cast<int>(qr.rank());
  }
  int r = shared_eig_ > 0.0 ? static_cast<int>(shared_basis_.cols()) : 0;
  if (private_eigs_[k] > 0.0) ++r;
  return r;
}

std::pair<double, double> NoiseModel::positive_singular_range(int k) const {
  if (!factored_) {
    Eigen::JacobiSVD<MatrixXd> svd(maps_[k]);
    const auto& sv = svd.singularValues();
    const double tol = sv.size() ? sv(0) * 1e-12 * dim_ : 0.0;
    double hi = 0.0, lo = 0.0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > tol) {
        hi = std::max(hi, sv(i));
        lo = lo == 0.0 ? sv(i) : std::min(lo, sv(i));
      }
    return {hi, lo};
  }
  double hi = 0.0, lo = 0.0;
  auto take = [&](double v) {
    if (v <= 0.0) return;
    hi = std::max(hi, v);
    lo = lo == 0.0 ? v : std::min(lo, v);
  };
  if (shared_basis_.cols() > 0) take(shared_eig_);
  take(private_eigs_[k]);
  return {hi, lo};
}

NoiseModel build_noise_model(const DistributionSpec& spec, const FeatureBank& bank) {
  const int p = spec.resolved_shared_dim();
  if (bank.complement.cols() != p + spec.num_classes || bank.dim() != spec.dim)
    throw ShapeError("feature bank frame does not match the distribution parameters");
  return NoiseModel::factored(bank.complement.leftCols(p), bank.complement.rightCols(spec.num_classes),
                              spec.shared_eig, spec.private_eigs);
}

SyntheticDistribution build_distribution(const DistributionSpec& spec) {
  Rng rng(derive_seed(spec.seed, 0xF2A3E));
  SyntheticDistribution dist{spec, build_feature_bank(spec, rng), {}};
  dist.noise = build_noise_model(spec, dist.bank);
  return dist;
}

namespace {

// Draws slots and zeta in sample order, then maps zeta through A_y per class.
Dataset<double> realize(const DistributionSpec& spec, const FeatureBank& bank,
                        const NoiseModel& noise, std::vector<int> labels, Rng& rng) {
  const int n = static_cast<int>(labels.size());
  const int d = spec.dim;
  if (noise.dim() != d || bank.dim() != d) throw ShapeError("dimension mismatch in sampler");
  Dataset<double> ds;
  ds.num_classes = spec.num_classes;
  ds.labels = std::move(labels);
  ds.feature_slots.resize(static_cast<std::size_t>(n));
  ds.patch1.resize(d, n);
  ds.patch2.resize(d, n);

  MatrixXd zeta(d, n);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform(-std::sqrt(3.0), std::sqrt(3.0));
  for (int i = 0; i < n; ++i) {
    ds.feature_slots[static_cast<std::size_t>(i)] = coin(rng) ? 1 : 2;
    if (spec.noise_family == NoiseFamily::Gaussian)
      for (int r = 0; r < d; ++r) zeta(r, i) = normal(rng);
    else
      for (int r = 0; r < d; ++r) zeta(r, i) = uniform(rng);
  }

  for (int k = 0; k < spec.num_classes; ++k) {
    const auto idx = ds.indices_of_class(k);
    if (idx.empty()) continue;
    MatrixXd block(d, static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) block.col(static_cast<Eigen::Index>(c)) = zeta.col(idx[c]);
    const MatrixXd xi = noise.apply(k, block);
    for (std::size_t c = 0; c < idx.size(); ++c) {
      const int i = idx[c];
      const auto col = static_cast<Eigen::Index>(c);
      if (ds.feature_slots[static_cast<std::size_t>(i)] == 1) {
        ds.patch1.col(i) = bank.features.col(k);
        ds.patch2.col(i) = xi.col(col);
      } else {
        ds.patch1.col(i) = xi.col(col);
        ds.patch2.col(i) = bank.features.col(k);
      }
    }
  }
  return ds;
}

}  // namespace

Dataset<double> sample_dataset(const DistributionSpec& spec, const FeatureBank& bank,
                               const NoiseModel& noise, int n, Rng& rng) {
  if (n < 1) throw ConfigError("sample count must be >= 1");
  spec.validate();
  std::discrete_distribution<int> pick(spec.class_probs.begin(), spec.class_probs.end());
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (auto& y : labels) y = pick(rng);
  return realize(spec, bank, noise, std::move(labels), rng);
}

Dataset<double> sample_stratified(const DistributionSpec& spec, const FeatureBank& bank,
                                  const NoiseModel& noise, const std::vector<int>& counts,
                                  Rng& rng) {
  if (counts.size() != static_cast<std::size_t>(spec.num_classes))
    throw ConfigError("one count per class required");
  std::vector<int> labels;
  for (int k = 0; k < spec.num_classes; ++k) {
    if (counts[static_cast<std::size_t>(k)] < 0) throw ConfigError("class counts must be >= 0");
    labels.insert(labels.end(), static_cast<std::size_t>(counts[static_cast<std::size_t>(k)]), k);
  }
  if (labels.empty()) throw ConfigError("sample count must be >= 1");
  return realize(spec, bank, noise, std::move(labels), rng);
}

Dataset<double> sample_class(const DistributionSpec& spec, const FeatureBank& bank,
                             const NoiseModel& noise, int k, int count, Rng& rng) {
  if (k < 0 || k >= spec.num_classes) throw ConfigError("class index out of range");
  if (count < 1) throw ConfigError("sample count must be >= 1");
  return realize(spec, bank, noise, std::vector<int>(static_cast<std::size_t>(count), k), rng);
}

}  // namespace fnlab
