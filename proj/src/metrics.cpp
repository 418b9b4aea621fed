#include "fnlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fnlab/csv.hpp"

namespace fnlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double ratio_or_inf(double num, double den) {
  if (den > 0.0) return num / den;
  return num > 0.0 ? kInf : 0.0;
}

}  // namespace

double RatioReport::min_offdiag_gamma() const {
  double v = kInf;
  for (int k = 0; k < num_classes; ++k)
    for (int j = 0; j < num_classes; ++j)
      if (k != j) v = std::min(v, gamma(k, j));
  return v;
}

double RatioReport::max_offdiag_gamma() const {
  double v = 0.0;
  for (int k = 0; k < num_classes; ++k)
    for (int j = 0; j < num_classes; ++j)
      if (k != j) v = std::max(v, gamma(k, j));
  return v;
}

RatioReport ratio_report(const std::vector<int>& class_counts, const FeatureBank& bank,
                         const NoiseModel& noise) {
  const int K = noise.num_classes();
  if (bank.num_classes() != K || class_counts.size() != static_cast<std::size_t>(K))
    throw ShapeError("class counts, features and noise transforms disagree on K");
  for (int c : class_counts)
    if (c <= 0) throw DomainError("ratio report needs every class to have training samples");

  RatioReport rep;
  rep.num_classes = K;
  rep.class_counts = class_counts;
  rep.cross_frob_sq.resize(K, K);
  rep.snr_pair = MatrixXd::Zero(K, K);
  rep.gamma = MatrixXd::Zero(K, K);
  for (int k = 0; k < K; ++k) rep.feature_norms.push_back(bank.norm(k));
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < K; ++j) rep.cross_frob_sq(k, j) = noise.cross_frob_sq(k, j);

  for (int k = 0; k < K; ++k) {
    const double sk = class_counts[static_cast<std::size_t>(k)];
    const double signal = sk * sk * std::pow(rep.feature_norms[static_cast<std::size_t>(k)], 4);
    double worst = 0.0;
    for (int j = 0; j < K; ++j) {
      if (j == k) continue;
      const double den = class_counts[static_cast<std::size_t>(j)] * rep.cross_frob_sq(k, j);
      rep.snr_pair(k, j) = ratio_or_inf(signal, den);
      rep.gamma(k, j) = ratio_or_inf(sk * rep.cross_frob_sq(k, k), den);
      worst = std::max(worst, den);
    }
    rep.snr_infinite.push_back(worst == 0.0);
    rep.snr.push_back(worst == 0.0 ? kInf : signal / worst);
  }
  return rep;
}

RatioReport ratio_report(const Dataset<double>& ds, const FeatureBank& bank, const NoiseModel& noise) {
  return ratio_report(ds.class_counts(), bank, noise);
}

BenignBounds bound_eval(const RatioReport& report, double L, const BoundConstants& constants) {
  if (!(constants.c1 > 0.0) || !(constants.c2 > 0.0)) throw ConfigError("bound constants must be > 0");
  if (!(L > 0.0)) throw ConfigError("L must be > 0");
  BenignBounds out;
  for (int k = 0; k < report.num_classes; ++k) {
    double a = 0.0, b = 0.0;
    for (int j = 0; j < report.num_classes; ++j) {
      if (j == k) continue;
      a += std::exp(-constants.c1 * report.snr_pair(k, j));
      b += std::exp(-constants.c2 * L * L * report.gamma(k, j));
    }
    out.feature_bound.push_back(a);
    out.noise_bound.push_back(b);
  }
  return out;
}

void write_ratio_report(const RatioReport& report, const BenignBounds& bounds, const std::string& path,
                        const std::vector<std::string>& header_comments) {
  csv::Writer out(path, header_comments);
  out.row({"k", "j", "snr_kj", "gamma_kj", "cross_frob_sq", "benign_bound_2a", "benign_bound_2b"});
  for (int k = 0; k < report.num_classes; ++k)
    for (int j = 0; j < report.num_classes; ++j) {
      if (j == k) continue;
      out.row({std::to_string(k), std::to_string(j), csv::format(report.snr_pair(k, j)),
               csv::format(report.gamma(k, j)), csv::format(report.cross_frob_sq(k, j)),
               csv::format(bounds.feature_bound[static_cast<std::size_t>(k)]),
               csv::format(bounds.noise_bound[static_cast<std::size_t>(k)])});
    }
  out.close();
}

int count_errors(const ModelParams<double>& w, const Dataset<double>& ds) {
  const BatchForward<double> fwd = forward_batch(w, ds);
  int errors = 0;
  for (int i = 0; i < ds.size(); ++i) {
    const int y = ds.labels[static_cast<std::size_t>(i)];
    const double fy = fwd.scores(y, i);
    bool unique_max = true;
    for (int j = 0; j < w.num_classes; ++j)
      if (j != y && fwd.scores(j, i) >= fy) unique_max = false;
    if (!unique_max) ++errors;
  }
  return errors;
}

double zero_one_loss(const ModelParams<double>& w, const SyntheticDistribution& dist, int k, int n_test,
                     Rng& rng) {
  if (n_test < 1) throw ConfigError("n_test must be >= 1");
  constexpr int kBatch = 2000;
  int errors = 0;
  for (int done = 0; done < n_test; done += kBatch) {
    const int count = std::min(kBatch, n_test - done);
    const auto ds = sample_class(dist.spec, dist.bank, dist.noise, k, count, rng);
    errors += count_errors(w, ds);
  }
  return static_cast<double>(errors) / n_test;
}

void LongTailConfig::validate() const {
  if (!(L > 0.0) || !std::isfinite(L)) throw ConfigError("L must be finite and > 0");
}

std::vector<LongTailFlag> longtail_filter(const ModelParams<double>& w, const Dataset<double>& ds,
                                          const NoiseModel& noise, const LongTailConfig& cfg) {
  cfg.validate();
  if (ds.dim() != w.dim || noise.dim() != w.dim) throw ShapeError("dimension mismatch in long-tail filter");
  std::vector<LongTailFlag> flags(static_cast<std::size_t>(ds.size()));
  const MatrixXd xi_all = ds.noise_patches();
  for (int y = 0; y < ds.num_classes; ++y) {
    const auto idx = ds.indices_of_class(y);
    if (idx.empty()) continue;
    const auto n_y = static_cast<Eigen::Index>(idx.size());
    MatrixXd xi(w.dim, n_y);
    for (Eigen::Index c = 0; c < n_y; ++c) xi.col(c) = xi_all.col(idx[static_cast<std::size_t>(c)]);
    const auto block = w.block(y);
    const MatrixXd pre = block * xi;  // m x n_y
    const MatrixXd mask = (pre.array() > 0.0).cast<double>().matrix();
    const MatrixXd g = block.transpose() * mask;  // d x n_y, sum of active neurons
    const MatrixXd ag = noise.apply_transpose(y, g);
    for (Eigen::Index c = 0; c < n_y; ++c) {
      auto& f = flags[static_cast<std::size_t>(idx[static_cast<std::size_t>(c)])];
      f.empty_active = mask.col(c).sum() == 0.0;
      f.lhs = (pre.col(c).array() * mask.col(c).array()).sum();
      f.rhs = cfg.L * ag.col(c).norm();
      f.member = !f.empty_active && f.lhs >= f.rhs;
    }
  }
  return flags;
}

LongTailEstimate longtail_zero_one(const ModelParams<double>& w, const SyntheticDistribution& dist, int k,
                                   int n_test, const LongTailConfig& cfg, Rng& rng, long draw_cap) {
  if (n_test < 1) throw ConfigError("n_test must be >= 1");
  constexpr long kBatch = 2000;
  LongTailEstimate est;
  int errors = 0;
  while (est.accepted < n_test && est.draws < draw_cap) {
    const int count = static_cast<int>(std::min(kBatch, draw_cap - est.draws));
    const auto ds = sample_class(dist.spec, dist.bank, dist.noise, k, count, rng);
    est.draws += count;
    const auto flags = longtail_filter(w, ds, dist.noise, cfg);
    std::vector<int> keep;
    for (int i = 0; i < count && est.accepted + static_cast<int>(keep.size()) < n_test; ++i)
      if (flags[static_cast<std::size_t>(i)].member) keep.push_back(i);
    if (keep.empty()) continue;
    errors += count_errors(w, ds.subset(keep));
    est.accepted += static_cast<int>(keep.size());
  }
  est.exhausted = est.accepted < n_test;
  est.loss = est.accepted ? static_cast<double>(errors) / est.accepted : 1.0;
  return est;
}

std::vector<ConditionItem> condition_check(const SyntheticDistribution& dist, const ConditionInputs& in) {
  const NoiseModel& A = dist.noise;
  const FeatureBank& bank = dist.bank;
  const int K = A.num_classes();
  if (in.class_counts.size() != static_cast<std::size_t>(K)) throw ConfigError("one class count per class");
  if (!(in.C > 0.0) || !(in.delta > 0.0 && in.delta < 1.0) || in.width < 1 || !(in.init_sigma > 0.0) ||
      !(in.eta > 0.0) || in.max_iters < 1)
    throw ConfigError("condition check inputs must be positive (delta in (0,1))");
  double n = 0.0;
  for (int c : in.class_counts) n += c;
  const double m = in.width, d = A.dim(), C = in.C, delta = in.delta;
  const double logT = std::log(static_cast<double>(std::max(in.max_iters, 2)));

  MatrixXd fro(K, K), op(K, K);
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j) {
      fro(i, j) = std::sqrt(A.cross_frob_sq(i, j));
      op(i, j) = A.cross_op_norm(i, j);
    }
  const double max_fro_all = fro.maxCoeff();

  std::vector<ConditionItem> items;
  auto add = [&](std::string name, double lhs, double rhs) {
    items.push_back({std::move(name), lhs, rhs, lhs >= rhs});
  };

  const double log_n2 = std::log(n * n / delta);
  for (int i = 0; i < K; ++i) {
    const double si = std::max(1, in.class_counts[static_cast<std::size_t>(i)]);
    const double t1 = fro.row(i).maxCoeff() * log_n2;
    const double t2 = std::sqrt(n) * std::sqrt(max_fro_all) * std::sqrt(log_n2) / si;
    add("a.trace[" + std::to_string(i) + "]", A.trace_gram(i), C * n * std::max(t1, t2));
  }
  {
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < K; ++i)
      for (int j = 0; j < K; ++j) worst = std::min(worst, op(i, j) > 0.0 ? fro(i, j) / op(i, j) : 0.0);
    add("a.frob_over_op", worst, C * std::sqrt(std::log(K / delta)));
  }
  {
    // ||A_i^T A_j||_F >= C^{-1} max_{k != j} ||A_i^T A_k||_F, as min of lhs - rhs
    double lhs = 0.0, rhs = 0.0, slack = std::numeric_limits<double>::infinity();
    for (int i = 0; i < K; ++i)
      for (int j = 0; j < K; ++j) {
        double other = 0.0;
        for (int k = 0; k < K; ++k)
          if (k != j) other = std::max(other, fro(i, k));
        const double s = fro(i, j) - other / C;
        if (s < slack) {
          slack = s;
          lhs = fro(i, j);
          rhs = other / C;
        }
      }
    add("a.cross_balance", lhs, rhs);
  }
  {
    // P[zeta > c'] >= 0.4 with c' = 0.25 (gaussian: 0.401) or 0.2*sqrt(3) (uniform: 0.4).
    const bool gauss = dist.spec.noise_family == NoiseFamily::Gaussian;
    const double c = gauss ? 0.25 : 0.2 * std::sqrt(3.0);
    const double tail = gauss ? 0.5 * std::erfc(c / std::sqrt(2.0)) : (std::sqrt(3.0) - c) / (2.0 * std::sqrt(3.0));
    add("a.zeta_tail", tail + 1e-15, 0.4);
  }
  {
    double worst = 0.0;
    for (int i = 0; i < K; ++i) {
      const auto [hi, lo] = A.positive_singular_range(i);
      if (lo > 0.0) worst = std::max(worst, (hi / lo) * (hi / lo));
    }
    add("b.width_condition_number", m, C * std::log(n / delta) * worst);
  }
  add("b.samples_vs_width", n, C * std::log(m / delta));
  add("b.width_vs_init", m, C * std::log(n / delta) * logT * logT / (n * in.init_sigma * in.init_sigma));
  for (int j = 0; j < K; ++j)
    add("b.rank[" + std::to_string(j) + "]", std::min({m, d, static_cast<double>(A.rank(j))}) - 0.9 * m, C * n);
  add("b.dimension", d, C * std::log(m * n / delta));
  {
    double worst = 0.0, max_tr = 0.0;
    for (int k = 0; k < K; ++k) {
      worst = std::max(worst, bank.norm(k) + std::sqrt(1.5 * A.trace_gram(k)));
      max_tr = std::max(max_tr, A.trace_gram(k));
    }
    add("c.eta_smoothness", 1.0 / (C * worst * worst), in.eta);
    add("c.eta_trace", m * n * logT / max_tr, in.eta);
  }
  {
    double phi = std::numeric_limits<double>::infinity();
    for (int a = 0; a < K; ++a) {
      phi = std::min(phi, bank.norm(a) * bank.norm(a));
      for (int b = 0; b < K; ++b) phi = std::min(phi, fro(a, b));
    }
    const double lg = std::log(K * m / delta);
    double scale = 0.0;
    for (int k = 0; k < K; ++k)
      scale = std::max({scale, std::sqrt(lg) * bank.norm(k), lg * std::sqrt(A.trace_gram(k))});
    const double cap = scale > 0.0 ? phi / (C * n * scale) : std::numeric_limits<double>::infinity();
    add("c.init_sigma", cap, in.init_sigma);
  }
  return items;
}

void write_conditions(const std::vector<ConditionItem>& items, const std::string& path,
                      const std::vector<std::string>& header_comments) {
  csv::Writer out(path, header_comments);
  out.row({"condition", "lhs", "rhs", "holds"});
  for (const auto& it : items)
    out.row({it.name, csv::format(it.lhs), csv::format(it.rhs), it.holds ? "1" : "0"});
  out.close();
}

ModelParams<double> reference_params(int width, double eps, const FeatureBank& bank) {
  const int K = bank.num_classes();
  if (K < 2) throw DomainError("reference parameters need K >= 2");
  if (!(eps > 0.0)) throw DomainError("epsilon must be > 0");
  if (width < 1) throw DomainError("width must be >= 1");
  const double coef = 2.5 * std::log(4.0 * (K - 1) / eps);
  ModelParams<double> w{K, width, bank.dim(), 0.0, MatrixXd(K * width, bank.dim())};
  for (int j = 0; j < K; ++j) {
    const double nrm = bank.norm(j);
    if (nrm == 0.0) throw DomainError("feature " + std::to_string(j) + " has zero norm");
    const VectorXd row = coef * bank.features.col(j) / (nrm * nrm);
    for (int r = 0; r < width; ++r) w.neuron(j, r) = row.transpose();
  }
  return w;
}

int activation_count(const ModelParams<double>& w, const Sample<double>& x) {
  if (x.patch1.size() != w.dim) throw ShapeError("sample dimension does not match model");
  const VectorXd pre = w.block(x.label) * x.noise_patch();
  return static_cast<int>((pre.array() > 0.0).count());
}

}  // namespace fnlab
