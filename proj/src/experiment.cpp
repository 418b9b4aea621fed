#include "fnlab/experiment.hpp"

#include <algorithm>
#include <cmath>

#include "fnlab/influence.hpp"

namespace fnlab {

Evaluation evaluate(const ModelParams<double>& w, const SyntheticDistribution& dist, int n_test,
                    const LongTailConfig& lt, bool with_longtail, long draw_cap, std::uint64_t eval_seed) {
  Evaluation ev;
  const int K = dist.spec.num_classes;
  Rng rng(eval_seed);
  double acc = 0.0;
  for (int k = 0; k < K; ++k) acc += 1.0 - zero_one_loss(w, dist, k, n_test, rng);
  ev.accuracy = acc / K;
  if (with_longtail) {
    double correct = 0.0;
    for (int k = 0; k < K; ++k) {
      const auto est = longtail_zero_one(w, dist, k, n_test, lt, rng, draw_cap);
      correct += (1.0 - est.loss) * est.accepted;
      ev.longtail_accepted += est.accepted;
      ev.longtail_exhausted = ev.longtail_exhausted || est.exhausted;
    }
    ev.longtail_accuracy = ev.longtail_accepted ? correct / ev.longtail_accepted : 0.0;
  }
  return ev;
}

SyntheticDistribution run_distribution(const DistributionSpec& spec, std::uint64_t seed,
                                       const std::string& noise_path) {
  DistributionSpec framed = spec;
  framed.seed = stream_seed(seed, Stream::Frame);
  SyntheticDistribution dist = build_distribution(framed);
  if (!noise_path.empty()) {
    NoiseModel noise = read_noise_matrices(noise_path);
    if (noise.num_classes() != spec.num_classes)
      throw SchemaError(noise_path + ": noise file has a different class count than K");
    check_noise_orthogonality(dist.bank, noise);
    dist.noise = std::move(noise);
  }
  return dist;
}

RunOutcome run_experiment(const RunSettings& s) {
  RunOutcome out;
  out.dist = run_distribution(s.spec, s.seed, s.noise_matrices);
  const DistributionSpec& spec = out.dist.spec;

  Rng data_rng(stream_seed(s.seed, Stream::Data));
  out.data = sample_stratified(spec, out.dist.bank, out.dist.noise, s.class_counts, data_rng);
  out.ratios = ratio_report(out.data, out.dist.bank, out.dist.noise);

  Rng init_rng(stream_seed(s.seed, Stream::Init));
  const auto w0 = init_params<double>(spec.num_classes, s.width, spec.dim, s.init_sigma, init_rng);
  try {
    out.trained = train(w0, out.data, s.train);
  } catch (const DivergenceError& e) {
    out.status = std::string("diverged: ") + e.what();
    return out;
  }
  out.eval = evaluate(out.trained->model, out.dist, s.n_test, s.longtail, s.eval_longtail, s.draw_cap,
                      stream_seed(s.seed, Stream::Eval));
  return out;
}

std::string to_string(RemovalSide side) { return side == RemovalSide::High ? "high" : "low"; }

std::vector<int> removal_keep_set(const Dataset<double>& ds, double fraction, RemovalSide side) {
  if (!(fraction >= 0.0 && fraction <= 0.5)) throw ConfigError("removal fraction must lie in [0, 0.5]");
  const MatrixXd noise = ds.noise_patches();
  std::vector<bool> keep(static_cast<std::size_t>(ds.size()), true);
  for (int k = 0; k < ds.num_classes; ++k) {
    const auto idx = ds.indices_of_class(k);
    const auto remove = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(idx.size()) + 1e-9));
    if (remove == 0) continue;
    if (remove >= idx.size()) throw ConfigError("removal would empty class " + std::to_string(k));
    MatrixXd block(ds.dim(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) block.col(static_cast<Eigen::Index>(c)) = noise.col(idx[c]);
    const VectorXd scores = influence_scores<double>(block);
    std::vector<std::size_t> order(idx.size());
    for (std::size_t c = 0; c < order.size(); ++c) order[c] = c;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return scores(static_cast<Eigen::Index>(a)) > scores(static_cast<Eigen::Index>(b));
    });
    for (std::size_t r = 0; r < remove; ++r) {
      const std::size_t pos = side == RemovalSide::High ? order[r] : order[order.size() - 1 - r];
      keep[static_cast<std::size_t>(idx[pos])] = false;
    }
  }
  std::vector<int> kept;
  for (int i = 0; i < ds.size(); ++i)
    if (keep[static_cast<std::size_t>(i)]) kept.push_back(i);
  return kept;
}

namespace {

std::vector<double> class_frob_sq(const Dataset<double>& ds) {
  const MatrixXd noise = ds.noise_patches();
  std::vector<double> out;
  for (int k = 0; k < ds.num_classes; ++k) {
    const auto idx = ds.indices_of_class(k);
    MatrixXd block(ds.dim(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) block.col(static_cast<Eigen::Index>(c)) = noise.col(idx[c]);
    out.push_back(idx.size() >= 2 ? class_stats<double>(block).frob_sq : 0.0);
  }
  return out;
}

}  // namespace

RemovalStudy removal_experiment(const SyntheticDistribution& dist, const Dataset<double>& ds,
                                const std::vector<double>& fractions, const std::vector<RemovalSide>& sides,
                                const RunSettings& s) {
  const std::uint64_t eval_seed = stream_seed(s.seed, Stream::Eval);
  auto fit_and_eval = [&](const Dataset<double>& data) {
    Rng init_rng(stream_seed(s.seed, Stream::Init));
    const auto w0 = init_params<double>(dist.spec.num_classes, s.width, dist.spec.dim, s.init_sigma, init_rng);
    const auto res = train(w0, data, s.train);
    return evaluate(res.model, dist, s.n_test, s.longtail, true, s.draw_cap, eval_seed);
  };

  RemovalStudy study;
  study.frob_sq_before = class_frob_sq(ds);
  study.baseline = fit_and_eval(ds);
  for (double q : fractions)
    for (RemovalSide side : sides) {
      RemovalOutcome o;
      o.fraction = q;
      o.side = side;
      const auto keep = removal_keep_set(ds, q, side);
      o.removed = ds.size() - static_cast<int>(keep.size());
      const Dataset<double> kept = ds.subset(keep);
      o.frob_sq_after = class_frob_sq(kept);
      o.eval = o.removed == 0 ? study.baseline : fit_and_eval(kept);
      o.delta_accuracy = o.eval.accuracy - study.baseline.accuracy;
      o.delta_longtail_accuracy = o.eval.longtail_accuracy - study.baseline.longtail_accuracy;
      study.outcomes.push_back(std::move(o));
    }
  return study;
}

}  // namespace fnlab
