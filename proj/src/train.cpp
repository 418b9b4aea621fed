#include "fnlab/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fnlab/csv.hpp"

namespace fnlab {

void TrainConfig::validate() const {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ConfigError("eta must be finite and >= 0");
  if (max_iters < 1) throw ConfigError("T must be >= 1");
  if (!(target_loss > 0.0)) throw ConfigError("epsilon must be > 0");
  if (log_every < 1) throw ConfigError("log_every must be >= 1");
}

namespace {

ActivationSnapshot snapshot(int iteration, const Dataset<double>& ds, const BatchForward<double>& fwd,
                            int width) {
  ActivationSnapshot snap{iteration, std::vector<bool>(static_cast<std::size_t>(ds.size()) * width)};
  for (int i = 0; i < ds.size(); ++i) {
    const auto& pre = ds.feature_slots[static_cast<std::size_t>(i)] == 1 ? fwd.pre2 : fwd.pre1;
    const int base = ds.labels[static_cast<std::size_t>(i)] * width;
    for (int r = 0; r < width; ++r)
      snap.active[static_cast<std::size_t>(i) * width + r] = pre(base + r, i) > 0.0;
  }
  return snap;
}

}  // namespace

TrainResult train(const ModelParams<double>& init, const Dataset<double>& ds, const TrainConfig& cfg) {
  cfg.validate();
  ds.check();
  if (ds.dim() != init.dim || ds.num_classes != init.num_classes)
    throw ShapeError("dataset (K, d) does not match the model");

  TrainResult res{init, {}};
  auto& tr = res.trace;
  const int n = ds.size();
  tr.num_samples = n;
  tr.width = init.width;
  tr.labels = ds.labels;
  tr.cumulative.assign(static_cast<std::size_t>(n), 0.0);

  ModelParams<double>& w = res.model;
  for (int t = 0;; ++t) {
    const BatchForward<double> fwd = forward_batch(w, ds);
    const double loss = fwd.mean_loss();
    if (!std::isfinite(loss)) throw DivergenceError(t, cfg.eta);

    std::vector<double> slack(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      slack[static_cast<std::size_t>(i)] = 1.0 - fwd.logits(ds.labels[static_cast<std::size_t>(i)], i);
    const auto [lo, hi] = std::minmax_element(slack.begin(), slack.end());
    tr.mean_loss.push_back(loss);
    tr.min_one_minus_logit.push_back(*lo);
    tr.max_one_minus_logit.push_back(*hi);
    tr.kappa_hat.push_back(*lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity());

    const bool stop = loss <= cfg.target_loss || t == cfg.max_iters;
    if (t % cfg.log_every == 0 || stop) tr.activations.push_back(snapshot(t, ds, fwd, w.width));
    if (stop) {
      tr.reached_target = loss <= cfg.target_loss;
      tr.iterations = t;
      break;
    }

    for (int i = 0; i < n; ++i) tr.cumulative[static_cast<std::size_t>(i)] += slack[static_cast<std::size_t>(i)];
    if (cfg.record_history) tr.history.push_back(std::move(slack));

    if (cfg.eta > 0.0) {
      w.weights.noalias() -= cfg.eta * batch_gradient(w, ds, fwd);
      if (!w.all_finite()) throw DivergenceError(t + 1, cfg.eta);
    }
  }
  return res;
}

double b_of(const TrainTrace& trace, const std::vector<int>& subset) {
  double acc = 0.0;
  for (int i : subset) {
    const double c = trace.cumulative.at(static_cast<std::size_t>(i));
    acc += c * c;
  }
  return std::sqrt(acc);
}

double b_of_class(const TrainTrace& trace, int k) {
  std::vector<int> subset;
  for (int i = 0; i < trace.num_samples; ++i)
    if (trace.labels[static_cast<std::size_t>(i)] == k) subset.push_back(i);
  return b_of(trace, subset);
}

MonotonicityReport activation_monotonicity_report(const TrainTrace& trace) {
  MonotonicityReport rep;
  for (std::size_t s = 1; s < trace.activations.size(); ++s) {
    const auto& prev = trace.activations[s - 1].active;
    const auto& next = trace.activations[s].active;
    for (std::size_t b = 0; b < prev.size(); ++b)
      if (prev[b]) {
        ++rep.comparisons;
        if (!next[b]) ++rep.violations;
      }
  }
  return rep;
}

void write_trace(const TrainTrace& trace, const std::string& path,
                 const std::vector<std::string>& header_comments) {
  csv::Writer out(path, header_comments);
  out.row({"iter", "mean_loss", "kappa_hat", "min_one_minus_logit", "max_one_minus_logit"});
  for (std::size_t t = 0; t < trace.mean_loss.size(); ++t)
    out.row({std::to_string(t), csv::format(trace.mean_loss[t]), csv::format(trace.kappa_hat[t]),
             csv::format(trace.min_one_minus_logit[t]), csv::format(trace.max_one_minus_logit[t])});
  out.close();
}

void write_cumulative(const TrainTrace& trace, const std::string& path,
                      const std::vector<std::string>& header_comments) {
  csv::Writer out(path, header_comments);
  out.row({"sample_index", "label", "c_i"});
  for (int i = 0; i < trace.num_samples; ++i)
    out.row({std::to_string(i), std::to_string(trace.labels[static_cast<std::size_t>(i)]),
             csv::format(trace.cumulative[static_cast<std::size_t>(i)])});
  out.close();
}

}  // namespace fnlab
