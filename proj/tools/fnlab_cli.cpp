// fnlab: experiment front-end. Every subcommand resolves its configuration
// as built-in defaults < --config file < --set key=value < dedicated flags,
// and echoes the resolved configuration into each CSV it writes.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include "fnlab/config.hpp"
#include "fnlab/csv.hpp"
#include "fnlab/influence.hpp"
#include "fnlab/sweep.hpp"

namespace fs = std::filesystem;
using namespace fnlab;

namespace {

struct Shared {
  std::string config_path;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int workers = 1;
  bool workers_given = false;
  std::string out;
};

Config resolve(const Shared& sh) {
  Config cfg;
  if (!sh.config_path.empty()) cfg.load_file(sh.config_path);
  for (const auto& s : sh.sets) cfg.set_assignment(s);
  if (sh.seed_given) cfg.set("seed", std::to_string(sh.seed));
  if (sh.workers_given) cfg.set("workers", std::to_string(sh.workers));
  return cfg;
}

// Re-raises library errors from reading `path` with the path prepended.
template <typename F>
auto from_file(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ParseError& e) {
    throw ParseError(path + ":" + std::to_string(e.line()) + ": " + e.what(), e.line());
  } catch (const SchemaError& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

std::string sibling(const std::string& path, const std::string& suffix) {
  fs::path p(path);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

void ensure_parent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

std::vector<int> counts_of(const Config& cfg, int K) {
  const int per = cfg.get_int("per_class");
  if (per < 1) throw ConfigError("per_class must be >= 1 here");
  return std::vector<int>(static_cast<std::size_t>(K), per);
}

int cmd_gen(const Shared& sh, const std::string& noise_out) {
  const Config cfg = resolve(sh);
  const DistributionSpec spec = distribution_spec(cfg);
  const std::uint64_t seed = cfg.get_u64("seed");
  const auto dist = run_distribution(spec, seed, cfg.get("noise_matrices"));
  Rng rng(stream_seed(seed, Stream::Data));
  Dataset<double> ds;
  if (cfg.get_int("per_class") > 0) {
    ds = sample_stratified(dist.spec, dist.bank, dist.noise, counts_of(cfg, spec.num_classes), rng);
  } else {
    const int n = cfg.get_int("n");
    if (n < 1) throw ConfigError("per_class = 0 needs n >= 1");
    ds = sample_dataset(dist.spec, dist.bank, dist.noise, n, rng);
  }
  ensure_parent(sh.out);
  write_dataset(ds, sh.out, cfg.header("gen"));
  if (!noise_out.empty()) write_noise_matrices(dist.noise, noise_out);
  std::printf("wrote %d samples (K=%d, d=%d) to %s\n", ds.size(), ds.num_classes, ds.dim(), sh.out.c_str());
  return 0;
}

int cmd_train(const Shared& sh, const std::string& data_path) {
  const Config cfg = resolve(sh);
  const auto ds = from_file(data_path, [&] { return read_dataset(data_path); });
  const RunSettings s = run_settings(cfg);
  if (ds.num_classes != s.spec.num_classes || ds.dim() != s.spec.dim)
    throw SchemaError(data_path + ": dataset K/d differ from the configured K=" + std::to_string(s.spec.num_classes) +
                      ", d=" + std::to_string(s.spec.dim));
  Rng init_rng(stream_seed(s.seed, Stream::Init));
  const auto w0 = init_params<double>(ds.num_classes, s.width, ds.dim(), s.init_sigma, init_rng);
  const TrainResult res = train(w0, ds, s.train);

  fs::create_directories(sh.out);
  const auto header = cfg.header("train");
  write_model(res.model, (fs::path(sh.out) / "model.csv").string(), header);
  write_trace(res.trace, (fs::path(sh.out) / "trace.csv").string(), header);
  write_cumulative(res.trace, (fs::path(sh.out) / "cumulative.csv").string(), header);
  const auto mono = activation_monotonicity_report(res.trace);
  std::printf("iterations=%d final_loss=%.6g reached_target=%d train_errors=%d monotonicity_violations=%ld/%ld\n",
              res.trace.iterations, res.trace.final_loss(), res.trace.reached_target ? 1 : 0,
              count_errors(res.model, ds), mono.violations, mono.comparisons);
  return 0;
}

int cmd_sweep(const Shared& sh) {
  const Config cfg = resolve(sh);
  const SweepGrid grid = SweepGrid::from_config(cfg);
  const auto rows = run_sweep(grid, cfg.get_int("workers"));
  ensure_parent(sh.out);
  write_sweep(rows, grid, sh.out, cfg.header("sweep"));
  write_sweep_timing(rows, sibling(sh.out, "_timing.csv"), cfg.header("sweep"));
  int diverged = 0;
  for (const auto& r : rows) diverged += r.status != "ok";
  std::printf("wrote %zu rows to %s (%d diverged)\n", rows.size(), sh.out.c_str(), diverged);
  return 0;
}

int cmd_longtail(const Shared& sh, const std::string& model_path, const std::string& data_path) {
  const Config cfg = resolve(sh);
  const DistributionSpec spec = distribution_spec(cfg);
  const std::uint64_t seed = cfg.get_u64("seed");
  const auto dist = run_distribution(spec, seed, cfg.get("noise_matrices"));
  const auto w = from_file(model_path, [&] { return read_model(model_path); });
  if (w.num_classes != spec.num_classes || w.dim != spec.dim)
    throw SchemaError(model_path + ": model K/d differ from the configured distribution");
  LongTailConfig lt;
  lt.L = cfg.get_double("L");
  lt.validate();
  ensure_parent(sh.out);
  csv::Writer out(sh.out, cfg.header("longtail"));
  if (!data_path.empty()) {
    const auto ds = from_file(data_path, [&] { return read_dataset(data_path); });
    const auto flags = longtail_filter(w, ds, dist.noise, lt);
    out.row({"index", "label", "member", "empty_active", "lhs", "rhs"});
    int members = 0;
    for (std::size_t i = 0; i < flags.size(); ++i) {
      members += flags[i].member;
      out.row({std::to_string(i), std::to_string(ds.labels[i]), flags[i].member ? "1" : "0",
               flags[i].empty_active ? "1" : "0", csv::format(flags[i].lhs), csv::format(flags[i].rhs)});
    }
    out.close();
    std::printf("%d of %zu samples are %g-long-tailed\n", members, flags.size(), lt.L);
    return 0;
  }
  Rng rng(stream_seed(seed, Stream::Eval));
  out.row({"label", "zero_one_loss", "accepted", "draws", "exhausted"});
  for (int k = 0; k < spec.num_classes; ++k) {
    const auto est = longtail_zero_one(w, dist, k, cfg.get_int("n_test"), lt, rng, cfg.get_long("draw_cap"));
    out.row({std::to_string(k), csv::format(est.loss), std::to_string(est.accepted), std::to_string(est.draws),
             est.exhausted ? "1" : "0"});
    if (est.exhausted)
      std::fprintf(stderr, "fnlab longtail: class %d hit the draw cap with %d acceptances\n", k, est.accepted);
  }
  out.close();
  return 0;
}

int cmd_influence(const Shared& sh, const std::string& input, const std::string& data_path,
                  const std::string& cross_out) {
  const Config cfg = resolve(sh);
  if (input.empty() == data_path.empty()) throw ConfigError("influence needs exactly one of --input or --data");
  std::map<int, LabeledGroup> groups;
  if (!input.empty()) {
    auto ext = from_file(input, [&] { return ingest_external(input, cfg.get_int("label_column"), cfg.get_bool("header")); });
    groups = std::move(ext.groups);
  } else {
    // Synthetic data: scores are computed on the noise patches.
    const auto ds = from_file(data_path, [&] { return read_dataset(data_path); });
    const MatrixXd noise = ds.noise_patches();
    for (int k = 0; k < ds.num_classes; ++k) {
      const auto idx = ds.indices_of_class(k);
      if (idx.empty()) continue;
      LabeledGroup g;
      g.samples.resize(ds.dim(), static_cast<Eigen::Index>(idx.size()));
      for (std::size_t c = 0; c < idx.size(); ++c) g.samples.col(static_cast<Eigen::Index>(c)) = noise.col(idx[c]);
      g.indices = idx;
      groups.emplace(k, std::move(g));
    }
  }
  const bool stdz = cfg.get_bool("standardize");
  if (stdz) standardize(groups);
  const auto rep = influence_report(groups, stdz);
  ensure_parent(sh.out);
  write_influence_report(rep, sh.out, cfg.header("influence"));
  if (!cross_out.empty()) write_cross_frobenius(groups, cross_out, cfg.header("influence"));
  std::printf("scored %zu samples in %zu classes\n", rep.entries.size(), groups.size());
  return 0;
}

int cmd_remove_eval(const Shared& sh) {
  const Config cfg = resolve(sh);
  const RunSettings s = run_settings(cfg);
  const auto dist = run_distribution(s.spec, s.seed, s.noise_matrices);
  Rng data_rng(stream_seed(s.seed, Stream::Data));
  const auto ds = sample_stratified(dist.spec, dist.bank, dist.noise, s.class_counts, data_rng);
  const auto study = removal_experiment(dist, ds, cfg.get_doubles("fractions"), removal_sides(cfg), s);

  auto total = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); };
  ensure_parent(sh.out);
  csv::Writer out(sh.out, cfg.header("remove-eval"));
  out.row({"fraction", "side", "removed", "test_acc", "longtail_acc", "longtail_accepted", "delta_acc",
           "delta_longtail_acc", "frob_sq_sum"});
  out.row({"0", "none", "0", csv::format(study.baseline.accuracy), csv::format(study.baseline.longtail_accuracy),
           std::to_string(study.baseline.longtail_accepted), "0", "0", csv::format(total(study.frob_sq_before))});
  for (const auto& o : study.outcomes)
    out.row({csv::format(o.fraction), to_string(o.side), std::to_string(o.removed), csv::format(o.eval.accuracy),
             csv::format(o.eval.longtail_accuracy), std::to_string(o.eval.longtail_accepted),
             csv::format(o.delta_accuracy), csv::format(o.delta_longtail_accuracy),
             csv::format(total(o.frob_sq_after))});
  out.close();
  std::printf("baseline test_acc=%.4f longtail_acc=%.4f; %zu removal runs\n", study.baseline.accuracy,
              study.baseline.longtail_accuracy, study.outcomes.size());
  return 0;
}

int cmd_bounds(const Shared& sh) {
  const Config cfg = resolve(sh);
  const DistributionSpec spec = distribution_spec(cfg);
  const auto dist = run_distribution(spec, cfg.get_u64("seed"), cfg.get("noise_matrices"));
  const auto report = ratio_report(counts_of(cfg, spec.num_classes), dist.bank, dist.noise);
  BoundConstants c;
  c.c1 = cfg.get_double("c1");
  c.c2 = cfg.get_double("c2");
  const auto bounds = bound_eval(report, cfg.get_double("L"), c);
  ensure_parent(sh.out);
  write_ratio_report(report, bounds, sh.out, cfg.header("bounds"));
  return 0;
}

int cmd_conditions(const Shared& sh) {
  const Config cfg = resolve(sh);
  const DistributionSpec spec = distribution_spec(cfg);
  const auto dist = run_distribution(spec, cfg.get_u64("seed"), cfg.get("noise_matrices"));
  ConditionInputs in;
  in.class_counts = counts_of(cfg, spec.num_classes);
  in.width = cfg.get_int("m");
  in.eta = cfg.get_double("eta");
  in.init_sigma = cfg.get_double("sigma0");
  in.max_iters = cfg.get_int("T");
  in.C = cfg.get_double("C");
  in.delta = cfg.get_double("delta");
  const auto items = condition_check(dist, in);
  ensure_parent(sh.out);
  write_conditions(items, sh.out, cfg.header("conditions"));
  int held = 0;
  for (const auto& it : items) held += it.holds;
  std::printf("%d of %zu condition items hold\n", held, items.size());
  return 0;
}

void add_shared(CLI::App* sub, Shared& sh, const std::string& default_out) {
  sub->add_option("--config", sh.config_path, "key = value configuration file")->check(CLI::ExistingFile);
  sub->add_option("--set", sh.sets, "override one key (key=value), repeatable");
  sub->add_option_function<std::uint64_t>(
      "--seed", [&sh](const std::uint64_t& v) { sh.seed = v, sh.seed_given = true; }, "master seed");
  sub->add_option_function<int>(
         "--workers", [&sh](const int& v) { sh.workers = v, sh.workers_given = true; }, "parallel sweep workers")
      ->check(CLI::PositiveNumber);
  sh.out = default_out;
  sub->add_option("--out", sh.out, "output path")->capture_default_str();
}

std::string key_help() {
  std::string s = "configuration keys (default):\n";
  for (const auto& k : config_keys())
    s += "  " + std::string(k.name) + " (" + k.default_value + "): " + k.help + "\n";
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fnlab: feature/noise benign-overfitting laboratory"};
  app.footer(key_help());
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  Shared sh;
  std::string noise_out, data_path, model_path, input_path, cross_out;

  auto* gen = app.add_subcommand("gen", "sample a training set");
  add_shared(gen, sh, "dataset.csv");
  gen->add_option("--noise-out", noise_out, "also write the explicit noise transforms");

  auto* tr = app.add_subcommand("train", "train on a dataset file; --out is a directory");
  add_shared(tr, sh, "run");
  tr->add_option("--data", data_path, "dataset file")->required()->check(CLI::ExistingFile);

  auto* sw = app.add_subcommand("sweep", "phase-transition grid");
  add_shared(sw, sh, "sweep.csv");

  auto* lt = app.add_subcommand("longtail", "long-tailed membership or long-tailed test loss");
  add_shared(lt, sh, "longtail.csv");
  lt->add_option("--model", model_path, "model file")->required()->check(CLI::ExistingFile);
  lt->add_option("--data", data_path, "flag these samples instead of estimating the test loss")
      ->check(CLI::ExistingFile);

  auto* inf = app.add_subcommand("influence", "covariance influence scores");
  add_shared(inf, sh, "influence.csv");
  inf->add_option("--input", input_path, "external CSV (label column + features)")->check(CLI::ExistingFile);
  inf->add_option("--data", data_path, "dataset file; noise patches are scored")->check(CLI::ExistingFile);
  inf->add_option("--cross", cross_out, "also write the class cross-Frobenius matrix");

  auto* rm = app.add_subcommand("remove-eval", "influence-ranked removal and retraining");
  add_shared(rm, sh, "removal.csv");
  auto* bd = app.add_subcommand("bounds", "SNR, correlation ratios and benign bounds");
  add_shared(bd, sh, "bounds.csv");
  auto* cd = app.add_subcommand("conditions", "over-parameterization and step-size conditions");
  add_shared(cd, sh, "conditions.csv");

  CLI11_PARSE(app, argc, argv);

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (*gen) return cmd_gen(sh, noise_out);
    if (*tr) return cmd_train(sh, data_path);
    if (*sw) return cmd_sweep(sh);
    if (*lt) return cmd_longtail(sh, model_path, data_path);
    if (*inf) return cmd_influence(sh, input_path, data_path, cross_out);
    if (*rm) return cmd_remove_eval(sh);
    if (*bd) return cmd_bounds(sh);
    if (*cd) return cmd_conditions(sh);
  } catch (const ConfigError& e) {
    std::cerr << "fnlab " << name << ": " << e.what() << "\n";
    return 2;
  } catch (const DivergenceError& e) {
    std::cerr << "fnlab " << name << ": " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "fnlab " << name << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}
