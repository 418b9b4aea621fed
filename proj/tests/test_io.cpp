#include <gtest/gtest.h>

#include <fstream>

#include "fnlab/config.hpp"
#include "fnlab/csv.hpp"
#include "fnlab/datagen.hpp"
#include "fnlab/net.hpp"
#include "oracles.hpp"

using namespace fnlab;

namespace {

Dataset<double> small_dataset(int n_per_class, std::uint64_t seed) {
  auto spec = DistributionSpec::balanced(3, 9, 1.3, 20.0);
  spec.seed = seed;
  const auto dist = build_distribution(spec);
  Rng rng(seed);
  return sample_stratified(dist.spec, dist.bank, dist.noise, std::vector<int>(3, n_per_class), rng);
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  return out;
}

}  // namespace

TEST(DatasetFile, RoundTripIsBitIdentical) {
  const auto ds = small_dataset(4, 1);
  const auto path = oracle::temp_path("ds.csv");
  write_dataset(ds, path, {"tool_version=0"});
  const auto back = read_dataset(path);
  EXPECT_EQ(back.labels, ds.labels);
  EXPECT_EQ(back.feature_slots, ds.feature_slots);
  EXPECT_EQ(back.patch1, ds.patch1);
  EXPECT_EQ(back.patch2, ds.patch2);
}

TEST(DatasetFile, HeaderDeclaresShape) {
  const auto ds = small_dataset(34, 2);  // 102 samples
  const auto path = oracle::temp_path("ds100.csv");
  write_dataset(ds, path);
  const auto lines = lines_of(oracle::slurp(path));
  ASSERT_EQ(lines.size(), 103u);
  EXPECT_EQ(lines[0], "FNDS1,3,9,102");
  for (std::size_t i = 1; i < lines.size(); ++i) EXPECT_EQ(csv::split(lines[i]).size(), 2u + 2u * 9u);
}

TEST(DatasetFile, TruncatedFileIsParseError) {
  const auto ds = small_dataset(3, 3);
  const auto path = oracle::temp_path("ds_trunc.csv");
  write_dataset(ds, path);
  auto text = oracle::slurp(path);
  std::ofstream(path, std::ios::binary) << text.substr(0, text.size() / 2);
  EXPECT_THROW(read_dataset(path), ParseError);
  // Whole rows missing.
  const auto lines = lines_of(text);
  std::ofstream out(path, std::ios::binary);
  for (std::size_t i = 0; i + 2 < lines.size(); ++i) out << lines[i] << '\n';
  out.close();
  try {
    read_dataset(path);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_GT(e.line(), 0);
  }
}

TEST(DatasetFile, SchemaViolations) {
  const auto path = oracle::temp_path("ds_bad.csv");
  std::ofstream(path) << "FNDS1,2,1,1\n5,1,0.1,0.2\n";
  EXPECT_THROW(read_dataset(path), SchemaError);
  std::ofstream(path) << "FNDS1,2,1,1\n0,3,0.1,0.2\n";
  EXPECT_THROW(read_dataset(path), SchemaError);
  std::ofstream(path) << "FNDS1,2,1,1\n0,1,0.1,0.2,0.3\n";
  EXPECT_THROW(read_dataset(path), SchemaError);
  std::ofstream(path) << "FNDS1,2,1,1\n0,1,abc,0.2\n";
  EXPECT_THROW(read_dataset(path), ParseError);
  std::ofstream(path) << "WRONG,2,1,1\n";
  EXPECT_THROW(read_dataset(path), ParseError);
}

TEST(ModelFile, RoundTripIsBitIdentical) {
  Rng rng(4);
  const auto w = init_params<double>(3, 5, 7, 0.37, rng);
  const auto path = oracle::temp_path("model.csv");
  write_model(w, path, {"x=1"});
  const auto back = read_model(path);
  EXPECT_EQ(back.weights, w.weights);
  EXPECT_EQ(back.init_sigma, w.init_sigma);
  EXPECT_EQ(back.width, 5);
  EXPECT_EQ(oracle::slurp(path).rfind("# x=1\nW1,3,5,7,", 0), 0u);
}

TEST(ModelFile, TruncatedModelRejected) {
  const auto path = oracle::temp_path("model_trunc.csv");
  std::ofstream(path) << "W1,1,2,2,0.01\n0.1,0.2\n";
  EXPECT_THROW(read_model(path), ParseError);
}

TEST(NoiseFile, RoundTripAndOrthogonalityCheck) {
  auto spec = DistributionSpec::balanced(2, 8, 1.0, 5.0);
  const auto dist = build_distribution(spec);
  const auto path = oracle::temp_path("noise.csv");
  write_noise_matrices(dist.noise, path);
  const auto back = read_noise_matrices(path);
  for (int k = 0; k < 2; ++k) EXPECT_EQ(back.dense(k), dist.noise.dense(k));
  EXPECT_NO_THROW(check_noise_orthogonality(dist.bank, back));
  const auto bad = NoiseModel::from_matrices({MatrixXd::Identity(8, 8), MatrixXd::Identity(8, 8)});
  EXPECT_THROW(check_noise_orthogonality(dist.bank, bad), SchemaError);
}

TEST(NoiseFile, ExplicitTransformsAgreeWithFactoredOnes) {
  auto spec = DistributionSpec::balanced(3, 12, 1.0, 30.0);
  const auto dist = build_distribution(spec);
  std::vector<MatrixXd> maps;
  for (int k = 0; k < 3; ++k) maps.push_back(dist.noise.dense(k));
  const auto dense = NoiseModel::from_matrices(maps);
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(dense.trace_gram(k), dist.noise.trace_gram(k), 1e-12);
    EXPECT_EQ(dense.rank(k), dist.noise.rank(k));
    for (int j = 0; j < 3; ++j) {
      EXPECT_LT(oracle::rel_err(dense.cross_frob_sq(k, j), dist.noise.cross_frob_sq(k, j)), 1e-10);
      EXPECT_LT(oracle::rel_err(dense.cross_op_norm(k, j), dist.noise.cross_op_norm(k, j)), 1e-10);
    }
  }
}

TEST(Csv, FormatRoundTripsSeventeenDigits) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) EXPECT_EQ(csv::parse_double(csv::format(v), 0, 0), v);
}

TEST(Csv, ParseErrorsCarryLineAndColumn) {
  try {
    csv::parse_double("1.0x", 12, 3);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 12);
    EXPECT_NE(std::string(e.what()).find("column 3"), std::string::npos);
  }
}

TEST(Config, PrecedenceDefaultsFileOverrides) {
  const auto path = oracle::temp_path("prec.cfg");
  std::ofstream(path) << "# comment\nseed = 5\nm = 7\n\nK=3\n";
  Config cfg;
  EXPECT_EQ(cfg.get("m"), "100");
  cfg.load_file(path);
  EXPECT_EQ(cfg.get_int("m"), 7);
  EXPECT_EQ(cfg.get_u64("seed"), 5u);
  cfg.set_assignment("seed=9");
  EXPECT_EQ(cfg.get_u64("seed"), 9u);
  EXPECT_EQ(cfg.get_int("K"), 3);
}

TEST(Config, UnknownKeyListsValidKeys) {
  Config cfg;
  try {
    cfg.set("bogus", "1");
    FAIL();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("bogus"), std::string::npos);
    EXPECT_NE(msg.find("feature_norm"), std::string::npos);
    EXPECT_NE(msg.find("gamma_ratio"), std::string::npos);
  }
  const auto path = oracle::temp_path("bad.cfg");
  std::ofstream(path) << "K = 2\nnope\n";
  try {
    cfg.load_file(path);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }
}

TEST(Config, TypedGettersRejectGarbage) {
  Config cfg;
  cfg.set("m", "ten");
  EXPECT_THROW(cfg.get_int("m"), ConfigError);
  cfg.set("longtail_eval", "maybe");
  EXPECT_THROW(cfg.get_bool("longtail_eval"), ConfigError);
  cfg.set("axis1_values", "1,x");
  EXPECT_THROW(cfg.get_doubles("axis1_values"), ConfigError);
}

TEST(Config, HeaderEchoesResolvedConfigWithoutWorkers) {
  Config cfg;
  cfg.set("workers", "8");
  const auto h = cfg.header("sweep");
  ASSERT_EQ(h.size(), 3u);
  EXPECT_EQ(h[0], std::string("tool_version=") + kToolVersion);
  EXPECT_EQ(h[1], "command=sweep");
  EXPECT_EQ(h[2].find("workers"), std::string::npos);
  EXPECT_NE(h[2].find("d=1000"), std::string::npos);
}

TEST(Config, DefaultsDescribeTheReferenceSetup) {
  const RunSettings s = run_settings(Config{});
  EXPECT_EQ(s.spec.num_classes, 5);
  EXPECT_EQ(s.spec.dim, 1000);
  EXPECT_EQ(s.class_counts, std::vector<int>(5, 100));
  EXPECT_EQ(s.width, 100);
  EXPECT_EQ(s.train.eta, 0.05);
  EXPECT_EQ(s.spec.shared_eig, 0.5);
  EXPECT_EQ(s.spec.private_eigs, std::vector<double>(5, 0.0));
}

TEST(Config, GammaRatioSetsPrivateEigenvalue) {
  Config cfg;
  cfg.set("gamma_ratio", "800");
  const auto spec = distribution_spec(cfg);
  EXPECT_DOUBLE_EQ(spec.private_eigs[0], gamma_for_target_ratio(800.0, 990, 0.5));
  cfg.set("private_eig", "0.1,0.2,0.3,0.4,0.5");
  EXPECT_EQ(distribution_spec(cfg).private_eigs[4], 0.5);
  cfg.set("class_probs", "0.5,0.5,0.1,0,0");
  EXPECT_THROW(distribution_spec(cfg), ConfigError);
}
