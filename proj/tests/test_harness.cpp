#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "fbmlift/harness.hpp"

using namespace fbmlift;

namespace {

std::vector<std::pair<double, double>> dyadic_power(double exponent, double noise = 0.0) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n01;
  std::vector<std::pair<double, double>> out;
  for (int k = 1; k <= 8; ++k) {
    const double h = std::ldexp(1.0, -k);
    out.push_back({h, std::pow(h, exponent) * (1.0 + noise * n01(rng))});
  }
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("fbmlift_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(FBMLIFT_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(FitPowerLaw, ExactPowerLaw) {
  const PowerLawFit fit = fit_power_law(dyadic_power(1.3));
  EXPECT_NEAR(fit.exponent, 1.3, 1e-12);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
  EXPECT_EQ(fit.pairs.size(), 8u);
}

TEST(FitPowerLaw, ConstantData) {
  EXPECT_NEAR(fit_power_law(dyadic_power(0.0)).exponent, 0.0, 1e-14);
}

TEST(FitPowerLaw, PerturbedData) {
  EXPECT_NEAR(fit_power_law(dyadic_power(0.8, 0.01)).exponent, 0.8, 0.05);
}

TEST(FitPowerLaw, RejectsBadData) {
  std::vector<std::pair<double, double>> two{{1.0, 1.0}, {2.0, 2.0}};
  EXPECT_THROW(fit_power_law(two), std::invalid_argument);
  std::vector<std::pair<double, double>> neg{{1.0, 1.0}, {2.0, -2.0}, {3.0, 1.0}};
  EXPECT_THROW(fit_power_law(neg), std::invalid_argument);
  std::vector<std::pair<double, double>> zero{{0.0, 1.0}, {2.0, 2.0}, {3.0, 1.0}};
  EXPECT_THROW(fit_power_law(zero), std::invalid_argument);
}

TEST(Config, KeysAndValues) {
  ExperimentConfig c;
  set_config_value(c, "alpha", "0.1, 0.2");
  set_config_value(c, "c-reg-prime", "0.3");
  set_config_value(c, "grid-bins", "64");
  set_config_value(c, "grid-scheme", "linear");
  set_config_value(c, "lags", "0.5,0.25,0.125");
  set_config_value(c, "seed", "7");
  set_config_value(c, "out", "dir");
  set_config_value(c, "diagnostics", "off");
  EXPECT_EQ(c.alpha, (std::vector<double>{0.1, 0.2}));
  EXPECT_EQ(*c.c_reg_prime, 0.3);
  EXPECT_EQ(*c.grid_bins, 64);
  EXPECT_EQ(*c.grid_scheme, GridScheme::linear);
  EXPECT_EQ(c.lags.size(), 3u);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.out, "dir");
  EXPECT_FALSE(c.diagnostics);
  EXPECT_THROW(set_config_value(c, "nope", "1"), std::invalid_argument);
  EXPECT_THROW(set_config_value(c, "alpha", "0.1,x"), std::invalid_argument);
  EXPECT_THROW(set_config_value(c, "grid-bins", "6.5"), std::invalid_argument);
  EXPECT_THROW(set_config_value(c, "seed", "-1"), std::invalid_argument);
  for (const auto& key : config_keys()) EXPECT_FALSE(key.empty());
}

TEST(Config, FileParsing) {
  const auto dir = scratch_dir("config");
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "a.cfg");
    f << "# comment\nalpha = 0.3\n\n eps=0.01 # trailing\n";
  }
  const auto kv = read_config_file((dir / "a.cfg").string());
  ASSERT_EQ(kv.size(), 2u);
  EXPECT_EQ(kv[0], (std::pair<std::string, std::string>{"alpha", "0.3"}));
  EXPECT_EQ(kv[1], (std::pair<std::string, std::string>{"eps", "0.01"}));
  {
    std::ofstream f(dir / "bad.cfg");
    f << "alpha 0.3\n";
  }
  EXPECT_THROW(read_config_file((dir / "bad.cfg").string()), std::invalid_argument);
  EXPECT_THROW(read_config_file((dir / "missing.cfg").string()), std::invalid_argument);
}

TEST(Config, Validation) {
  ExperimentConfig c;
  c.alpha = {0.6};
  EXPECT_THROW(validate(c, ExperimentKind::covariance), std::invalid_argument);
  c = {};
  c.c_reg = {1.2};
  EXPECT_THROW(validate(c, ExperimentKind::levy_variance), std::invalid_argument);
  c = {};
  c.eps = {1e-2, 1e-3};
  EXPECT_THROW(validate(c, ExperimentKind::rate), std::invalid_argument);
  c = {};
  c.order = 4;
  EXPECT_THROW(validate(c, ExperimentKind::chen), std::invalid_argument);
  c = {};
  c.grid_min = 10.0;
  c.grid_max = 1.0;
  EXPECT_THROW(validate(c, ExperimentKind::covariance), std::invalid_argument);
  EXPECT_NO_THROW(validate(ExperimentConfig{}, ExperimentKind::order3_variance));
}

TEST(Kinds, RoundTrip) {
  for (ExperimentKind k : all_experiment_kinds()) EXPECT_EQ(parse_experiment_kind(to_string(k)), k);
  EXPECT_EQ(all_experiment_kinds().size(), 9u);
  EXPECT_THROW(parse_experiment_kind("bogus"), std::invalid_argument);
}

TEST(Report, FormatRealHasSeventeenDigits) {
  EXPECT_EQ(format_real(0.1), "0.10000000000000001");
  EXPECT_EQ(std::stod(format_real(std::numbers::pi)), std::numbers::pi);
  CsvTable t{"x.csv", {"a", "b"}, {{"1", "2"}}};
  EXPECT_EQ(t.to_string(), "a,b\n1,2\n");
}

TEST(Experiments, ExpandPrintsAllPermutations) {
  const ExperimentReport r = run_experiment(ExperimentConfig{}, ExperimentKind::expand);
  EXPECT_TRUE(r.passed());
  EXPECT_NE(r.text.find("sigma=(1,2,3): +[1[2[3]]]"), std::string::npos);
  EXPECT_NE(r.text.find("sigma=(2,1,3): +[1][2[3]] -[2[1][3]]"), std::string::npos);
  int lines = 0;
  for (char ch : r.text) lines += ch == '\n';
  EXPECT_EQ(lines, 6);
}

TEST(Experiments, ChenDefaultsSummaryLine) {
  const ExperimentReport r = run_experiment(ExperimentConfig{}, ExperimentKind::chen);
  EXPECT_NE(r.summary().find("max_residual < 1e-10: PASS"), std::string::npos) << r.summary();
  EXPECT_NE(r.summary().find("seed: 42"), std::string::npos);
  ASSERT_EQ(r.tables.size(), 1u);
  EXPECT_EQ(r.tables[0].header, (std::vector<std::string>{"case_id", "residual"}));
  EXPECT_EQ(r.tables[0].rows.size(), 1000u);
}

TEST(Experiments, IdenticalConfigGivesIdenticalFiles) {
  ExperimentConfig c;
  c.realizations = 3;
  const auto a = scratch_dir("det_a"), b = scratch_dir("det_b");
  for (ExperimentKind k : {ExperimentKind::shuffle, ExperimentKind::tree_identities, ExperimentKind::expand}) {
    write_report(run_experiment(c, k), a.string());
    write_report(run_experiment(c, k), b.string());
  }
  int files = 0;
  for (const auto& e : std::filesystem::directory_iterator(a)) {
    EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename())) << e.path();
    ++files;
  }
  EXPECT_GE(files, 4);
  EXPECT_TRUE(std::filesystem::exists(a / "shuffle.csv"));
  EXPECT_TRUE(std::filesystem::exists(a / "expand.txt"));
}

TEST(Experiments, CovarianceCsvSchema) {
  ExperimentConfig c;
  c.alpha = {0.3};
  c.grid_bins = 256;
  c.diagnostics = false;
  const ExperimentReport r = run_experiment(c, ExperimentKind::covariance);
  ASSERT_EQ(r.tables.size(), 1u);
  EXPECT_EQ(r.tables[0].name, "covariance_alpha0.3.csv");
  EXPECT_EQ(r.tables[0].header, (std::vector<std::string>{"s", "t", "exact", "approx", "rel_err"}));
  EXPECT_EQ(r.tables[0].rows.size(), 3u);
}

TEST(Experiments, ExplicitDomainRejectsUnknownTree) {
  EXPECT_THROW(explicit_order3_domain(5, 0.1, 0.2, 0.3, 0.5), std::invalid_argument);
  EXPECT_FALSE(explicit_order3_domain(0, 0.5, 0.2, 0.3, 0.5));
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch_dir("cli");
  EXPECT_EQ(run_cli("expand --out " + dir.string()), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "expand_summary.txt"));
  EXPECT_EQ(run_cli(""), 2);
  EXPECT_EQ(run_cli("bogus"), 2);
  EXPECT_EQ(run_cli("chen --alpha 0.7"), 2);
  EXPECT_EQ(run_cli("chen --grid-bins abc"), 2);
  EXPECT_EQ(run_cli("chen --config " + (dir / "missing.cfg").string()), 2);
  // A check failure: covariance at alpha=0.2 misses the 2% bound at eps=1e-3.
  EXPECT_EQ(run_cli("covariance --alpha 0.2 --diagnostics 0 --out " + dir.string()), 1);
}

TEST(Cli, FlagsOverrideConfigFile) {
  const auto dir = scratch_dir("cli_cfg");
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "run.cfg");
    f << "alpha = 0.7\nout = " << (dir / "from_file").string() << "\n";
  }
  // The file alone is invalid; the flag fixes it.
  EXPECT_EQ(run_cli("expand --config " + (dir / "run.cfg").string()), 2);
  EXPECT_EQ(run_cli("expand --config " + (dir / "run.cfg").string() + " --alpha 0.2"), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "from_file" / "expand.txt"));
}
