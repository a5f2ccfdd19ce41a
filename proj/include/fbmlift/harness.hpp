#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fbmlift/spectral.hpp"

namespace fbmlift {

struct PowerLawFit {
  std::vector<std::pair<double, double>> pairs;
  double exponent = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

// Least squares of log(value) on log(scale); needs >= 3 positive pairs.
PowerLawFit fit_power_law(std::span<const std::pair<double, double>> pairs);

enum class ExperimentKind {
  covariance,
  levy_variance,
  divergence,
  rate,
  chen,
  shuffle,
  tree_identities,
  order3_variance,
  expand
};

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& name);
std::vector<ExperimentKind> all_experiment_kinds();

// Unset fields fall back to per-kind defaults.
struct ExperimentConfig {
  std::vector<double> alpha;
  std::vector<double> eps;
  std::vector<double> c_reg;
  std::optional<double> c_reg_prime;
  std::optional<int> grid_bins;
  std::optional<double> grid_max;
  std::optional<double> grid_min;
  std::optional<GridScheme> grid_scheme;
  std::vector<double> lags;
  std::uint64_t seed = 42;
  std::string out = "results";
  std::optional<int> realizations;
  int order = 2;
  bool diagnostics = true;
};

// Keys are the long flag names without dashes, e.g. "c-reg" or "grid-bins".
// List-valued keys take comma-separated values. Throws std::invalid_argument
// on unknown keys or malformed values.
void set_config_value(ExperimentConfig& config, const std::string& key,
                      const std::string& value);
std::vector<std::string> config_keys();

// Flat key=value lines; '#' starts a comment.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path);

void validate(const ExperimentConfig& config, ExperimentKind kind);

struct CsvTable {
  std::string name;  // file name
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_string() const;
};

// 17 significant digits.
std::string format_real(double v);

struct CheckResult {
  std::string label;  // the condition, e.g. "max_residual < 1e-10"
  bool passed;
  std::string value;  // measured quantity
};

struct ExperimentReport {
  ExperimentKind kind = ExperimentKind::expand;
  std::uint64_t seed = 0;
  std::vector<CheckResult> checks;
  std::vector<std::string> notes;
  std::vector<CsvTable> tables;
  std::string text;  // free-form output (expand)

  bool passed() const;
  std::string summary() const;
};

ExperimentReport run_experiment(const ExperimentConfig& config, ExperimentKind kind);

// Writes each table as <dir>/<name>, the text block if any, and
// <kind>_summary.txt.
void write_report(const ExperimentReport& report, const std::string& dir);

// Explicit order-3 cut domains for the five trees of the Fubini expansion,
// used to cross-check the per-vertex rule. which: 0 = T1, 1 = T2,1,
// 2 = T2,2, 3 = T3,1, 4 = T3,2.
bool explicit_order3_domain(int which, double xi1, double xi2, double xi3, double c);

}  // namespace fbmlift
