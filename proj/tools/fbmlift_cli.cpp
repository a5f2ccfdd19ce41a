// Command-line driver: one subcommand per experiment.
//
// Exit codes: 0 all checks pass, 1 a check failed or a numerical stage
// raised an error, 2 usage error.

#include <CLI11.hpp>

#include <cstring>
#include <exception>
#include <iostream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbmlift/harness.hpp"
#include "fbmlift/spectral.hpp"

namespace {

// Finds --config <path> or --config=<path> ahead of the real parse so that
// file values can be applied first and overridden by explicit flags.
std::string find_config_path(int argc, char** argv) {
  for (int k = 1; k < argc; ++k) {
    if (std::strcmp(argv[k], "--config") == 0 && k + 1 < argc) return argv[k + 1];
    if (std::strncmp(argv[k], "--config=", 9) == 0) return argv[k] + 9;
  }
  return {};
}

const std::map<std::string, std::string> kSubcommandHelp = {
    {"covariance", "smoothed covariance against the exact fBm covariance"},
    {"levy_variance", "boundary-term variance scaling in the lag"},
    {"divergence", "unregularized area growth as eps shrinks"},
    {"rate", "convergence rate of the regularized area in eps"},
    {"chen", "Chen relation residuals (--order 2 or 3)"},
    {"shuffle", "shuffle relation residuals"},
    {"tree_identities", "cut enumeration, tree Chen and explicit domain checks"},
    {"order3_variance", "order-3 skeleton variance scaling in the lag"},
    {"expand", "print the Fubini forest expansion for every ordering"},
};

const std::map<std::string, std::string> kOptionHelp = {
    {"alpha", "Hurst index list, each in (0, 1/2)"},
    {"eps", "smoothing scale list"},
    {"c-reg", "order-2 cut constant list, each in (0, 1)"},
    {"c-reg-prime", "order-3 cut constant in (0, 1)"},
    {"grid-bins", "frequency bins (at least 2)"},
    {"grid-max", "largest frequency"},
    {"grid-min", "smallest frequency"},
    {"grid-scheme", "geometric or linear"},
    {"lags", "lag list for scaling fits"},
    {"seed", "base RNG seed (default 42)"},
    {"out", "output directory (default results)"},
    {"realizations", "Monte Carlo realizations"},
    {"order", "lift order for chen: 2 or 3"},
    {"diagnostics", "extra reported-only notes: 1 or 0"},
};

}  // namespace

int main(int argc, char** argv) {
  using namespace fbmlift;

  CLI::App app{"Regularized rough-path lifts of fractional Brownian motion with H < 1/4"};
  app.require_subcommand(1);

  std::map<std::string, std::string> values;
  std::string config_path;
  std::map<std::string, CLI::Option*> options;
  std::map<CLI::App*, ExperimentKind> subcommands;

  for (ExperimentKind kind : all_experiment_kinds()) {
    CLI::App* sub = app.add_subcommand(to_string(kind), kSubcommandHelp.at(to_string(kind)));
    subcommands[sub] = kind;
    sub->add_option("--config", config_path, "flat key=value file; flags override it");
    for (const std::string& key : config_keys()) {
      CLI::Option* opt = sub->add_option("--" + key, values[key], kOptionHelp.at(key));
      options[to_string(kind) + "/" + key] = opt;
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return e.get_exit_code() == 0 ? code : 2;
  }

  CLI::App* chosen = nullptr;
  for (auto& [sub, kind] : subcommands)
    if (sub->parsed()) chosen = sub;
  const ExperimentKind kind = subcommands.at(chosen);

  ExperimentConfig config;
  try {
    const std::string path = find_config_path(argc, argv);
    if (!path.empty())
      for (const auto& [key, value] : read_config_file(path)) set_config_value(config, key, value);
    for (const std::string& key : config_keys())
      if (options.at(to_string(kind) + "/" + key)->count() > 0)
        set_config_value(config, key, values[key]);
    validate(config, kind);
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }

  ExperimentReport report;
  try {
    report = run_experiment(config, kind);
  } catch (const SingularityError& e) {
    std::cerr << to_string(kind) << ": singular denominator " << e.denominator() << ": "
              << e.what() << "\n";
    return 1;
  } catch (const QuadratureError& e) {
    std::cerr << to_string(kind) << ": quadrature failure: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << to_string(kind) << ": " << e.what() << "\n";
    return 1;
  }

  try {
    write_report(report, config.out);
  } catch (const std::exception& e) {
    std::cerr << to_string(kind) << ": cannot write output to " << config.out << ": " << e.what()
              << "\n";
    return 1;
  }
  if (!report.text.empty()) std::cout << report.text;
  std::cout << report.summary();
  return report.passed() ? 0 : 1;
}
