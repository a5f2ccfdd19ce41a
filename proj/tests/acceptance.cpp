// Acceptance criteria, one per invocation: `acceptance N` runs criterion N,
// `acceptance` runs all ten. Prints the individual checks and one
// "criterion N: PASS|FAIL" line per criterion.

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <string>

#include "fbmlift/harness.hpp"

using namespace fbmlift;

namespace {

struct Criterion {
  const char* title;
  ExperimentKind kind;
  int order;
  const char* prefix;  // only checks whose label starts with this count
};

const Criterion kCriteria[10] = {
    {"covariance recovery", ExperimentKind::covariance, 2, ""},
    {"Levy-area Holder exponent", ExperimentKind::levy_variance, 2, ""},
    {"divergence dichotomy", ExperimentKind::divergence, 2, ""},
    {"eps-rate", ExperimentKind::rate, 2, ""},
    {"order-2 Chen identity", ExperimentKind::chen, 2, ""},
    {"order-2 shuffle and antisymmetry", ExperimentKind::shuffle, 2, ""},
    {"tree-algebra suite", ExperimentKind::tree_identities, 2, "tree."},
    {"order-3 cut-domain equivalence", ExperimentKind::tree_identities, 2, "domain."},
    {"order-3 scaling", ExperimentKind::order3_variance, 2, ""},
    {"order-3 Chen compatibility", ExperimentKind::chen, 3, ""},
};

bool run_criterion(int n) {
  const Criterion& c = kCriteria[n - 1];
  ExperimentConfig config;
  config.order = c.order;
  config.diagnostics = false;
  bool ok = true;
  int counted = 0;
  try {
    const ExperimentReport r = run_experiment(config, c.kind);
    std::cout << "criterion " << n << " (" << c.title << "), seed " << r.seed << "\n";
    for (const auto& ch : r.checks) {
      if (std::string(ch.label).rfind(c.prefix, 0) != 0) continue;
      ++counted;
      ok = ok && ch.passed;
      std::cout << "  " << ch.label << ": " << (ch.passed ? "PASS" : "FAIL") << " (" << ch.value << ")\n";
    }
    for (const auto& note : r.notes) std::cout << "  note: " << note << "\n";
  } catch (const std::exception& e) {
    std::cout << "  error: " << e.what() << "\n";
    ok = false;
  }
  ok = ok && counted > 0;
  std::cout << "criterion " << n << ": " << (ok ? "PASS" : "FAIL") << std::endl;
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 2) {
    std::cerr << "usage: acceptance [1-10]\n";
    return 2;
  }
  if (argc == 2) {
    const int n = std::atoi(argv[1]);
    if (n < 1 || n > 10) {
      std::cerr << "usage: acceptance [1-10]\n";
      return 2;
    }
    return run_criterion(n) ? 0 : 1;
  }
  bool all = true;
  for (int n = 1; n <= 10; ++n) all = run_criterion(n) && all;
  return all ? 0 : 1;
}
