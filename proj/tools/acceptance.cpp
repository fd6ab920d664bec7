// Runs the acceptance criteria and prints one line per criterion.
// Usage: acceptance [id ...]   (default: all)

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "gauge_polymer/verify.hpp"

using namespace gauge_polymer;

int main(int argc, char** argv) {
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
  if (ids.empty())
    for (const Criterion& c : acceptance_criteria()) ids.push_back(c.id);

  VerifyOptions opts;
  int failures = 0;
  for (int id : ids) {
    CriterionResult r = run_criterion(id, opts);
    const char* tag = r.skipped ? "SKIP" : r.passed ? "PASS" : "FAIL";
    if (!r.passed && !r.skipped) ++failures;
    std::printf("[%s] criterion %d: %s (%.1f s)", tag, r.id, r.name.c_str(), r.seconds);
    for (const auto& [k, v] : r.metrics) std::printf(" %s=%.6g", k.c_str(), v);
    if (!r.detail.empty()) std::printf(" | %s", r.detail.c_str());
    std::printf("\n");
    std::fflush(stdout);
  }
  return failures ? 1 : 0;
}
