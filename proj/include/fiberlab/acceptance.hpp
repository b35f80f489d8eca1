#pragma once

// End-to-end acceptance suite. Each criterion runs a seeded batch of checks,
// compares against oracles computed here (not by the routines under test) and
// reports its worst measured errors and its wall time against a fixed budget.

#include <cstdint>
#include <string>
#include <vector>

namespace fiberlab::acceptance {

struct Options {
  std::uint64_t seed = 7;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double time_limit = 0.0;
};

/// Ids 1..8.
std::vector<int> criterion_ids();
/// Never throws; a library error fails the criterion and lands in `detail`.
CriterionResult run_criterion(int id, const Options& opts = {});
std::vector<CriterionResult> run_all(const Options& opts = {});

/// "PASS  3 geometry            ... (0.41 s / 10 s)".
std::string format_line(const CriterionResult& r);

}  // namespace fiberlab::acceptance
