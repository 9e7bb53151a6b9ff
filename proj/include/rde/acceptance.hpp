#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace rde::accept {

struct Options {
  std::uint64_t seed = 42;
  int threads = 1;
  std::string out_dir = "verify-out";
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

/// Runs the full verification suite, writing experiment CSVs under
/// opts.out_dir. The last criterion re-executes every CSV-producing
/// computation with the same seed into out_dir/rerun and byte-compares
/// the outputs.
std::vector<CriterionResult> run_all(const Options& opts);

bool all_passed(const std::vector<CriterionResult>& results);

/// One line per criterion: "[PASS] 3. brownian-reductions (0.1 s) ..."
void print_table(std::ostream& os, const std::vector<CriterionResult>& results);

}  // namespace rde::accept
