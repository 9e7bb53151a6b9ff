#include "rde/acceptance.hpp"

#include <iostream>

int main() {
  rde::accept::Options opts;
  opts.out_dir = "acceptance-out";
  auto results = rde::accept::run_all(opts);
  rde::accept::print_table(std::cout, results);
  return rde::accept::all_passed(results) ? 0 : 1;
}
