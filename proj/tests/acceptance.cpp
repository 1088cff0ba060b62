// Prints one line per acceptance criterion; exits nonzero if any fails.

#include <cstdlib>
#include <iostream>

#include "issl2/acceptance.hpp"

int main(int argc, char** argv) {
  issl2::AcceptanceOptions opts;
  bool all = true;
  for (int id = 1; id <= 9; ++id) {
    if (argc > 1 && std::atoi(argv[1]) != id) continue;
    const issl2::CriterionResult r = issl2::acceptance_criterion(id, opts);
    std::cout << issl2::format_criterion(r) << std::endl;
    all = all && r.pass;
  }
  return all ? 0 : 1;
}
