#include "ncps/acceptance.hpp"

#include <cstdlib>
#include <iostream>
#include <string>

// Prints one PASS/FAIL line per acceptance criterion; exits non-zero if any fails.
int main(int argc, char** argv) {
  ncps::AcceptanceOptions o;
  for (int i = 1; i < argc; ++i) o.only.push_back(std::atoi(argv[i]));
  o.on_result = [](const ncps::Criterion& c) { std::cout << ncps::format_line(c) << std::endl; };
  const ncps::Scorecard s = ncps::run_acceptance(o);
  std::cout << (s.pass() ? "ALL PASS" : "SOME CRITERIA FAILED") << std::endl;
  return s.pass() ? 0 : 1;
}
