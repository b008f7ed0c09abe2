#pragma once

#include <functional>
#include <string>
#include <vector>

namespace ncps {

struct Criterion {
  int id = 0;
  std::string name;
  double observed = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  double runtime_s = 0.0;
  std::string detail;
};

struct Scorecard {
  std::vector<Criterion> criteria;
  bool pass() const;
};

struct AcceptanceOptions {
  /// Ensemble workers; 0 uses the hardware concurrency.
  unsigned workers = 0;
  /// Criterion ids to run; empty runs all ten.
  std::vector<int> only;
  /// Called as each criterion finishes.
  std::function<void(const Criterion&)> on_result;
};

inline constexpr int kCriterionCount = 10;

Scorecard run_acceptance(const AcceptanceOptions& options = {});

/// `PASS  3 name  observed=... expected=... tol=... (1.2 s) detail`.
std::string format_line(const Criterion& c);

std::string scorecard_json(const Scorecard& s);

}  // namespace ncps
