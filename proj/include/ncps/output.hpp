#pragma once

#include "ncps/conditions.hpp"
#include "ncps/integrate.hpp"

#include <ostream>
#include <string>

namespace ncps {

/// Streams a trajectory as CSV: the config echo as `# ` lines, the header
/// `t,x1..xp,minGap,VN`, then one row per sample in %.17g.
class TrajectoryCsv {
 public:
  TrajectoryCsv(std::ostream& out, const std::string& echo, int p);
  void row(double t, const ChamberPoint& x);

 private:
  std::ostream& out_;
  int p_;
};

void write_trajectory_csv(std::ostream& out, const std::string& echo, const Trajectory& traj);

/// One trajectory with the config echo as JSON: `t`, `x` (one array per sample),
/// `minGap` (null for p = 1), `VN` and event counts.
std::string trajectory_json(const Trajectory& traj, const std::string& echo);

/// Ensemble statistics with the config echo, as pretty-printed JSON.
std::string ensemble_json(const EnsembleStats& stats, const std::string& echo);

std::string report_json(const ConditionReport& report);

}  // namespace ncps
