#pragma once

#include "ncps/config.hpp"
#include "ncps/integrate.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace ncps {

/// Process exit codes. `check` reports its verdict through 0, 1 and 2.
namespace exit_codes {
inline constexpr int kOk = 0;
inline constexpr int kFail = 1;
inline constexpr int kUnknown = 2;
inline constexpr int kConfigError = 3;
inline constexpr int kSimulationError = 4;
inline constexpr int kIoError = 5;
}  // namespace exit_codes

struct CommandOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;  // overrides the config's output path; "-" is stdout
  unsigned workers = 0;
  std::vector<int> only;  // validate: criterion ids to run
};

/// Reads and parses the config file, applying the seed override.
RunConfig load_config(const CommandOptions& opts);

/// Simulates path 0 of the configured ensemble and streams it as CSV.
EventCounts write_run_csv(std::ostream& out, const RunConfig& cfg);

std::string ensemble_output(const RunConfig& cfg, unsigned workers);

int cmd_check(const CommandOptions& opts, std::ostream& out, std::ostream& log);
int cmd_run(const CommandOptions& opts, std::ostream& out, std::ostream& log);
int cmd_ensemble(const CommandOptions& opts, std::ostream& out, std::ostream& log);
/// Runs the acceptance suite and writes the scorecard JSON; one line per criterion goes to `log`.
int cmd_validate(const CommandOptions& opts, std::ostream& out, std::ostream& log);

}  // namespace ncps
