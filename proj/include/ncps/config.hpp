#pragma once

#include "ncps/coefficients.hpp"
#include "ncps/integrate.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ncps {

/// Raised by parse_config; `errors` lists every offending key.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

struct InitialState {
  enum class Kind { Zero, Equispaced, List };
  Kind kind = Kind::Zero;
  double a = 0.0, b = 0.0;  // equispaced(a, b)
  std::vector<double> values;
};

struct RunConfig {
  /// dyson, nearest_neighbor, beta_wishart, beta_wishart_abs, jacobi,
  /// hyperbolic, general_psi or custom.
  std::string system;
  std::optional<PresetParams> preset;
  std::string sigma_expr, b_expr, H_expr;  // custom
  Domain domain = Domain::Real;             // custom

  int p = 0;
  InitialState x0;
  double T = 1.0;
  StepControl ctl;
  std::size_t n_paths = 1;
  std::uint64_t seed = 1;
  bool seed_defaulted = true;
  std::string output;
  std::string format;  // csv or json; empty picks by subcommand
};

inline constexpr std::uint64_t kDefaultSeed = 1;

/// Parses the `key = value` format (one pair per line, `#` starts a comment).
RunConfig parse_config(std::string_view text);

CoefficientSet build_system(const RunConfig& cfg);
ChamberPoint initial_state(const RunConfig& cfg);

/// Canonical, fully resolved `key = value` lines (defaults included, output
/// path excluded, format only when set). Parsing the echo reproduces the configuration.
std::string echo(const RunConfig& cfg);

/// Recovers the config echo embedded in a CSV or JSON output file.
std::string extract_echo(std::string_view file_contents);

std::string format_double(double v);

}  // namespace ncps
