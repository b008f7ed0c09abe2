#include "ncps/commands.hpp"

#include "ncps/acceptance.hpp"
#include "ncps/conditions.hpp"
#include "ncps/output.hpp"

#include <fstream>
#include <sstream>

namespace ncps {

namespace {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes to the file at `path`, or to `fallback` when the path is empty or "-".
void emit(const std::string& path, std::ostream& fallback, const std::function<void(std::ostream&)>& body) {
  if (path.empty() || path == "-") {
    body(fallback);
    fallback.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path);
  body(f);
  f.flush();
  if (!f) throw IoError("write failed for " + path);
}

std::string output_path(const CommandOptions& opts, const RunConfig& cfg) {
  return opts.out.empty() ? cfg.output : opts.out;
}

void warn_conditions(const CoefficientSet& cs, std::ostream& log) {
  const ConditionReport r = check_preset(cs);
  if (r.overall != Verdict::Pass)
    log << "warning: non-collision conditions " << to_string(r.overall)
        << " for this system; results may show collisions\n";
}

/// Maps the exceptions of a run onto exit codes.
int guarded(std::ostream& log, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    for (const auto& msg : e.errors()) log << "config error: " << msg << '\n';
    return exit_codes::kConfigError;
  } catch (const IoError& e) {
    log << "i/o error: " << e.what() << '\n';
    return exit_codes::kIoError;
  } catch (const EnsembleError& e) {
    log << "simulation error: " << e.what() << '\n';
    return exit_codes::kSimulationError;
  } catch (const NonRealRootsError& e) {
    log << "simulation error: " << e.what() << '\n';
    return exit_codes::kSimulationError;
  } catch (const ExplosionError& e) {
    log << "simulation error: " << e.what() << '\n';
    return exit_codes::kSimulationError;
  } catch (const SingularityError& e) {
    log << "simulation error: " << e.what() << '\n';
    return exit_codes::kSimulationError;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return exit_codes::kConfigError;
  }
}

}  // namespace

RunConfig load_config(const CommandOptions& opts) {
  if (opts.config_path.empty()) throw ConfigError({"--config: required"});
  RunConfig cfg = parse_config(read_file(opts.config_path));
  if (opts.seed) {
    cfg.seed = *opts.seed;
    cfg.seed_defaulted = false;
  }
  return cfg;
}

EventCounts write_run_csv(std::ostream& out, const RunConfig& cfg) {
  const CoefficientSet cs = build_system(cfg);
  TrajectoryCsv csv(out, echo(cfg), cfg.p);
  return simulate_into(cs, initial_state(cfg), cfg.T, cfg.ctl, NoisePath(cfg.seed).substream(0),
                       [&](double t, const ChamberPoint& x, const PolyPoint*) { csv.row(t, x); });
}

std::string ensemble_output(const RunConfig& cfg, unsigned workers) {
  const CoefficientSet cs = build_system(cfg);
  const EnsembleStats stats = simulate_ensemble(cs, initial_state(cfg), cfg.T, cfg.ctl, cfg.n_paths, cfg.seed, workers);
  return ensemble_json(stats, echo(cfg));
}

int cmd_check(const CommandOptions& opts, std::ostream& out, std::ostream& log) {
  return guarded(log, [&] {
    const RunConfig cfg = load_config(opts);
    const ConditionReport r = check_preset(build_system(cfg));
    emit(opts.out, out, [&](std::ostream& o) { o << report_json(r); });
    return exit_code(r.overall);
  });
}

int cmd_run(const CommandOptions& opts, std::ostream& out, std::ostream& log) {
  return guarded(log, [&] {
    const RunConfig cfg = load_config(opts);
    if (cfg.seed_defaulted) log << "note: no seed given, using " << cfg.seed << '\n';
    warn_conditions(build_system(cfg), log);
    // Render fully before touching the output so a failed run leaves no partial file.
    std::ostringstream buf;
    EventCounts ev;
    if (cfg.format == "json") {
      const Trajectory traj = simulate(build_system(cfg), initial_state(cfg), cfg.T, cfg.ctl,
                                       NoisePath(cfg.seed).substream(0));
      ev = traj.event_counts;
      buf << trajectory_json(traj, echo(cfg));
    } else {
      ev = write_run_csv(buf, cfg);
    }
    emit(output_path(opts, cfg), out, [&](std::ostream& o) { o << buf.str(); });
    for (std::size_t k = 0; k < kEventKinds; ++k)
      if (ev.counts[k]) log << to_string(static_cast<EventKind>(k)) << ": " << ev.counts[k] << '\n';
    return exit_codes::kOk;
  });
}

int cmd_ensemble(const CommandOptions& opts, std::ostream& out, std::ostream& log) {
  return guarded(log, [&] {
    const RunConfig cfg = load_config(opts);
    if (cfg.format == "csv") throw ConfigError({"format: ensemble output is json only"});
    if (cfg.seed_defaulted) log << "note: no seed given, using " << cfg.seed << '\n';
    warn_conditions(build_system(cfg), log);
    const std::string json = ensemble_output(cfg, opts.workers);
    emit(output_path(opts, cfg), out, [&](std::ostream& o) { o << json; });
    return exit_codes::kOk;
  });
}

int cmd_validate(const CommandOptions& opts, std::ostream& out, std::ostream& log) {
  return guarded(log, [&] {
    AcceptanceOptions ao;
    ao.workers = opts.workers;
    ao.only = opts.only;
    ao.on_result = [&](const Criterion& c) { log << format_line(c) << std::endl; };
    const Scorecard s = run_acceptance(ao);
    emit(opts.out, out, [&](std::ostream& o) { o << scorecard_json(s); });
    return s.pass() ? exit_codes::kOk : exit_codes::kFail;
  });
}

}  // namespace ncps
