#pragma once

#include "ncps/coefficients.hpp"
#include "ncps/noise.hpp"
#include "ncps/types.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace ncps {

enum class Scheme { Direct, PolySpace, Hybrid };

std::string to_string(Scheme s);

struct StepControl {
  double dt_base = 1e-3;
  /// Under Direct steps, subdivide by dt_base * min(1, (min_gap / switch_gap)^2).
  bool adaptive = false;
  double gap_floor = 1e-9;
  Scheme scheme = Scheme::Hybrid;
  /// NaN selects 1e3 * sqrt(dt_base).
  double hybrid_switch_gap = std::numeric_limits<double>::quiet_NaN();
  /// Record every k-th base step.
  int sample_every = 1;
  /// Bridge bisections allowed before a step is repaired in place.
  int max_refinement_depth = 19;
  /// Build each base increment from 2^k finer ones (shared-path comparisons across dt).
  int noise_level = 0;
  bool record_poly = false;

  double switch_gap() const;
  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

enum class EventKind { GapFloorHit, Clamped, SchemeSwitch, NonRealRootsRepaired, Refined, SortRepaired };
inline constexpr std::size_t kEventKinds = 6;

std::string to_string(EventKind k);

struct Event {
  double time;
  EventKind kind;
};

struct EventCounts {
  std::array<std::uint64_t, kEventKinds> counts{};

  std::uint64_t& operator[](EventKind k) { return counts[static_cast<std::size_t>(k)]; }
  std::uint64_t operator[](EventKind k) const { return counts[static_cast<std::size_t>(k)]; }
  EventCounts& operator+=(const EventCounts& o) {
    for (std::size_t i = 0; i < kEventKinds; ++i) counts[i] += o.counts[i];
    return *this;
  }
};

struct Trajectory {
  std::vector<double> times;
  std::vector<ChamberPoint> states;
  std::vector<PolyPoint> poly_states;  // filled when StepControl::record_poly is set
  /// The first kMaxStoredEvents events; `event_counts` counts all of them.
  std::vector<Event> events;
  EventCounts event_counts;

  static constexpr std::size_t kMaxStoredEvents = 10000;
};

/// What a single step had to repair.
struct StepReport {
  int sort_swaps = 0;
  bool clamped = false;
  bool gap_floor_hit = false;
  bool nonreal_repaired = false;
  double max_imag = 0.0;
};

/// One Euler-Maruyama step of the singular system. `dW` is the Brownian
/// increment (variance dt per coordinate). The result is sorted and
/// projected onto the state space.
ChamberPoint step_direct(const CoefficientSet& cs, const ChamberPoint& x, double dt, const VectorXd& dW,
                         StepReport* report = nullptr);

/// Recovers the chamber point of `y`, collapsing conjugate pairs up to
/// 1e-4 * max(1, max|root|) and projecting onto the state space.
ChamberPoint recover_state(const CoefficientSet& cs, const PolyPoint& y, StepReport* report = nullptr);

/// One Euler-Maruyama step of the polynomial system, driven by the same
/// p-dimensional increment as step_direct: y' = y + J diag(sigma) dW + q dt.
PolyPoint step_poly(const CoefficientSet& cs, const PolyPoint& y, double dt, const VectorXd& dW,
                    StepReport* report = nullptr);

/// Called on every sample as (time, state, poly state or nullptr).
using SampleSink = std::function<void(double, const ChamberPoint&, const PolyPoint*)>;

/// Integrates to time T and returns every sample_every-th state. Throws
/// NonRealRootsError when roots cannot be repaired, ExplosionError on a
/// non-finite state.
Trajectory simulate(const CoefficientSet& cs, const ChamberPoint& x0, double T, const StepControl& ctl,
                    const NoisePath& noise);

/// Streaming form of simulate: samples go to `sink`, only events are returned.
EventCounts simulate_into(const CoefficientSet& cs, const ChamberPoint& x0, double T, const StepControl& ctl,
                          const NoisePath& noise, const SampleSink& sink, std::vector<Event>* events = nullptr);

/// Mean, standard deviation and standard error of one observable at one time.
struct Moments {
  double mean = 0.0;
  double std = 0.0;
  double stderr_ = 0.0;
};

struct EnsembleStats {
  int p = 0;
  std::size_t n_paths = 0;
  std::vector<double> times;
  std::vector<std::vector<Moments>> x;  // [time][particle]
  std::vector<Moments> e1;
  std::vector<Moments> R;
  std::vector<Moments> min_gap;        // 0 for a single particle
  std::vector<Moments> VN;
  std::vector<double> min_gap_min;     // min over paths
  std::vector<double> positive_gap_fraction;
  EventCounts events;
  std::uint64_t paths_with_clamp = 0;

  /// Index of the sample time closest to t.
  std::size_t time_index(double t) const;
};

/// The path that failed inside an ensemble, with the original message.
class EnsembleError : public std::runtime_error {
 public:
  EnsembleError(const std::string& what, std::size_t path) : std::runtime_error(what), path_(path) {}
  std::size_t path() const { return path_; }

 private:
  std::size_t path_;
};

/// Paths are driven by NoisePath(base_seed).substream(k). Accumulation runs
/// in fixed chunks merged in chunk order, so the result does not depend on
/// the worker count. workers = 0 uses the hardware concurrency.
EnsembleStats simulate_ensemble(const CoefficientSet& cs, const ChamberPoint& x0, double T, const StepControl& ctl,
                                std::size_t n_paths, std::uint64_t base_seed, unsigned workers = 0);

/// Terminal state of each path, in path order, with the same seeding as simulate_ensemble.
std::vector<ChamberPoint> simulate_final_states(const CoefficientSet& cs, const ChamberPoint& x0, double T,
                                                const StepControl& ctl, std::size_t n_paths,
                                                std::uint64_t base_seed, unsigned workers = 0);

/// Runs fn(chunk) for chunk = 0..n_chunks-1 on up to `workers` threads
/// (0 = hardware concurrency). The first exception, by chunk index, is rethrown.
void parallel_chunks(std::size_t n_chunks, unsigned workers, const std::function<void(std::size_t)>& fn);

/// N = p(p-1)/2 product of squared gaps.
double vandermonde_squared(const ChamberPoint& x);

}  // namespace ncps
