#include "ncps/integrate.hpp"

#include "ncps/sympoly.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace ncps {
namespace {

constexpr double kCollapseLimit = 1e-4;
// Imaginary parts up to this many noise standard deviations of the leaf are
// discretisation noise: from a collided pair the real-rootedness of one step
// does not improve as the step is bisected.
constexpr double kNoiseCollapse = 8.0;

bool all_finite(const VectorXd& v) { return v.allFinite(); }

// Insertion sort, returning the number of adjacent swaps performed.
int sort_counting(VectorXd& v) {
  int swaps = 0;
  for (Index i = 1; i < v.size(); ++i)
    for (Index j = i; j > 0 && v[j] < v[j - 1]; --j) {
      std::swap(v[j], v[j - 1]);
      ++swaps;
    }
  return swaps;
}

bool clamp_into(VectorXd& v, const Interval& dom) {
  bool clamped = false;
  for (Index i = 0; i < v.size(); ++i) {
    if (v[i] < dom.lo) {
      v[i] = dom.lo;
      clamped = true;
    } else if (v[i] > dom.hi) {
      v[i] = dom.hi;
      clamped = true;
    }
  }
  return clamped;
}

bool inside(const VectorXd& v, const Interval& dom) {
  for (Index i = 0; i < v.size(); ++i)
    if (!(v[i] >= dom.lo && v[i] <= dom.hi)) return false;
  return true;
}

double min_adjacent_gap(const VectorXd& v) {
  double g = std::numeric_limits<double>::infinity();
  for (Index i = 1; i < v.size(); ++i) g = std::min(g, v[i] - v[i - 1]);
  return g;
}

VectorXd direct_raw(const CoefficientSet& cs, const ChamberPoint& x, double dt, const VectorXd& dW) {
  const int p = cs.size();
  VectorXd out(p);
  for (int i = 0; i < p; ++i) out[i] = x[i] + cs.sigma(i, x[i]) * dW[i] + singular_drift(cs, i, x) * dt;
  return out;
}

VectorXld poly_raw(const CoefficientSet& cs, const ChamberPoint& x, const VectorXld& y, double dt,
                   const VectorXd& dW) {
  const int p = cs.size();
  const MatrixXd J = incomplete_table(x.coords());
  VectorXd sdW(p);
  for (int i = 0; i < p; ++i) sdW[i] = cs.sigma(i, x[i]) * dW[i];
  const VectorXd dy = J * sdW + poly_drift(cs, x, J) * dt;
  return y + dy.cast<long double>();
}

// Chamber point of y with conjugate pairs collapsed and the state space enforced.
ChamberPoint repair_roots(const CoefficientSet& cs, const PolyPoint& y, StepReport* report) {
  RootRecovery rec = recover_roots(y);
  const double scale = std::max(1.0, rec.roots.size() ? rec.roots.cwiseAbs().maxCoeff() : 0.0);
  if (rec.max_imag > kCollapseLimit * scale)
    throw NonRealRootsError("state left the closed chamber: imaginary part " + std::to_string(rec.max_imag) +
                                " (reduce dt)",
                            rec.max_imag);
  bool clamped = clamp_into(rec.roots, domain_interval(cs.domain()));
  if (report) {
    report->max_imag = std::max(report->max_imag, rec.max_imag);
    if (rec.max_imag > default_root_tolerance(y)) report->nonreal_repaired = true;
    report->clamped = report->clamped || clamped;
  }
  return ChamberPoint(std::move(rec.roots));
}

struct State {
  ChamberPoint x;
  VectorXld y;  // valid when has_y
  bool has_y = false;
};

class Integrator {
 public:
  Integrator(const CoefficientSet& cs, const StepControl& ctl, const NoisePath& noise, std::vector<Event>* events)
      : cs_(cs),
        ctl_(ctl),
        noise_(noise),
        events_(events),
        dom_(domain_interval(cs.domain())),
        switch_gap_(ctl.switch_gap()),
        p_(cs.size()) {}

  EventCounts counts;

  void base_step(State& s, std::uint64_t step, double t, double h) {
    const VectorXd dW = noise_.increment(step, p_, h, ctl_.noise_level);
    int forced = 0;
    if (ctl_.adaptive && scheme_for(s) == Scheme::Direct && p_ >= 2) {
      const double ratio = std::min(1.0, s.x.min_gap() / switch_gap_);
      if (ratio < 1.0) {
        const double levels = std::ceil(std::log2(1.0 / (ratio * ratio)));
        forced = static_cast<int>(std::min<double>(levels, ctl_.max_refinement_depth));
      }
    }
    advance(s, step, 1, t, h, dW, 0, forced);
  }

 private:
  Scheme scheme_for(const State& s) const {
    if (ctl_.scheme != Scheme::Hybrid) return ctl_.scheme;
    return s.x.min_gap() < switch_gap_ ? Scheme::PolySpace : Scheme::Direct;
  }

  void record(double t, EventKind k, std::uint64_t n = 1) {
    counts[k] += n;
    if (events_ && events_->size() < Trajectory::kMaxStoredEvents) events_->push_back({t, k});
  }

  void advance(State& s, std::uint64_t step, std::uint32_t node, double t, double h, const VectorXd& dW, int depth,
               int forced) {
    const Scheme mode = scheme_for(s);
    if (ctl_.scheme == Scheme::Hybrid) {
      if (last_mode_ && *last_mode_ != mode) record(t, EventKind::SchemeSwitch);
      last_mode_ = mode;
    }
    if (depth < forced) {
      bisect(s, step, node, t, h, dW, depth, forced);
      return;
    }
    const bool can_refine = depth < ctl_.max_refinement_depth;
    if (mode == Scheme::Direct)
      direct_leaf(s, step, node, t, h, dW, depth, forced, can_refine);
    else
      poly_leaf(s, step, node, t, h, dW, depth, forced, can_refine);
  }

  void bisect(State& s, std::uint64_t step, std::uint32_t node, double t, double h, const VectorXd& dW, int depth,
              int forced) {
    const VectorXd first = noise_.bridge_midpoint(step, node, dW, h);
    const VectorXd second = dW - first;
    advance(s, step, 2 * node, t, 0.5 * h, first, depth + 1, forced);
    advance(s, step, 2 * node + 1, t + 0.5 * h, 0.5 * h, second, depth + 1, forced);
  }

  void direct_leaf(State& s, std::uint64_t step, std::uint32_t node, double t, double h, const VectorXd& dW,
                   int depth, int forced, bool can_refine) {
    VectorXd raw = direct_raw(cs_, s.x, h, dW);
    if (!all_finite(raw)) throw ExplosionError("non-finite state", t + h);
    bool ok = inside(raw, dom_);
    if (ok && p_ >= 2) {
      for (Index i = 1; i < raw.size(); ++i)
        if (!(raw[i] - raw[i - 1] > ctl_.gap_floor)) ok = false;
    }
    if (!ok && can_refine) {
      record(t, EventKind::Refined);
      bisect(s, step, node, t, h, dW, depth, forced);
      return;
    }
    const int swaps = sort_counting(raw);
    if (swaps > 0) record(t + h, EventKind::SortRepaired, static_cast<std::uint64_t>(swaps));
    if (clamp_into(raw, dom_)) record(t + h, EventKind::Clamped);
    if (p_ >= 2 && min_adjacent_gap(raw) <= ctl_.gap_floor) {
      record(t + h, EventKind::GapFloorHit);
      if (ctl_.scheme == Scheme::Direct) {
        // The singular drift cannot be evaluated across a closed gap: push the pair apart.
        for (Index i = 1; i < raw.size(); ++i)
          if (raw[i] - raw[i - 1] <= ctl_.gap_floor) raw[i] = raw[i - 1] + 2.0 * ctl_.gap_floor;
      }
    }
    s.x = ChamberPoint(std::move(raw));
    s.has_y = false;
  }

  void poly_leaf(State& s, std::uint64_t step, std::uint32_t node, double t, double h, const VectorXd& dW, int depth,
                 int forced, bool can_refine) {
    if (!s.has_y) {
      s.y = elem_sym(s.x).coords();
      s.has_y = true;
    }
    VectorXld ynew = poly_raw(cs_, s.x, s.y, h, dW);
    if (!ynew.allFinite()) throw ExplosionError("non-finite state", t + h);
    const PolyPoint yp(ynew);
    RootRecovery rec = recover_roots_near(yp, s.x.coords());
    const bool real = rec.max_imag <= default_root_tolerance(yp);
    const bool in_dom = inside(rec.roots, dom_);
    const bool gap_ok = p_ < 2 || min_adjacent_gap(rec.roots) > ctl_.gap_floor;
    if (!(real && in_dom && gap_ok) && can_refine) {
      record(t, EventKind::Refined);
      bisect(s, step, node, t, h, dW, depth, forced);
      return;
    }
    bool projected = false;
    if (!real) {
      const double scale = std::max(1.0, rec.roots.cwiseAbs().maxCoeff());
      double sigma_max = 0.0;
      for (int i = 0; i < p_; ++i) sigma_max = std::max(sigma_max, std::abs(cs_.sigma(i, s.x[i])));
      if (rec.max_imag > std::max(kCollapseLimit * scale, kNoiseCollapse * sigma_max * std::sqrt(h)))
        throw NonRealRootsError("state left the closed chamber at t = " + std::to_string(t + h) +
                                    ": imaginary part " + std::to_string(rec.max_imag) + " (reduce dt)",
                                rec.max_imag);
      record(t + h, EventKind::NonRealRootsRepaired);
      projected = true;
    }
    if (clamp_into(rec.roots, dom_)) {
      record(t + h, EventKind::Clamped);
      projected = true;
    }
    if (p_ >= 2 && min_adjacent_gap(rec.roots) <= ctl_.gap_floor) record(t + h, EventKind::GapFloorHit);
    s.x = ChamberPoint(std::move(rec.roots));
    if (projected)
      s.y = elem_sym(s.x).coords();
    else
      s.y = std::move(ynew);
    s.has_y = true;
  }

  const CoefficientSet& cs_;
  const StepControl& ctl_;
  const NoisePath& noise_;
  std::vector<Event>* events_;
  Interval dom_;
  double switch_gap_;
  int p_;
  std::optional<Scheme> last_mode_;
};

// Welford accumulator with Chan's pairwise merge.
struct Acc {
  double n = 0.0, mean = 0.0, m2 = 0.0;

  void add(double v) {
    n += 1.0;
    const double d = v - mean;
    mean += d / n;
    m2 += d * (v - mean);
  }
  void merge(const Acc& o) {
    if (o.n == 0.0) return;
    if (n == 0.0) {
      *this = o;
      return;
    }
    const double tot = n + o.n;
    const double d = o.mean - mean;
    mean += d * o.n / tot;
    m2 += o.m2 + d * d * n * o.n / tot;
    n = tot;
  }
  Moments moments() const {
    Moments m;
    m.mean = mean;
    m.std = n > 1.0 ? std::sqrt(m2 / (n - 1.0)) : 0.0;
    m.stderr_ = n > 0.0 ? m.std / std::sqrt(n) : 0.0;
    return m;
  }
};

struct TimeAcc {
  std::vector<Acc> x;
  Acc e1, R, gap, VN;
  double gap_min = std::numeric_limits<double>::infinity();
  std::uint64_t positive = 0;

  void merge(const TimeAcc& o) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i].merge(o.x[i]);
    e1.merge(o.e1);
    R.merge(o.R);
    gap.merge(o.gap);
    VN.merge(o.VN);
    gap_min = std::min(gap_min, o.gap_min);
    positive += o.positive;
  }
};

struct ChunkResult {
  std::vector<TimeAcc> acc;
  std::vector<double> times;
  EventCounts events;
  std::uint64_t clamp_paths = 0;
};

}  // namespace

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::Direct:
      return "direct";
    case Scheme::PolySpace:
      return "poly";
    case Scheme::Hybrid:
      return "hybrid";
  }
  return "hybrid";
}

std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::GapFloorHit:
      return "gap_floor_hit";
    case EventKind::Clamped:
      return "clamped";
    case EventKind::SchemeSwitch:
      return "scheme_switch";
    case EventKind::NonRealRootsRepaired:
      return "nonreal_roots_repaired";
    case EventKind::Refined:
      return "refined";
    case EventKind::SortRepaired:
      return "sort_repaired";
  }
  return "?";
}

double StepControl::switch_gap() const {
  return std::isnan(hybrid_switch_gap) ? 1e3 * std::sqrt(dt_base) : hybrid_switch_gap;
}

void StepControl::validate() const {
  if (!(dt_base > 0.0) || !std::isfinite(dt_base)) throw std::invalid_argument("dt must be positive and finite");
  if (!(gap_floor > 0.0) || !std::isfinite(gap_floor)) throw std::invalid_argument("gap_floor must be positive");
  if (scheme == Scheme::Hybrid && !(gap_floor < switch_gap()))
    throw std::invalid_argument("gap_floor must be smaller than hybrid_switch_gap");
  if (sample_every < 1) throw std::invalid_argument("sample_every must be at least 1");
  if (max_refinement_depth < 0 || max_refinement_depth > 19)
    throw std::invalid_argument("max_refinement_depth must lie in [0, 19]");
  if (noise_level < 0 || noise_level > 20) throw std::invalid_argument("noise_level must lie in [0, 20]");
}

ChamberPoint step_direct(const CoefficientSet& cs, const ChamberPoint& x, double dt, const VectorXd& dW,
                         StepReport* report) {
  VectorXd raw = direct_raw(cs, x, dt, dW);
  const int swaps = sort_counting(raw);
  const bool clamped = clamp_into(raw, domain_interval(cs.domain()));
  if (report) {
    report->sort_swaps += swaps;
    report->clamped = report->clamped || clamped;
  }
  return ChamberPoint(std::move(raw));
}

ChamberPoint recover_state(const CoefficientSet& cs, const PolyPoint& y, StepReport* report) {
  return repair_roots(cs, y, report);
}

PolyPoint step_poly(const CoefficientSet& cs, const PolyPoint& y, double dt, const VectorXd& dW, StepReport* report) {
  StepReport local;
  const ChamberPoint x = repair_roots(cs, y, &local);
  const VectorXld base = (local.nonreal_repaired || local.clamped) ? elem_sym(x).coords() : y.coords();
  if (report) {
    report->max_imag = std::max(report->max_imag, local.max_imag);
    report->nonreal_repaired = report->nonreal_repaired || local.nonreal_repaired;
    report->clamped = report->clamped || local.clamped;
  }
  return PolyPoint(poly_raw(cs, x, base, dt, dW));
}

EventCounts simulate_into(const CoefficientSet& cs, const ChamberPoint& x0, double T, const StepControl& ctl,
                          const NoisePath& noise, const SampleSink& sink, std::vector<Event>* events) {
  ctl.validate();
  if (x0.size() != cs.size()) throw std::invalid_argument("x0 has the wrong number of particles");
  if (!(T >= 0.0) || !std::isfinite(T)) throw std::invalid_argument("T must be finite and non-negative");
  if (!inside(x0.coords(), domain_interval(cs.domain())))
    throw std::invalid_argument("x0 lies outside the state space");

  Integrator integ(cs, ctl, noise, events);
  State s{x0, {}, false};
  const double dt = ctl.dt_base;
  const auto n_steps = static_cast<std::uint64_t>(std::ceil(T / dt - 1e-9));

  auto emit = [&](double t) {
    if (ctl.record_poly && !s.has_y) {
      s.y = elem_sym(s.x).coords();
      s.has_y = true;
    }
    const PolyPoint yp(s.has_y ? s.y : VectorXld());
    sink(t, s.x, ctl.record_poly ? &yp : nullptr);
  };

  emit(0.0);
  for (std::uint64_t n = 0; n < n_steps; ++n) {
    const double t = static_cast<double>(n) * dt;
    const double t_next = n + 1 == n_steps ? T : static_cast<double>(n + 1) * dt;
    integ.base_step(s, n, t, t_next - t);
    if ((n + 1) % static_cast<std::uint64_t>(ctl.sample_every) == 0 || n + 1 == n_steps) emit(t_next);
  }
  return integ.counts;
}

Trajectory simulate(const CoefficientSet& cs, const ChamberPoint& x0, double T, const StepControl& ctl,
                    const NoisePath& noise) {
  Trajectory tr;
  tr.event_counts = simulate_into(
      cs, x0, T, ctl, noise,
      [&](double t, const ChamberPoint& x, const PolyPoint* y) {
        tr.times.push_back(t);
        tr.states.push_back(x);
        if (y) tr.poly_states.push_back(*y);
      },
      &tr.events);
  return tr;
}

double vandermonde_squared(const ChamberPoint& x) {
  double v = 1.0;
  for (Index i = 0; i < x.size(); ++i)
    for (Index j = i + 1; j < x.size(); ++j) v *= (x[j] - x[i]) * (x[j] - x[i]);
  return v;
}

void parallel_chunks(std::size_t n_chunks, unsigned workers, const std::function<void(std::size_t)>& fn) {
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr error;
  std::size_t error_chunk = n_chunks;
  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      try {
        fn(c);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (c < error_chunk) {
          error_chunk = c;
          error = std::current_exception();
        }
      }
    }
  };
  unsigned n = workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : workers;
  n = static_cast<unsigned>(std::min<std::size_t>(n, n_chunks));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < n; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
}

std::size_t EnsembleStats::time_index(double t) const {
  std::size_t best = 0;
  for (std::size_t k = 1; k < times.size(); ++k)
    if (std::abs(times[k] - t) < std::abs(times[best] - t)) best = k;
  return best;
}

EnsembleStats simulate_ensemble(const CoefficientSet& cs, const ChamberPoint& x0, double T, const StepControl& ctl,
                                std::size_t n_paths, std::uint64_t base_seed, unsigned workers) {
  if (n_paths < 1) throw std::invalid_argument("n_paths must be at least 1");
  ctl.validate();
  const int p = cs.size();
  const NoisePath root(base_seed);
  constexpr std::size_t kChunk = 32;
  const std::size_t n_chunks = (n_paths + kChunk - 1) / kChunk;
  std::vector<ChunkResult> chunks(n_chunks);

  auto run_chunk = [&](std::size_t c) {
    ChunkResult& out = chunks[c];
    const std::size_t lo = c * kChunk, hi = std::min(n_paths, lo + kChunk);
    for (std::size_t k = lo; k < hi; ++k) {
      std::size_t sample = 0;
      EventCounts ev;
      try {
        ev = simulate_into(cs, x0, T, ctl, root.substream(k), [&](double t, const ChamberPoint& x, const PolyPoint*) {
          if (sample == out.acc.size()) {
            out.acc.emplace_back();
            out.acc.back().x.resize(static_cast<std::size_t>(p));
            out.times.push_back(t);
          }
          TimeAcc& a = out.acc[sample++];
          const VectorXd& v = x.coords();
          for (int i = 0; i < p; ++i) a.x[static_cast<std::size_t>(i)].add(v[i]);
          a.e1.add(v.sum());
          a.R.add(v.squaredNorm());
          const double g = p >= 2 ? x.min_gap() : 0.0;
          a.gap.add(g);
          a.gap_min = std::min(a.gap_min, g);
          if (g > 0.0) ++a.positive;
          a.VN.add(vandermonde_squared(x));
        });
      } catch (const std::exception& e) {
        throw EnsembleError("path " + std::to_string(k) + ": " + e.what(), k);
      }
      out.events += ev;
      if (ev[EventKind::Clamped] > 0) ++out.clamp_paths;
    }
  };
  parallel_chunks(n_chunks, workers, run_chunk);

  ChunkResult total = std::move(chunks[0]);
  for (std::size_t c = 1; c < n_chunks; ++c) {
    for (std::size_t s = 0; s < total.acc.size(); ++s) total.acc[s].merge(chunks[c].acc[s]);
    total.events += chunks[c].events;
    total.clamp_paths += chunks[c].clamp_paths;
  }

  EnsembleStats st;
  st.p = p;
  st.n_paths = n_paths;
  st.times = total.times;
  st.events = total.events;
  st.paths_with_clamp = total.clamp_paths;
  for (const auto& a : total.acc) {
    std::vector<Moments> xm;
    for (const auto& xi : a.x) xm.push_back(xi.moments());
    st.x.push_back(std::move(xm));
    st.e1.push_back(a.e1.moments());
    st.R.push_back(a.R.moments());
    st.min_gap.push_back(a.gap.moments());
    st.VN.push_back(a.VN.moments());
    st.min_gap_min.push_back(a.gap_min);
    st.positive_gap_fraction.push_back(static_cast<double>(a.positive) / static_cast<double>(n_paths));
  }
  return st;
}

std::vector<ChamberPoint> simulate_final_states(const CoefficientSet& cs, const ChamberPoint& x0, double T,
                                                const StepControl& ctl, std::size_t n_paths,
                                                std::uint64_t base_seed, unsigned workers) {
  ctl.validate();
  const NoisePath root(base_seed);
  constexpr std::size_t kChunk = 32;
  std::vector<ChamberPoint> out(n_paths);
  parallel_chunks((n_paths + kChunk - 1) / kChunk, workers, [&](std::size_t c) {
    for (std::size_t k = c * kChunk; k < std::min(n_paths, (c + 1) * kChunk); ++k) {
      try {
        simulate_into(cs, x0, T, ctl, root.substream(k),
                      [&](double, const ChamberPoint& x, const PolyPoint*) { out[k] = x; });
      } catch (const std::exception& e) {
        throw EnsembleError("path " + std::to_string(k) + ": " + e.what(), k);
      }
    }
  });
  return out;
}

}  // namespace ncps
