#include "ncps/conditions.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <tuple>

namespace ncps {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Refinement bands for best-fit constants: growth up to kStable is sampling
// noise, beyond kDiverging the constant is taken to be unbounded.
constexpr double kStable = 1.2;
constexpr double kDiverging = 1.5;

std::vector<double> grid(const Interval& box, int n) {
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) g[static_cast<std::size_t>(k)] = box.lo + (box.hi - box.lo) * k / (n - 1);
  return g;
}

double sq(double v) { return v * v; }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

Verdict worst(Verdict a, Verdict b) {
  if (a == Verdict::Fail || b == Verdict::Fail) return Verdict::Fail;
  if (a == Verdict::Unknown || b == Verdict::Unknown) return Verdict::Unknown;
  return Verdict::Pass;
}

bool integer_in(double v, int lo, int hi) { return v == std::floor(v) && v >= lo && v <= hi; }

// --- raw inequality residuals (positive = violated), without the c term ---

double a1_residual(const CoefficientSet& cs, int i, int j, double w, double x, double y, double z) {
  return cs.H(i, j, w, z) * (y - x) - cs.H(i, j, x, y) * (z - w);
}

double a2_residual(const CoefficientSet& cs, int i, int j, double x, double y) {
  return sq(cs.sigma(i, x)) + sq(cs.sigma(j, y)) - 4.0 * cs.H(i, j, x, y);
}

double a3_residual(const CoefficientSet& cs, int i, int j, int k, double x, double y, double z) {
  return cs.H(i, j, x, y) * (y - x) + cs.H(j, k, y, z) * (z - y) - cs.H(i, k, x, z) * (z - x);
}

double a3_weight(double x, double y, double z) { return (z - y) * (z - x) * (y - x); }

// Aggregate drift of the particles k..l sitting at x, with the others at y.
double a4_sum(const CoefficientSet& cs, int k, int l, double x, const std::vector<double>& y) {
  const int p = cs.size();
  std::vector<int> others;
  for (int m = 0; m < p; ++m)
    if (m != k && m != l) others.push_back(m);
  double total = 0.0;
  for (int i = k; i <= l; ++i) {
    double acc = cs.drift(i, x);
    for (std::size_t s = 0; s < others.size() && s < y.size(); ++s) {
      const int j = others[s];
      if (j == i || y[s] == x) continue;
      acc += cs.H(i, j, x, y[s]) / (x - y[s]);
    }
    total += acc;
  }
  return total;
}

// Pairs (i, j) grouped by the descriptor of whatever the caller keys them on.
template <typename Key>
std::vector<std::pair<int, int>> representatives(const CoefficientSet& cs, bool ordered, Key key) {
  std::vector<std::pair<int, int>> reps;
  std::set<std::string> seen;
  const int p = cs.size();
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      if (i == j || (!ordered && j < i)) continue;
      if (seen.insert(key(i, j)).second) reps.emplace_back(i, j);
    }
  return reps;
}

std::string kernel_key(const CoefficientSet& cs, int i, int j) {
  return i < j ? cs.kernel(i, j).descriptor + "|ij" : cs.kernel(j, i).descriptor + "|ji";
}

ConditionResult pass_result(Method m, std::string note = {}, std::optional<double> c = std::nullopt) {
  ConditionResult r;
  r.verdict = Verdict::Pass;
  r.method = m;
  r.note = std::move(note);
  r.constant = c;
  return r;
}

ConditionResult fail_result(Method m, Witness w, std::string note = {}) {
  ConditionResult r;
  r.verdict = Verdict::Fail;
  r.method = m;
  r.note = std::move(note);
  r.witnesses.push_back(std::move(w));
  return r;
}

Witness make_witness(const CoefficientSet& cs, ConditionId id, std::vector<int> idx, std::vector<double> pt,
                     double c, std::string description) {
  Witness w{id, std::move(idx), std::move(pt), c, 0.0, std::move(description)};
  w.violation = reevaluate(cs, w);
  return w;
}

// --- sampled checks ---

struct BestFit {
  double c = 0.0;         // smallest c making every sampled inequality hold within tol
  double free_viol = -kInf;  // largest violation where the c term vanishes
  Witness free_witness{};
  Witness c_witness{};    // argmax of the required c
};

BestFit fit_a2(const CoefficientSet& cs, const std::vector<std::pair<int, int>>& reps, const std::vector<double>& g,
               double tol) {
  BestFit f;
  for (auto [i, j] : reps)
    for (double x : g)
      for (double y : g) {
        const double r = a2_residual(cs, i, j, x, y);
        if (x == y) {
          if (r > f.free_viol) {
            f.free_viol = r;
            f.free_witness = Witness{ConditionId::A2, {i, j}, {x, y}, 0.0, r, {}};
          }
          continue;
        }
        const double need = (r - tol) / sq(x - y);
        if (need > f.c) {
          f.c = need;
          f.c_witness = Witness{ConditionId::A2, {i, j}, {x, y}, 0.0, 0.0, {}};
        }
      }
  return f;
}

BestFit fit_a3(const CoefficientSet& cs, const std::vector<std::tuple<int, int, int>>& reps,
               const std::vector<double>& g, double tol) {
  BestFit f;
  const std::size_t n = g.size();
  for (auto [i, j, k] : reps)
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b)
        for (std::size_t c = b + 1; c < n; ++c) {
          const double x = g[a], y = g[b], z = g[c];
          const double need = (a3_residual(cs, i, j, k, x, y, z) - tol) / a3_weight(x, y, z);
          if (need > f.c) {
            f.c = need;
            f.c_witness = Witness{ConditionId::A3, {i, j, k}, {x, y, z}, 0.0, 0.0, {}};
          }
        }
  return f;
}

// Verdict for a best-fit constant from a coarse grid and its refinement.
template <typename Fit>
ConditionResult constant_verdict(const CoefficientSet& cs, ConditionId id, Fit fit, int grid_n, const Interval& box,
                                 double tol) {
  const BestFit coarse = fit(grid(box, grid_n));
  if (coarse.free_viol > tol) {
    Witness w = coarse.free_witness;
    w.description = "violated independently of c";
    w.violation = reevaluate(cs, w);
    return fail_result(Method::Sampled, w);
  }
  const BestFit fine = fit(grid(box, 2 * grid_n - 1));
  if (fine.free_viol > tol) {
    Witness w = fine.free_witness;
    w.description = "violated independently of c";
    w.violation = reevaluate(cs, w);
    return fail_result(Method::Sampled, w);
  }
  if (!std::isfinite(fine.c)) {
    Witness w = fine.c_witness;
    w.constant = coarse.c;
    w.description = "required constant is not finite";
    w.violation = reevaluate(cs, w);
    return fail_result(Method::Sampled, w);
  }
  if (fine.c <= kStable * coarse.c + tol) {
    ConditionResult r = pass_result(Method::Sampled, "best-fit c stable under grid refinement", fine.c);
    return r;
  }
  if (fine.c > kDiverging * coarse.c + tol) {
    Witness w = fine.c_witness;
    w.constant = coarse.c;
    w.description = "required c grows under refinement (" + fmt(coarse.c) + " -> " + fmt(fine.c) + ")";
    w.violation = reevaluate(cs, w);
    ConditionResult r = fail_result(Method::Sampled, w, "best-fit constant appears unbounded");
    r.constant = fine.c;
    return r;
  }
  ConditionResult r;
  r.verdict = Verdict::Unknown;
  r.method = Method::Sampled;
  r.constant = fine.c;
  r.note = "best-fit c grew from " + fmt(coarse.c) + " to " + fmt(fine.c) + " under refinement";
  (void)id;
  return r;
}

ConditionResult sampled_a1(const CoefficientSet& cs, const std::vector<double>& g, double tol) {
  const auto reps = representatives(cs, true, [&](int i, int j) { return kernel_key(cs, i, j); });
  double worst_v = -kInf;
  Witness wit{};
  const std::size_t n = g.size();
  for (auto [i, j] : reps)
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b)
        for (std::size_t c = b + 1; c < n; ++c)
          for (std::size_t d = c + 1; d < n; ++d) {
            const double v = a1_residual(cs, i, j, g[a], g[b], g[c], g[d]);
            if (v > worst_v) {
              worst_v = v;
              wit = Witness{ConditionId::A1, {i, j}, {g[a], g[b], g[c], g[d]}, 0.0, v, {}};
            }
          }
  if (worst_v > tol) {
    wit.description = "H(w,z)(y-x) exceeds H(x,y)(z-w)";
    wit.violation = reevaluate(cs, wit);
    return fail_result(Method::Sampled, wit);
  }
  return pass_result(Method::Sampled, "holds on the sampled 4-tuples");
}

ConditionResult sampled_a5(const CoefficientSet& cs, const std::vector<double>& g, double tol) {
  const int p = cs.size();
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j) {
      if (cs.drift_field(i).descriptor == cs.drift_field(j).descriptor) continue;
      for (double x : g) {
        const double v = cs.drift(i, x) - cs.drift(j, x);
        if (v > tol) {
          Witness w{ConditionId::A5, {i, j}, {x}, 0.0, v, "b_i(x) > b_j(x)"};
          w.violation = reevaluate(cs, w);
          return fail_result(Method::Sampled, w);
        }
      }
    }
  return pass_result(Method::Sampled);
}

ConditionResult sampled_symmetry(const CoefficientSet& cs, const std::vector<double>& g, double tol) {
  const int p = cs.size();
  std::set<std::string> seen;
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j) {
      if (!seen.insert(cs.kernel(i, j).descriptor).second) continue;
      for (double x : g)
        for (double y : g) {
          Witness w{ConditionId::Symmetry, {i, j}, {x, y}, 0.0, 0.0, {}};
          const double v = reevaluate(cs, w);
          if (v > tol) {
            w.violation = v;
            w.description = "kernel is asymmetric or negative";
            return fail_result(Method::Sampled, w);
          }
        }
    }
  return pass_result(Method::Sampled);
}

ConditionResult sampled_c1(const CoefficientSet& cs, const std::vector<double>& g) {
  double lip = 0.0, hold = 0.0;
  const int p = cs.size();
  for (int i = 0; i < p; ++i)
    for (std::size_t a = 0; a < g.size(); ++a)
      for (std::size_t b = a + 1; b < g.size(); ++b) {
        const double h = g[b] - g[a];
        lip = std::max(lip, std::abs(cs.drift(i, g[b]) - cs.drift(i, g[a])) / h);
        hold = std::max(hold, std::abs(cs.sigma(i, g[b]) - cs.sigma(i, g[a])) / std::sqrt(h));
      }
  return pass_result(Method::Sampled,
                     "estimated Lipschitz constant of b " + fmt(lip) + ", Hoelder-1/2 constant of sigma " + fmt(hold),
                     std::max(lip, hold));
}

ConditionResult sampled_c2(const CoefficientSet& cs, const std::vector<double>& g) {
  const int p = cs.size();
  double c1 = 0.0, c2 = 0.0;
  for (int i = 0; i < p; ++i)
    for (double x : g) {
      const double v = (sq(cs.sigma(i, x)) + cs.drift(i, x) * x) / (1.0 + x * x);
      if (!std::isfinite(v)) {
        Witness w{ConditionId::C2, {i}, {x}, 0.0, kInf, "non-finite coefficient"};
        return fail_result(Method::Sampled, w);
      }
      c1 = std::max(c1, v);
    }
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j)
      for (double x : g)
        for (double y : g) {
          const double v = cs.H(i, j, x, y) / (1.0 + x * x + y * y);
          if (!std::isfinite(v)) {
            Witness w{ConditionId::C2, {i, j}, {x, y}, 0.0, kInf, "non-finite kernel"};
            return fail_result(Method::Sampled, w);
          }
          c2 = std::max(c2, v);
        }
  return pass_result(Method::Sampled,
                     "growth constants: sigma^2 + b x <= " + fmt(c1) + " (1 + x^2), H <= " + fmt(c2) +
                         " (1 + x^2 + y^2) on the box",
                     std::max(c1, c2));
}

// --- closed forms shared by check_preset and check_numeric ---

Witness a4_witness(const CoefficientSet& cs, double x, double other, int n_other) {
  const int p = cs.size();
  std::vector<double> pt{x};
  for (int s = 0; s < p - 2; ++s) pt.push_back(s < n_other ? other : x);
  return make_witness(cs, ConditionId::A4, {0, 1}, pt, 0.0,
                      "aggregate drift of the degenerate cluster vanishes with " + std::to_string(n_other) +
                          " particle(s) away from " + fmt(x));
}

std::optional<ConditionResult> closed_form_a4(const CoefficientSet& cs) {
  if (!cs.preset()) return std::nullopt;
  const int p = cs.size();
  struct V {
    const CoefficientSet& cs;
    int p;
    std::optional<ConditionResult> operator()(const BetaWishart& d) const { return at_zero(d.alpha); }
    std::optional<ConditionResult> operator()(const BetaWishartAbs& d) const { return at_zero(d.alpha); }
    std::optional<ConditionResult> operator()(const Jacobi& d) const {
      if (integer_in(d.q, 0, p - 2))
        return fail_result(Method::ClosedForm, a4_witness(cs, 0.0, 0.5, static_cast<int>(d.q)),
                           "degenerate set {0,1}; q is an integer in {0,...,p-2}");
      if (integer_in(d.r, 0, p - 2))
        return fail_result(Method::ClosedForm, a4_witness(cs, 1.0, 0.5, static_cast<int>(d.r)),
                           "degenerate set {0,1}; r is an integer in {0,...,p-2}");
      return pass_result(Method::ClosedForm, "degenerate set {0,1}; q, r not in {0,...,p-2}");
    }
    std::optional<ConditionResult> operator()(const DysonCepa&) const { return empty(); }
    std::optional<ConditionResult> operator()(const NearestNeighbor&) const { return empty(); }
    std::optional<ConditionResult> operator()(const Hyperbolic&) const { return empty(); }
    std::optional<ConditionResult> operator()(const GeneralPsi&) const { return std::nullopt; }

    ConditionResult at_zero(double alpha) const {
      if (integer_in(alpha, 0, p - 2))
        return fail_result(Method::ClosedForm, a4_witness(cs, 0.0, 1.0, static_cast<int>(alpha)),
                           "degenerate set {0}; alpha is an integer in {0,...,p-2}");
      return pass_result(Method::ClosedForm, "degenerate set {0}; alpha not in {0,...,p-2}");
    }
    static ConditionResult empty() { return pass_result(Method::ClosedForm, "degenerate set is empty"); }
  };
  if (p < 2) return pass_result(Method::ClosedForm, "single particle");
  return std::visit(V{cs, p}, *cs.preset());
}

std::optional<ConditionResult> closed_form_domain(const CoefficientSet& cs) {
  if (!cs.preset()) return std::nullopt;
  const int p = cs.size();
  std::optional<double> value;
  std::string what;
  if (const auto* w = std::get_if<BetaWishart>(&*cs.preset())) {
    value = w->alpha;
    what = "alpha";
  } else if (const auto* j = std::get_if<Jacobi>(&*cs.preset())) {
    value = std::min(j->q, j->r);
    what = "min(q,r)";
  }
  if (!value) return std::nullopt;
  if (*value >= p - 1) return pass_result(Method::ClosedForm, what + " >= p-1 keeps the particles in the state space");
  const Witness w = make_witness(cs, ConditionId::Domain, {}, {*value}, 0.0, what + " < p-1");
  return fail_result(Method::ClosedForm, w, "the state-space corollary needs " + what + " >= p-1");
}

ConditionResult diagonal_a2(const CoefficientSet& cs, bool holds, int i, int j, double x) {
  if (holds) return pass_result(Method::ClosedForm, {}, 0.0);
  return fail_result(Method::ClosedForm,
                     make_witness(cs, ConditionId::A2, {i, j}, {x, x}, 0.0,
                                  "sigma_i^2 + sigma_j^2 exceeds 4H on the diagonal for every c"));
}

void finalize(ConditionReport& r) {
  Verdict v = Verdict::Pass;
  for (const auto& [id, res] : r.conditions) v = worst(v, res.verdict);
  r.overall = v;
}

const char* kC2Note =
    "the growth bound is checked as H <= c(1 + x^2 + y^2) (what the non-explosion argument uses); "
    "the literal H <= c(1 + |xy|) fails for linearly growing kernels";

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass:
      return "pass";
    case Verdict::Fail:
      return "fail";
    case Verdict::Unknown:
      return "unknown";
  }
  return "unknown";
}

std::string to_string(ConditionId id) {
  switch (id) {
    case ConditionId::C1:
      return "C1";
    case ConditionId::C2:
      return "C2";
    case ConditionId::A1:
      return "A1";
    case ConditionId::A2:
      return "A2";
    case ConditionId::A3:
      return "A3";
    case ConditionId::A4:
      return "A4";
    case ConditionId::A5:
      return "A5";
    case ConditionId::Symmetry:
      return "symmetry";
    case ConditionId::Domain:
      return "domain";
  }
  return "?";
}

std::string to_string(Method m) { return m == Method::ClosedForm ? "closed_form" : "sampled"; }

Verdict ConditionReport::verdict(ConditionId id) const {
  const auto it = conditions.find(id);
  return it == conditions.end() ? Verdict::Unknown : it->second.verdict;
}

Method ConditionReport::method() const {
  for (const auto& [id, res] : conditions)
    if (res.method == Method::Sampled) return Method::Sampled;
  return Method::ClosedForm;
}

double reevaluate(const CoefficientSet& cs, const Witness& w) {
  const auto& x = w.point;
  const auto& k = w.indices;
  switch (w.id) {
    case ConditionId::A1:
      return a1_residual(cs, k.at(0), k.at(1), x.at(0), x.at(1), x.at(2), x.at(3));
    case ConditionId::A2:
      return a2_residual(cs, k.at(0), k.at(1), x.at(0), x.at(1)) - w.constant * sq(x.at(0) - x.at(1));
    case ConditionId::A3:
      return a3_residual(cs, k.at(0), k.at(1), k.at(2), x.at(0), x.at(1), x.at(2)) -
             w.constant * a3_weight(x.at(0), x.at(1), x.at(2));
    case ConditionId::A4: {
      const std::vector<double> ys(x.begin() + 1, x.end());
      const double s = a4_sum(cs, k.at(0), k.at(1), x.at(0), ys);
      return std::abs(s) <= 1e-12 * (1.0 + std::abs(cs.drift(k.at(0), x.at(0)))) ? 1.0 : -std::abs(s);
    }
    case ConditionId::A5:
      return cs.drift(k.at(0), x.at(0)) - cs.drift(k.at(1), x.at(0));
    case ConditionId::C2:
      if (k.size() == 1)
        return sq(cs.sigma(k[0], x.at(0))) + cs.drift(k[0], x.at(0)) * x.at(0) - w.constant * (1.0 + sq(x.at(0)));
      return cs.H(k.at(0), k.at(1), x.at(0), x.at(1)) - w.constant * (1.0 + sq(x.at(0)) + sq(x.at(1)));
    case ConditionId::Symmetry: {
      const auto& ker = cs.kernel(k.at(0), k.at(1));
      const double hxy = ker(x.at(0), x.at(1)), hyx = ker(x.at(1), x.at(0));
      return std::max(std::abs(hxy - hyx), -std::min(hxy, hyx));
    }
    case ConditionId::Domain: {
      if (!cs.preset()) return -kInf;
      const int p = cs.size();
      if (const auto* b = std::get_if<BetaWishart>(&*cs.preset())) return (p - 1) - b->alpha;
      if (const auto* j = std::get_if<Jacobi>(&*cs.preset())) return (p - 1) - std::min(j->q, j->r);
      return -kInf;
    }
    case ConditionId::C1:
      return -kInf;
  }
  return -kInf;
}

int exit_code(Verdict v) {
  switch (v) {
    case Verdict::Pass:
      return 0;
    case Verdict::Fail:
      return 1;
    case Verdict::Unknown:
      return 2;
  }
  return 2;
}

double nearest_neighbor_conjecture(int p) {
  double s1 = 0.0, s2 = 0.0;
  for (int i = 1; i <= p - 1; ++i) {
    s1 += 1.0 / i;
    s2 += 1.0 / (static_cast<double>(i) * i);
  }
  return 0.5 * p * s2 / s1 - 0.5;
}

Interval natural_box(const CoefficientSet& cs) {
  if (cs.preset()) {
    if (std::holds_alternative<BetaWishart>(*cs.preset())) return {0.0, 8.0};
    if (std::holds_alternative<BetaWishartAbs>(*cs.preset())) return {-8.0, 8.0};
    if (std::holds_alternative<Jacobi>(*cs.preset())) return {0.0, 1.0};
    return {-4.0, 4.0};
  }
  switch (cs.domain()) {
    case Domain::Real:
      return {-4.0, 4.0};
    case Domain::HalfLine:
      return {0.0, 8.0};
    case Domain::UnitInterval:
      return {0.0, 1.0};
  }
  return {-4.0, 4.0};
}

DegenerateSet degenerate_points(const CoefficientSet& cs, const Interval& box, int grid_n) {
  DegenerateSet out;
  if (cs.preset() && !std::holds_alternative<GeneralPsi>(*cs.preset())) {
    out.method = Method::ClosedForm;
    const auto& pr = *cs.preset();
    if (std::holds_alternative<BetaWishart>(pr) || std::holds_alternative<BetaWishartAbs>(pr)) {
      if (box.contains(0.0)) out.points = {0.0};
    } else if (std::holds_alternative<Jacobi>(pr)) {
      for (double v : {0.0, 1.0})
        if (box.contains(v)) out.points.push_back(v);
    }
    return out;
  }
  out.method = Method::Sampled;
  const int p = cs.size();
  if (p < 2) return out;
  const auto g = grid(box, std::max(grid_n, 4));
  std::vector<double> val(g.size());
  for (std::size_t a = 0; a < g.size(); ++a) {
    double m = kInf;
    for (int i = 0; i < p; ++i)
      for (int j = i + 1; j < p; ++j)
        m = std::min(m, sq(cs.sigma(i, g[a])) + sq(cs.sigma(j, g[a])) + cs.H(i, j, g[a], g[a]));
    val[a] = m;
  }
  const double zero_tol = 1e-12;
  for (std::size_t a = 0; a < g.size(); ++a) {
    const bool zero = std::abs(val[a]) <= zero_tol;
    const bool local_min = (a == 0 || val[a] <= val[a - 1]) && (a + 1 == g.size() || val[a] < val[a + 1]);
    if (zero && local_min) out.points.push_back(g[a]);
    if (a + 1 < g.size() && val[a] * val[a + 1] < 0.0) {
      // Sign change: bisect for the crossing.
      double lo = g[a], hi = g[a + 1];
      auto f = [&](double x) {
        double m = kInf;
        for (int i = 0; i < p; ++i)
          for (int j = i + 1; j < p; ++j) m = std::min(m, sq(cs.sigma(i, x)) + sq(cs.sigma(j, x)) + cs.H(i, j, x, x));
        return m;
      };
      const double flo = f(lo);
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((f(mid) < 0.0) == (flo < 0.0))
          lo = mid;
        else
          hi = mid;
      }
      out.points.push_back(0.5 * (lo + hi));
    }
  }
  return out;
}

ConditionReport check_numeric(const CoefficientSet& cs, const Interval& box, int grid_n, double tol) {
  if (grid_n < 4) throw std::invalid_argument("check_numeric: grid_n must be at least 4");
  if (!(std::isfinite(box.lo) && std::isfinite(box.hi) && box.lo < box.hi))
    throw std::invalid_argument("check_numeric: box must be finite and non-degenerate");
  if (!domain_interval(cs.domain()).contains(box))
    throw std::invalid_argument("check_numeric: box [" + fmt(box.lo) + ", " + fmt(box.hi) +
                                "] leaves the state space " + to_string(cs.domain()));

  ConditionReport r;
  r.route = "sampled";
  r.tol = tol;
  const auto g = grid(box, grid_n);
  const int p = cs.size();

  r.conditions[ConditionId::C1] = sampled_c1(cs, g);
  r.conditions[ConditionId::C2] = sampled_c2(cs, g);
  r.conditions[ConditionId::Symmetry] = sampled_symmetry(cs, g, tol);
  r.conditions[ConditionId::A5] = sampled_a5(cs, g, tol);

  if (p < 2) {
    for (auto id : {ConditionId::A1, ConditionId::A2, ConditionId::A3, ConditionId::A4})
      r.conditions[id] = pass_result(Method::Sampled, "single particle");
    finalize(r);
    return r;
  }

  r.conditions[ConditionId::A1] = sampled_a1(cs, g, tol);

  const auto a2_reps = representatives(cs, true, [&](int i, int j) {
    return cs.sigma_field(i).descriptor + "|" + cs.sigma_field(j).descriptor + "|" + kernel_key(cs, i, j);
  });
  r.conditions[ConditionId::A2] = constant_verdict(
      cs, ConditionId::A2, [&](const std::vector<double>& gg) { return fit_a2(cs, a2_reps, gg, tol); }, grid_n,
      box, tol);

  if (p >= 3) {
    std::vector<std::tuple<int, int, int>> a3_reps;
    std::set<std::string> seen;
    for (int i = 0; i < p; ++i)
      for (int j = i + 1; j < p; ++j)
        for (int k = j + 1; k < p; ++k)
          if (seen.insert(cs.kernel(i, j).descriptor + "|" + cs.kernel(j, k).descriptor + "|" +
                          cs.kernel(i, k).descriptor)
                  .second)
            a3_reps.emplace_back(i, j, k);
    r.conditions[ConditionId::A3] = constant_verdict(
        cs, ConditionId::A3, [&](const std::vector<double>& gg) { return fit_a3(cs, a3_reps, gg, tol); }, grid_n,
        box, tol);
  } else {
    r.conditions[ConditionId::A3] = pass_result(Method::Sampled, "no triples for p = 2", 0.0);
  }

  if (auto a4 = closed_form_a4(cs)) {
    r.conditions[ConditionId::A4] = *a4;
  } else {
    const DegenerateSet deg = degenerate_points(cs, box);
    if (deg.points.empty()) {
      r.conditions[ConditionId::A4] = pass_result(Method::Sampled, "no degenerate points found on the box");
    } else {
      ConditionResult u;
      u.verdict = Verdict::Unknown;
      u.method = Method::Sampled;
      std::string pts;
      for (double v : deg.points) pts += (pts.empty() ? "" : ", ") + fmt(v);
      u.note = "degenerate points {" + pts + "}; the quantified drift condition has no sampled certificate";
      r.conditions[ConditionId::A4] = u;
    }
  }
  if (auto dom = closed_form_domain(cs)) r.conditions[ConditionId::Domain] = *dom;

  finalize(r);
  return r;
}

namespace {

/// Samples the bounds u psi(u) >= gamma and sigma^2 <= 2 gamma; for information only.
std::string psi_gamma_note(const CoefficientSet& cs, double gamma) {
  const Interval box = natural_box(cs);
  double min_h = kInf, max_s2 = 0.0;
  for (double u : grid(Interval{box.width() / 256, box.width()}, 256)) min_h = std::min(min_h, cs.H(0, 1, u, 0.0));
  for (double x : grid(box, 64))
    for (int i = 0; i < cs.size(); ++i) max_s2 = std::max(max_s2, sq(cs.sigma(i, x)));
  const bool ok = gamma > 0.0 && min_h >= gamma && max_s2 <= 2.0 * gamma;
  return "sampled u psi(u) >= " + fmt(min_h) + " and sigma^2 <= " + fmt(max_s2) + (ok ? " satisfy" : " violate") +
         " the bounds u psi(u) >= gamma, sigma^2 <= 2 gamma for gamma = " + fmt(gamma);
}

}  // namespace

ConditionReport check_preset(const CoefficientSet& cs) {
  if (!cs.preset() || std::holds_alternative<GeneralPsi>(*cs.preset())) {
    ConditionReport r = check_numeric(cs, natural_box(cs));
    r.notes.push_back("no closed-form predicate for this system; verdicts are sampled over the natural box");
    if (cs.preset()) r.notes.push_back(psi_gamma_note(cs, std::get<GeneralPsi>(*cs.preset()).gamma));
    return r;
  }

  ConditionReport r;
  r.route = "theorem";
  r.tol = 0.0;
  const int p = cs.size();
  const auto& pr = *cs.preset();
  const auto cf = Method::ClosedForm;

  auto uniform_pass = [&](std::initializer_list<ConditionId> ids) {
    for (auto id : ids) r.conditions[id] = pass_result(cf);
  };
  uniform_pass({ConditionId::A1, ConditionId::A3, ConditionId::A5, ConditionId::Symmetry});

  double holder = 0.0, lip = 0.0;
  for (int i = 0; i < p; ++i) {
    if (const auto& m = cs.sigma_field(i).modulus_hint) holder = std::max(holder, m->constant);
    if (const auto& m = cs.drift_field(i).modulus_hint) lip = std::max(lip, m->constant);
  }
  r.conditions[ConditionId::C1] = pass_result(
      cf, "sigma Hoelder-1/2 with constant " + fmt(holder) + ", b Lipschitz with constant " + fmt(lip), holder);
  r.conditions[ConditionId::C2] = pass_result(cf, kC2Note);

  if (p >= 2) {
    if (const auto* d = std::get_if<DysonCepa>(&pr)) {
      r.conditions[ConditionId::A2] = diagonal_a2(cs, 2.0 <= 4.0 * d->gamma, 0, 1, 0.0);
    } else if (const auto* d = std::get_if<Hyperbolic>(&pr)) {
      r.conditions[ConditionId::A2] = diagonal_a2(cs, 2.0 <= 4.0 * d->gamma, 0, 1, 0.0);
    } else if (const auto* d = std::get_if<BetaWishart>(&pr)) {
      r.conditions[ConditionId::A2] = diagonal_a2(cs, d->beta >= 1.0, 0, 1, 1.0);
    } else if (const auto* d = std::get_if<BetaWishartAbs>(&pr)) {
      r.conditions[ConditionId::A2] = diagonal_a2(cs, d->beta >= 1.0, 0, 1, 1.0);
    } else if (const auto* d = std::get_if<Jacobi>(&pr)) {
      r.conditions[ConditionId::A2] = diagonal_a2(cs, d->beta >= 1.0, 0, 1, 0.5);
    } else if (const auto* d = std::get_if<NearestNeighbor>(&pr)) {
      if (p == 2) {
        r.conditions[ConditionId::A2] = diagonal_a2(cs, 2.0 <= 4.0 * d->gamma, 0, 1, 0.0);
      } else {
        // Non-adjacent pairs carry no repulsion, so (A2) and (A3) fail for every c.
        const int j = 2.0 <= 4.0 * d->gamma ? 2 : 1;
        r.conditions[ConditionId::A2] = diagonal_a2(cs, false, 0, j, 0.0);
        const double e = 1e-3;
        r.conditions[ConditionId::A3] =
            fail_result(cf,
                        make_witness(cs, ConditionId::A3, {0, 1, 2}, {0.0, e, 2.0 * e}, 1.0,
                                     "H_13 = 0; the inequality fails for every c on small enough triples"));
      }
    }
  } else {
    r.conditions[ConditionId::A2] = pass_result(cf, "single particle");
  }

  if (auto a4 = closed_form_a4(cs)) r.conditions[ConditionId::A4] = *a4;
  if (auto dom = closed_form_domain(cs)) r.conditions[ConditionId::Domain] = *dom;
  finalize(r);

  if (const auto* d = std::get_if<NearestNeighbor>(&pr); d && p >= 3) {
    if (p == 3) {
      r.route = "corollary";
      r.overall = d->gamma >= 0.75 ? Verdict::Pass : Verdict::Fail;
      r.notes.push_back(
          "(A2) and (A3) fail literally; non-collision follows from the three-particle corollary iff gamma >= 3/4 "
          "and |sigma| <= 1");
    } else {
      r.route = "conjecture";
      r.overall = Verdict::Unknown;
      r.conjectured_threshold = nearest_neighbor_conjecture(p);
      r.notes.push_back("no proven criterion for p >= 4; conjectured threshold gamma >= " +
                        fmt(*r.conjectured_threshold) + " reported for information only");
    }
  }
  return r;
}

}  // namespace ncps
