#pragma once

#include "ncps/coefficients.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ncps {

enum class Verdict { Pass, Fail, Unknown };
enum class ConditionId { C1, C2, A1, A2, A3, A4, A5, Symmetry, Domain };
enum class Method { ClosedForm, Sampled };

std::string to_string(Verdict v);
std::string to_string(ConditionId id);
std::string to_string(Method m);

/// A sampled point at which an inequality fails, in a form that can be re-evaluated.
///
/// Layout of `point` and `indices` per condition:
///   A1        indices (i, j),    point (w, x, y, z)
///   A2        indices (i, j),    point (x, y)
///   A3        indices (i, j, k), point (x, y, z)
///   A4        indices (k, l),    point (x, y_1, ..., y_{p-2}); the y_j fill the
///             slots of the particles other than k and l, in index order
///   A5        indices (i, j),    point (x)
///   C2        indices (i),       point (x) for the sigma/b bound;
///             indices (i, j),    point (x, y) for the H bound
///   Symmetry  indices (i, j),    point (x, y)
///   Domain    no indices,        point (parameter value)
struct Witness {
  ConditionId id;
  std::vector<int> indices;
  std::vector<double> point;
  double constant = 0.0;  // c entering the inequality (A2, A3, C2)
  double violation = 0.0;  // as computed when the witness was found
  std::string description;
};

/// Amount by which the witness violates its inequality; positive means violated.
/// For A4 this is 1 when the aggregate drift vanishes and -|drift| otherwise.
double reevaluate(const CoefficientSet& cs, const Witness& w);

struct ConditionResult {
  Verdict verdict = Verdict::Unknown;
  Method method = Method::ClosedForm;
  std::optional<double> constant;
  std::vector<Witness> witnesses;
  std::string note;
};

struct ConditionReport {
  std::map<ConditionId, ConditionResult> conditions;
  Verdict overall = Verdict::Unknown;
  /// How `overall` was reached: "theorem", "corollary", "conjecture" or "sampled".
  std::string route;
  /// Nearest-neighbour systems with p >= 4: the conjectured gamma threshold, for information only.
  std::optional<double> conjectured_threshold;
  std::vector<std::string> notes;
  double tol = 0.0;

  Verdict verdict(ConditionId id) const;
  /// ClosedForm only if every condition was decided in closed form.
  Method method() const;
};

/// Points x where min over pairs of sigma_i^2(x) + sigma_j^2(x) + H_ij(x, x) vanishes.
struct DegenerateSet {
  std::vector<double> points;
  Method method = Method::ClosedForm;
};

/// Exact verdicts for a preset-tagged system; custom systems and GeneralPsi
/// are delegated to check_numeric over their natural box.
ConditionReport check_preset(const CoefficientSet& cs);

/// Grid sampling of (A1)-(A5), (C1), (C2) and kernel symmetry over `box`.
/// Throws std::invalid_argument when grid_n < 4 or the box is degenerate or
/// leaves the state space.
ConditionReport check_numeric(const CoefficientSet& cs, const Interval& box, int grid_n = 32, double tol = 1e-9);

DegenerateSet degenerate_points(const CoefficientSet& cs, const Interval& box, int grid_n = 257);

/// Box used when a check does not specify one: [-4, 4] on the line, [0, 8]
/// for Wishart, [-8, 8] for the absolute-value variant, [0, 1] for Jacobi.
Interval natural_box(const CoefficientSet& cs);

/// 0 for pass, 1 for fail, 2 for unknown.
int exit_code(Verdict v);

/// (p/2) (sum_{i<p} 1/i^2) / (sum_{i<p} 1/i) - 1/2.
double nearest_neighbor_conjecture(int p);

}  // namespace ncps
