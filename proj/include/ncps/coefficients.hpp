#pragma once

#include "ncps/expression.hpp"
#include "ncps/types.hpp"

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace ncps {

/// State space of a particle system.
enum class Domain { Real, HalfLine, UnitInterval };

struct Interval {
  double lo;
  double hi;

  bool contains(double x) const { return x >= lo && x <= hi; }
  bool contains(const Interval& other) const { return other.lo >= lo && other.hi <= hi; }
  double width() const { return hi - lo; }
};

Interval domain_interval(Domain d);
std::string to_string(Domain d);

/// Continuity modulus advertised by a field: a Lipschitz constant, or the
/// constant of a Hölder-1/2 bound |f(x)-f(y)| <= c sqrt|x-y|.
struct Modulus {
  enum class Kind { Lipschitz, Holder12 };
  Kind kind;
  double constant;
};

struct ScalarField {
  std::function<double(double)> eval;
  std::string descriptor;
  std::optional<Modulus> modulus_hint;

  double operator()(double x) const { return eval(x); }

  static ScalarField constant(double c);
  static ScalarField from_expression(const Expression& expr);
};

/// Pairwise repulsion strength H(x, y) >= 0, symmetric in its arguments.
struct InteractionKernel {
  std::function<double(double, double)> eval;
  std::string descriptor;
  bool identically_zero = false;

  double operator()(double x, double y) const { return eval(x, y); }

  static InteractionKernel constant(double c);
  static InteractionKernel from_expression(const Expression& expr);
};

// Preset families. Parameters are stored exactly as given; whether they satisfy
// the non-collision hypotheses is decided by the conditions module.
struct DysonCepa {
  double gamma;
};
struct NearestNeighbor {
  double gamma;
};
struct BetaWishart {
  double alpha;
  double beta;
};
struct BetaWishartAbs {
  double alpha;
  double beta;
};
struct Jacobi {
  double q;
  double r;
  double beta;
};
struct Hyperbolic {
  double gamma;
};
/// Drift sum_j psi(x_i - x_j) for an odd psi given in the expression grammar over `u`.
struct GeneralPsi {
  std::string psi;
  double gamma;
};

using PresetParams =
    std::variant<DysonCepa, NearestNeighbor, BetaWishart, BetaWishartAbs, Jacobi, Hyperbolic, GeneralPsi>;

std::string preset_name(const PresetParams& params);

/// The triple (sigma_i, b_i, H_ij) of a p-particle system
///
///     dx_i = sigma_i(x_i) dB_i + (b_i(x_i) + sum_{j != i} H_ij(x_i, x_j) / (x_i - x_j)) dt.
///
/// Only kernels with i < j are stored; H_ji(y, x) resolves to H_ij(x, y).
/// Immutable after construction and safe to share between threads.
class CoefficientSet {
 public:
  CoefficientSet(int p, std::vector<ScalarField> sigma, std::vector<ScalarField> b,
                 std::vector<InteractionKernel> upper_kernels, Domain domain,
                 std::optional<PresetParams> preset = std::nullopt);

  int size() const { return p_; }
  Domain domain() const { return domain_; }
  const std::optional<PresetParams>& preset() const { return preset_; }

  double sigma(int i, double x) const { return sigma_[static_cast<std::size_t>(i)](x); }
  double drift(int i, double x) const { return b_[static_cast<std::size_t>(i)](x); }
  double H(int i, int j, double xi, double xj) const {
    return i < j ? kernel(i, j)(xi, xj) : kernel(j, i)(xj, xi);
  }

  const ScalarField& sigma_field(int i) const { return sigma_[static_cast<std::size_t>(i)]; }
  const ScalarField& drift_field(int i) const { return b_[static_cast<std::size_t>(i)]; }
  /// Kernel of the pair (i, j); requires i < j.
  const InteractionKernel& kernel(int i, int j) const;
  bool kernel_active(int i, int j) const {
    return !(i < j ? kernel(i, j) : kernel(j, i)).identically_zero;
  }

  /// True when every sigma_i, every b_i and every H_ij share one descriptor.
  bool uniform() const;

 private:
  std::size_t pair_index(int i, int j) const;

  int p_;
  std::vector<ScalarField> sigma_;
  std::vector<ScalarField> b_;
  std::vector<InteractionKernel> kernels_;
  Domain domain_;
  std::optional<PresetParams> preset_;
};

/// Coefficients of a named preset family.
///
/// Throws std::invalid_argument for p < 1 or non-finite parameters, and
/// ExpressionError for a malformed GeneralPsi descriptor.
CoefficientSet build_preset(const PresetParams& params, int p);

/// Identical coefficients for every particle from expression-grammar sources:
/// sigma and b over `x`, H over `x, y`.
CoefficientSet build_custom(int p, const std::string& sigma, const std::string& b,
                            const std::string& H, Domain domain);

/// |x_i - x_j| below this is treated as a collision by the singular drift.
bool gap_is_singular(double xi, double xj);

/// b_i(x_i) + sum_{j != i} H_ij(x_i, x_j) / (x_i - x_j).
double singular_drift(const CoefficientSet& cs, int i, const ChamberPoint& x);

}  // namespace ncps
