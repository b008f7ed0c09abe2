#include "ncps/coefficients.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace ncps {
namespace {

std::string fmt_param(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void require_finite(double v, const char* name) {
  if (!std::isfinite(v))
    throw std::invalid_argument(std::string("preset parameter '") + name + "' is not finite");
}

std::vector<InteractionKernel> uniform_kernels(int p, const InteractionKernel& k) {
  return std::vector<InteractionKernel>(static_cast<std::size_t>(p * (p - 1) / 2), k);
}

// gamma * u * coth(u), continuous through u = 0.
double hyperbolic_profile(double gamma, double u) {
  const double a = std::abs(u);
  if (a < 1e-4) {
    const double u2 = u * u;
    return gamma * (1.0 + u2 / 3.0 - u2 * u2 / 45.0);
  }
  return gamma * a / std::tanh(a);
}

}  // namespace

Interval domain_interval(Domain d) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (d) {
    case Domain::Real:
      return {-inf, inf};
    case Domain::HalfLine:
      return {0.0, inf};
    case Domain::UnitInterval:
      return {0.0, 1.0};
  }
  return {-inf, inf};
}

std::string to_string(Domain d) {
  switch (d) {
    case Domain::Real:
      return "real";
    case Domain::HalfLine:
      return "half_line";
    case Domain::UnitInterval:
      return "unit";
  }
  return "real";
}

ScalarField ScalarField::constant(double c) {
  return {[c](double) { return c; }, "const(" + fmt_param(c) + ")", Modulus{Modulus::Kind::Lipschitz, 0.0}};
}

ScalarField ScalarField::from_expression(const Expression& expr) {
  return {[expr](double x) { return expr(x); }, expr.source(), std::nullopt};
}

InteractionKernel InteractionKernel::constant(double c) {
  return {[c](double, double) { return c; }, "const(" + fmt_param(c) + ")", c == 0.0};
}

InteractionKernel InteractionKernel::from_expression(const Expression& expr) {
  return {[expr](double x, double y) { return expr(x, y); }, expr.source(), false};
}

std::string preset_name(const PresetParams& params) {
  struct Visitor {
    std::string operator()(const DysonCepa&) const { return "dyson"; }
    std::string operator()(const NearestNeighbor&) const { return "nearest_neighbor"; }
    std::string operator()(const BetaWishart&) const { return "beta_wishart"; }
    std::string operator()(const BetaWishartAbs&) const { return "beta_wishart_abs"; }
    std::string operator()(const Jacobi&) const { return "jacobi"; }
    std::string operator()(const Hyperbolic&) const { return "hyperbolic"; }
    std::string operator()(const GeneralPsi&) const { return "general_psi"; }
  };
  return std::visit(Visitor{}, params);
}

CoefficientSet::CoefficientSet(int p, std::vector<ScalarField> sigma, std::vector<ScalarField> b,
                               std::vector<InteractionKernel> upper_kernels, Domain domain,
                               std::optional<PresetParams> preset)
    : p_(p),
      sigma_(std::move(sigma)),
      b_(std::move(b)),
      kernels_(std::move(upper_kernels)),
      domain_(domain),
      preset_(std::move(preset)) {
  if (p_ < 1) throw std::invalid_argument("CoefficientSet: p must be at least 1");
  const auto np = static_cast<std::size_t>(p_);
  if (sigma_.size() != np || b_.size() != np)
    throw std::invalid_argument("CoefficientSet: need one sigma and one b per particle");
  if (kernels_.size() != np * (np - 1) / 2)
    throw std::invalid_argument("CoefficientSet: need p(p-1)/2 interaction kernels");
}

std::size_t CoefficientSet::pair_index(int i, int j) const {
  // Row-major over the strict upper triangle.
  return static_cast<std::size_t>(i * (2 * p_ - i - 1) / 2 + (j - i - 1));
}

const InteractionKernel& CoefficientSet::kernel(int i, int j) const {
  if (!(0 <= i && i < j && j < p_))
    throw std::out_of_range("CoefficientSet::kernel: need 0 <= i < j < p");
  return kernels_[pair_index(i, j)];
}

bool CoefficientSet::uniform() const {
  for (int i = 1; i < p_; ++i) {
    if (sigma_[static_cast<std::size_t>(i)].descriptor != sigma_[0].descriptor) return false;
    if (b_[static_cast<std::size_t>(i)].descriptor != b_[0].descriptor) return false;
  }
  for (const auto& k : kernels_)
    if (k.descriptor != kernels_.front().descriptor) return false;
  return true;
}

CoefficientSet build_preset(const PresetParams& params, int p) {
  if (p < 1) throw std::invalid_argument("build_preset: p must be at least 1");
  const auto np = static_cast<std::size_t>(p);

  struct Builder {
    int p;
    std::size_t np;

    CoefficientSet operator()(const DysonCepa& d) const {
      require_finite(d.gamma, "gamma");
      return CoefficientSet(p, std::vector(np, ScalarField::constant(1.0)),
                            std::vector(np, ScalarField::constant(0.0)),
                            uniform_kernels(p, InteractionKernel::constant(d.gamma)), Domain::Real, d);
    }

    CoefficientSet operator()(const NearestNeighbor& d) const {
      require_finite(d.gamma, "gamma");
      std::vector<InteractionKernel> kernels;
      for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j)
          kernels.push_back(InteractionKernel::constant(j == i + 1 ? d.gamma : 0.0));
      return CoefficientSet(p, std::vector(np, ScalarField::constant(1.0)),
                            std::vector(np, ScalarField::constant(0.0)), std::move(kernels), Domain::Real, d);
    }

    CoefficientSet operator()(const BetaWishart& d) const {
      require_finite(d.alpha, "alpha");
      require_finite(d.beta, "beta");
      const double beta = d.beta;
      ScalarField sigma{[](double x) { return 2.0 * std::sqrt(std::max(x, 0.0)); }, "2*sqrt(max(x,0))",
                        Modulus{Modulus::Kind::Holder12, 2.0}};
      InteractionKernel H{[beta](double x, double y) { return beta * (x + y); },
                          "beta*(x+y);beta=" + fmt_param(beta), false};
      return CoefficientSet(p, std::vector(np, sigma), std::vector(np, ScalarField::constant(d.beta * d.alpha)),
                            uniform_kernels(p, H), Domain::HalfLine, d);
    }

    CoefficientSet operator()(const BetaWishartAbs& d) const {
      require_finite(d.alpha, "alpha");
      require_finite(d.beta, "beta");
      const double beta = d.beta;
      // sigma^2 = 4|x|, inside the admissible envelope 4 beta |x| exactly when beta >= 1.
      ScalarField sigma{[](double x) { return 2.0 * std::sqrt(std::abs(x)); }, "2*sqrt(|x|)",
                        Modulus{Modulus::Kind::Holder12, 2.0}};
      InteractionKernel H{[beta](double x, double y) { return beta * (std::abs(x) + std::abs(y)); },
                          "beta*(|x|+|y|);beta=" + fmt_param(beta), false};
      return CoefficientSet(p, std::vector(np, sigma), std::vector(np, ScalarField::constant(d.beta * d.alpha)),
                            uniform_kernels(p, H), Domain::Real, d);
    }

    CoefficientSet operator()(const Jacobi& d) const {
      require_finite(d.q, "q");
      require_finite(d.r, "r");
      require_finite(d.beta, "beta");
      const double beta = d.beta, q = d.q, r = d.r;
      ScalarField sigma{[](double x) { return 2.0 * std::sqrt(std::max(x * (1.0 - x), 0.0)); },
                        "2*sqrt(max(x(1-x),0))", Modulus{Modulus::Kind::Holder12, 2.0}};
      ScalarField b{[beta, q, r](double x) { return beta * (q - (q + r) * x); },
                    "beta*(q-(q+r)x);beta=" + fmt_param(beta) + ";q=" + fmt_param(q) + ";r=" + fmt_param(r),
                    Modulus{Modulus::Kind::Lipschitz, std::abs(beta * (q + r))}};
      InteractionKernel H{[beta](double x, double y) { return beta * (x * (1.0 - y) + y * (1.0 - x)); },
                          "beta*(x(1-y)+y(1-x));beta=" + fmt_param(beta), false};
      return CoefficientSet(p, std::vector(np, sigma), std::vector(np, b), uniform_kernels(p, H),
                            Domain::UnitInterval, d);
    }

    CoefficientSet operator()(const Hyperbolic& d) const {
      require_finite(d.gamma, "gamma");
      const double gamma = d.gamma;
      InteractionKernel H{[gamma](double x, double y) { return hyperbolic_profile(gamma, y - x); },
                          "gamma*u*coth(u),u=y-x;gamma=" + fmt_param(gamma), false};
      return CoefficientSet(p, std::vector(np, ScalarField::constant(1.0)),
                            std::vector(np, ScalarField::constant(0.0)), uniform_kernels(p, H), Domain::Real, d);
    }

    CoefficientSet operator()(const GeneralPsi& d) const {
      require_finite(d.gamma, "gamma");
      const Expression psi = Expression::parse(d.psi, {"u"});
      // H(x, y) = (x - y) psi(x - y), extended to the diagonal by its limit from a tiny offset.
      InteractionKernel H{[psi](double x, double y) {
                            double u = std::abs(x - y);
                            if (u < 1e-9) u = 1e-9;
                            return u * psi(u);
                          },
                          "u*psi(u),u=x-y;psi=" + d.psi, false};
      return CoefficientSet(p, std::vector(np, ScalarField::constant(1.0)),
                            std::vector(np, ScalarField::constant(0.0)), uniform_kernels(p, H), Domain::Real, d);
    }
  };

  return std::visit(Builder{p, np}, params);
}

CoefficientSet build_custom(int p, const std::string& sigma, const std::string& b, const std::string& H,
                            Domain domain) {
  if (p < 1) throw std::invalid_argument("build_custom: p must be at least 1");
  const auto np = static_cast<std::size_t>(p);
  const auto s = ScalarField::from_expression(Expression::parse(sigma, {"x"}));
  const auto d = ScalarField::from_expression(Expression::parse(b, {"x"}));
  const auto k = InteractionKernel::from_expression(Expression::parse(H, {"x", "y"}));
  return CoefficientSet(p, std::vector(np, s), std::vector(np, d), uniform_kernels(p, k), domain);
}

bool gap_is_singular(double xi, double xj) {
  return std::abs(xi - xj) < 1e-12 * std::max(1.0, std::abs(xi));
}

double singular_drift(const CoefficientSet& cs, int i, const ChamberPoint& x) {
  const int p = cs.size();
  const double xi = x[i];
  double acc = cs.drift(i, xi);
  for (int j = 0; j < p; ++j) {
    if (j == i || !cs.kernel_active(i, j)) continue;
    const double xj = x[j];
    const double h = cs.H(i, j, xi, xj);
    if (h == 0.0) continue;
    if (gap_is_singular(xi, xj))
      throw SingularityError("singular drift: particles " + std::to_string(i) + " and " + std::to_string(j) +
                             " have collided");
    acc += h / (xi - xj);
  }
  return acc;
}

}  // namespace ncps
