#include "ncps/coefficients.hpp"

#include "doctest.h"

#include <cmath>
#include <random>

using namespace ncps;

namespace {

ChamberPoint pt(std::initializer_list<double> v) {
  VectorXd x(static_cast<Index>(v.size()));
  Index k = 0;
  for (double d : v) x[k++] = d;
  return ChamberPoint(x);
}

std::vector<PresetParams> all_presets() {
  return {DysonCepa{1.0},        NearestNeighbor{0.75}, BetaWishart{3.0, 1.0}, BetaWishartAbs{2.5, 1.0},
          Jacobi{3.0, 4.0, 1.0}, Hyperbolic{2.0},       GeneralPsi{"coth(u)", 1.0}};
}

}  // namespace

TEST_SUITE("coefficients") {
  TEST_CASE("preset examples") {
    const CoefficientSet d = build_preset(DysonCepa{1.0}, 3);
    CHECK(d.H(0, 1, 5, 7) == 1.0);
    CHECK(d.sigma(1, 0.3) == 1.0);
    CHECK(d.drift(0, 0.42) == 0.0);

    const CoefficientSet w = build_preset(BetaWishart{3.0, 1.0}, 3);
    CHECK(w.drift(2, 1.7) == 3.0);
    CHECK(w.H(0, 2, 2, 5) == 7.0);
    CHECK(w.sigma(0, 4) == 4.0);
    CHECK(w.sigma(0, -1e-18) == 0.0);
    CHECK(w.domain() == Domain::HalfLine);

    const CoefficientSet h = build_preset(Hyperbolic{2.0}, 3);
    CHECK(h.H(0, 1, 0.5, 0.5) == 2.0);
    CHECK(h.H(0, 1, 0.0, 1.0) == doctest::Approx(2.0 / std::tanh(1.0)));

    const CoefficientSet j = build_preset(Jacobi{3.0, 4.0, 2.0}, 2);
    CHECK(j.sigma(0, 0.5) == doctest::Approx(1.0));
    CHECK(j.drift(0, 0.25) == doctest::Approx(2.0 * (3.0 - 7.0 * 0.25)));
    CHECK(j.H(0, 1, 0.2, 0.7) == doctest::Approx(2.0 * (0.2 * 0.3 + 0.7 * 0.8)));
    CHECK(j.domain() == Domain::UnitInterval);

    const CoefficientSet nn = build_preset(NearestNeighbor{0.75}, 4);
    CHECK(nn.H(0, 1, 0, 1) == 0.75);
    CHECK(nn.H(2, 3, 0, 1) == 0.75);
    CHECK(nn.H(0, 2, 0, 1) == 0.0);
    CHECK_FALSE(nn.kernel_active(1, 3));

    const CoefficientSet a = build_preset(BetaWishartAbs{2.5, 1.5}, 2);
    CHECK(a.H(0, 1, -1, 2) == doctest::Approx(4.5));
    CHECK(a.domain() == Domain::Real);
  }

  TEST_CASE("invalid presets") {
    CHECK_THROWS_AS(build_preset(DysonCepa{1.0}, 0), std::invalid_argument);
    CHECK_THROWS_AS(build_preset(DysonCepa{NAN}, 3), std::invalid_argument);
    CHECK_THROWS_AS(build_preset(GeneralPsi{"u +", 1.0}, 3), ExpressionError);
  }

  TEST_CASE("kernel access resolves by symmetry") {
    const CoefficientSet c = build_custom(3, "1", "0", "x + 2*y", Domain::Real);
    CHECK(c.H(0, 1, 1.0, 5.0) == 11.0);
    CHECK(c.H(1, 0, 5.0, 1.0) == 11.0);
    CHECK(c.uniform());
  }

  TEST_CASE("singular_drift examples") {
    const CoefficientSet d = build_preset(DysonCepa{1.0}, 3);
    const ChamberPoint x = pt({0, 1, 3});
    CHECK(singular_drift(d, 0, x) == doctest::Approx(-4.0 / 3.0));
    CHECK(singular_drift(d, 2, x) == doctest::Approx(5.0 / 6.0));
    const CoefficientSet w = build_preset(BetaWishart{3.0, 1.0}, 2);
    CHECK(singular_drift(w, 1, pt({1, 4})) == doctest::Approx(14.0 / 3.0));
    CHECK_THROWS_AS(singular_drift(d, 0, pt({0, 0, 1})), SingularityError);
    // An inactive kernel across a collided pair is not singular.
    CHECK_NOTHROW(singular_drift(build_preset(NearestNeighbor{1.0}, 3), 0, pt({0, 1, 1})));
  }

  TEST_CASE("gap threshold") {
    CHECK(gap_is_singular(1.0, 1.0 + 1e-13));
    CHECK_FALSE(gap_is_singular(1.0, 1.0 + 1e-11));
    CHECK(gap_is_singular(1e6, 1e6 + 1e-7));
  }

  TEST_CASE("pairwise terms cancel for a constant symmetric kernel") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int s = 0; s < 500; ++s) {
      const int p = 2 + s % 7;
      VectorXd v(p);
      for (int i = 0; i < p; ++i) v[i] = u(rng);
      const ChamberPoint x = ChamberPoint::sorted(v);
      if (x.min_gap() < 1e-6) continue;
      const CoefficientSet c = build_preset(DysonCepa{0.3 + s % 3}, p);
      double sum = 0.0, mag = 0.0;
      for (int i = 0; i < p; ++i) {
        sum += singular_drift(c, i, x);
        mag += std::abs(singular_drift(c, i, x));
      }
      CHECK(std::abs(sum) <= 1e-12 * std::max(1.0, mag));
    }
  }

  TEST_CASE("preset kernels are symmetric and nonnegative") {
    std::mt19937_64 rng(12);
    for (const PresetParams& params : all_presets()) {
      const CoefficientSet c = build_preset(params, 4);
      const Interval dom = domain_interval(c.domain());
      const double lo = std::isfinite(dom.lo) ? dom.lo : -10.0, hi = std::isfinite(dom.hi) ? dom.hi : 10.0;
      std::uniform_real_distribution<double> u(lo, hi);
      bool ok = true;
      for (int s = 0; s < 10000; ++s) {
        const double x = u(rng), y = u(rng);
        for (int i = 0; i < 4; ++i)
          for (int j = i + 1; j < 4; ++j) {
            const double a = c.H(i, j, x, y), b = c.H(i, j, y, x);
            ok = ok && a >= 0.0 && std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a));
          }
      }
      CHECK_MESSAGE(ok, preset_name(params));
    }
  }

  TEST_CASE("Wishart diffusion bound holds exactly when beta >= 1") {
    for (double beta : {0.5, 0.99, 1.0, 2.0}) {
      const CoefficientSet c = build_preset(BetaWishart{3.0, beta}, 2);
      bool holds = true;
      for (double x = 0.01; x < 10.0; x += 0.01) {
        const double s = c.sigma(0, x);
        holds = holds && s * s <= 4.0 * beta * std::abs(x) * (1 + 1e-14);
      }
      CHECK(holds == (beta >= 1.0));
    }
  }

  TEST_CASE("custom fields from the expression grammar") {
    const CoefficientSet c = build_custom(2, "sqrt(2)", "-x", "|x| + |y| + 2^2", Domain::Real);
    CHECK(c.sigma(0, 7) == doctest::Approx(std::sqrt(2.0)));
    CHECK(c.drift(1, 3) == -3.0);
    CHECK(c.H(0, 1, -1, 2) == 7.0);
    CHECK_THROWS_AS(build_custom(2, "z", "0", "1", Domain::Real), ExpressionError);
    const Expression e = Expression::parse("-2^2 + pi*0 + coth(1)", {});
    CHECK(e(std::span<const double>()) == doctest::Approx(-4.0 + 1.0 / std::tanh(1.0)));
  }
}
