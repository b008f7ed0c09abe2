#include "ncps/conditions.hpp"

#include "doctest.h"

#include <cmath>

using namespace ncps;

namespace {

void check_witnesses(const CoefficientSet& cs, const ConditionReport& r) {
  for (const auto& [id, res] : r.conditions) {
    if (res.verdict == Verdict::Fail) {
      REQUIRE_MESSAGE(!res.witnesses.empty(), to_string(id));
      for (const Witness& w : res.witnesses) CHECK_MESSAGE(reevaluate(cs, w) > r.tol, to_string(id));
    }
    if (res.method == Method::ClosedForm) CHECK(res.verdict != Verdict::Unknown);
  }
}

}  // namespace

TEST_SUITE("conditions") {
  TEST_CASE("Dyson threshold") {
    const CoefficientSet bad = build_preset(DysonCepa{0.49}, 3);
    const ConditionReport r = check_preset(bad);
    CHECK(r.overall == Verdict::Fail);
    CHECK(r.verdict(ConditionId::A2) == Verdict::Fail);
    CHECK(r.method() == Method::ClosedForm);
    check_witnesses(bad, r);
    const Witness& w = r.conditions.at(ConditionId::A2).witnesses.front();
    CHECK(reevaluate(bad, w) == doctest::Approx(2.0 - 4.0 * 0.49));

    CHECK(check_preset(build_preset(DysonCepa{0.5}, 3)).overall == Verdict::Pass);
    CHECK(check_preset(build_preset(DysonCepa{1.0}, 5)).overall == Verdict::Pass);
  }

  TEST_CASE("A2 is sharp just below the threshold") {
    const CoefficientSet cs = build_preset(DysonCepa{0.5 - 1e-6}, 3);
    const ConditionReport r = check_preset(cs);
    CHECK(r.verdict(ConditionId::A2) == Verdict::Fail);
    check_witnesses(cs, r);
    const ConditionReport n = check_numeric(cs, natural_box(cs));
    CHECK(n.verdict(ConditionId::A2) == Verdict::Fail);
    check_witnesses(cs, n);
  }

  TEST_CASE("Wishart and Jacobi thresholds") {
    CHECK(check_preset(build_preset(BetaWishart{3.0, 1.0}, 3)).overall == Verdict::Pass);
    const ConditionReport all = check_preset(build_preset(BetaWishart{3.0, 1.0}, 3));
    for (const auto& [id, res] : all.conditions) CHECK_MESSAGE(res.verdict == Verdict::Pass, to_string(id));
    CHECK(check_preset(build_preset(BetaWishart{1.5, 1.0}, 3)).overall == Verdict::Fail);
    CHECK(check_preset(build_preset(BetaWishart{3.0, 0.9}, 3)).overall == Verdict::Fail);
    CHECK(check_preset(build_preset(BetaWishartAbs{0.5, 1.0}, 3)).overall == Verdict::Pass);
    CHECK(check_preset(build_preset(BetaWishartAbs{1.0, 1.0}, 3)).overall == Verdict::Fail);
    CHECK(check_preset(build_preset(BetaWishartAbs{2.0, 1.0}, 3)).overall == Verdict::Pass);
    CHECK(check_preset(build_preset(Jacobi{2.0, 3.0, 1.0}, 3)).overall == Verdict::Pass);
    CHECK(check_preset(build_preset(Jacobi{1.0, 3.0, 1.0}, 3)).overall == Verdict::Fail);
    CHECK(check_preset(build_preset(Hyperbolic{0.5}, 3)).overall == Verdict::Pass);
    CHECK(check_preset(build_preset(Hyperbolic{0.4}, 3)).overall == Verdict::Fail);
  }

  TEST_CASE("nearest neighbour") {
    const ConditionReport r3 = check_preset(build_preset(NearestNeighbor{0.75}, 3));
    CHECK(r3.overall == Verdict::Pass);
    CHECK(r3.route == "corollary");
    CHECK(r3.verdict(ConditionId::A2) == Verdict::Fail);  // H_13 = 0
    CHECK(check_preset(build_preset(NearestNeighbor{0.74}, 3)).overall == Verdict::Fail);
    const ConditionReport r5 = check_preset(build_preset(NearestNeighbor{2.0}, 5));
    CHECK(r5.overall == Verdict::Unknown);
    REQUIRE(r5.conjectured_threshold);
    CHECK(*r5.conjectured_threshold == doctest::Approx(nearest_neighbor_conjecture(5)));
    // p = 3 reproduces the proven threshold.
    CHECK(nearest_neighbor_conjecture(3) == doctest::Approx(0.75));
    CHECK(nearest_neighbor_conjecture(4) == doctest::Approx(2.0 * (1 + 0.25 + 1.0 / 9) / (1 + 0.5 + 1.0 / 3) - 0.5));
  }

  TEST_CASE("degenerate sets") {
    CHECK(degenerate_points(build_preset(DysonCepa{1.0}, 3), Interval{-4, 4}).points.empty());
    CHECK(degenerate_points(build_preset(Hyperbolic{1.0}, 3), Interval{-4, 4}).points.empty());
    CHECK(degenerate_points(build_preset(NearestNeighbor{1.0}, 3), Interval{-4, 4}).points.empty());
    CHECK(degenerate_points(build_preset(BetaWishart{3, 1}, 3), Interval{0, 8}).points == std::vector<double>{0.0});
    CHECK(degenerate_points(build_preset(Jacobi{3, 3, 1}, 3), Interval{0, 1}).points == std::vector<double>{0.0, 1.0});
    // Sampled: sigma^2 = x^2 with a zero kernel vanishes at 0 only.
    const DegenerateSet s = degenerate_points(build_custom(3, "x", "0", "0", Domain::Real), Interval{-1, 1});
    CHECK(s.method == Method::Sampled);
    REQUIRE(s.points.size() == 1);
    CHECK(s.points[0] == doctest::Approx(0.0).epsilon(1e-2).scale(1.0));
  }

  TEST_CASE("check_numeric examples") {
    const CoefficientSet eq = build_custom(3, "sqrt(1.4)", "0", "0.7", Domain::Real);
    const ConditionReport r = check_numeric(eq, Interval{-2, 2});
    CHECK(r.verdict(ConditionId::A2) == Verdict::Pass);
    CHECK(r.verdict(ConditionId::A3) == Verdict::Pass);
    CHECK(r.method() == Method::Sampled);
    // H = |x| + |y|: the tuple (-2,-1,1,2) is tight but satisfied.
    const CoefficientSet abs = build_custom(3, "1", "0", "|x| + |y|", Domain::Real);
    const ConditionReport a = check_numeric(abs, Interval{-2, 2});
    CHECK(a.verdict(ConditionId::A1) == Verdict::Pass);
    CHECK_THROWS_AS(check_numeric(eq, Interval{-2, 2}, 3), std::invalid_argument);
    CHECK_THROWS_AS(check_numeric(eq, Interval{1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(check_numeric(build_preset(BetaWishart{3, 1}, 3), Interval{-1, 1}), std::invalid_argument);
  }

  TEST_CASE("custom systems are delegated and can be unknown or fail") {
    const CoefficientSet weak = build_custom(3, "1", "0", "0.1", Domain::Real);
    const ConditionReport r = check_preset(weak);
    CHECK(r.route == "sampled");
    CHECK(r.overall == Verdict::Fail);
    check_witnesses(weak, r);
    // A kernel vanishing on the diagonal fails A2 on the diagonal without any c.
    const CoefficientSet van = build_custom(2, "1", "0", "(x-y)^2", Domain::Real);
    CHECK(check_preset(van).verdict(ConditionId::A2) == Verdict::Fail);
    CHECK(exit_code(Verdict::Pass) == 0);
    CHECK(exit_code(Verdict::Fail) == 1);
    CHECK(exit_code(Verdict::Unknown) == 2);
  }

  TEST_CASE("closed form and sampling agree on natural boxes") {
    const std::vector<std::pair<PresetParams, int>> cases = {
        {DysonCepa{1.0}, 3},           {DysonCepa{0.3}, 3},         {BetaWishart{3.0, 1.0}, 3},
        {BetaWishart{3.0, 0.5}, 3},    {BetaWishartAbs{2.5, 1.0}, 3}, {BetaWishartAbs{2.5, 0.5}, 3},
        {Jacobi{3.0, 4.0, 1.0}, 3},    {Jacobi{3.0, 4.0, 0.5}, 3},  {Hyperbolic{1.0}, 3},
        {Hyperbolic{0.3}, 3},          {NearestNeighbor{0.3}, 2},   {NearestNeighbor{1.0}, 2}};
    // Nearest neighbour with p = 3 is excluded: its overall verdict follows the
    // corollary, while the literal (A2)/(A3) fail for the non-adjacent pair.
    for (const auto& [params, p] : cases) {
      const CoefficientSet cs = build_preset(params, p);
      const ConditionReport exact = check_preset(cs);
      const ConditionReport sampled = check_numeric(cs, natural_box(cs), 32, 1e-9);
      check_witnesses(cs, sampled);
      CHECK(exact.overall == sampled.overall);
      for (const auto& [id, res] : exact.conditions) {
        const Verdict s = sampled.verdict(id);
        CHECK(s != Verdict::Unknown);
        CHECK_MESSAGE(res.verdict == s, preset_name(params) << " " << to_string(id) << " exact="
                                                            << to_string(res.verdict) << " sampled=" << to_string(s));
      }
    }
  }

  TEST_CASE("general psi is sampled") {
    const CoefficientSet cs = build_preset(GeneralPsi{"coth(u)", 1.0}, 3);
    const ConditionReport r = check_preset(cs);
    CHECK(r.route == "sampled");
    CHECK(r.overall != Verdict::Fail);
    REQUIRE(r.notes.size() == 2);
    CHECK(r.notes[1].find(" satisfy ") != std::string::npos);
    const ConditionReport weak = check_preset(build_preset(GeneralPsi{"coth(u)", 2.0}, 3));
    CHECK(weak.notes[1].find(" violate ") != std::string::npos);
  }
}
