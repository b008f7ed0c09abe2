#include "ncps/sympoly.hpp"

#include "doctest.h"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

using namespace ncps;

namespace {

using LD = long double;

VectorXd vec(std::initializer_list<double> v) {
  VectorXd x(static_cast<Index>(v.size()));
  Index k = 0;
  for (double d : v) x[k++] = d;
  return x;
}

ChamberPoint random_chamber(std::mt19937_64& rng, int p, double gmin = 0.1, double gmax = 1.0) {
  std::uniform_real_distribution<double> s(-1.0, 1.0), g(gmin, gmax);
  VectorXd x(p);
  x[0] = s(rng);
  for (int i = 1; i < p; ++i) x[i] = x[i - 1] + g(rng);
  return ChamberPoint(x);
}

// Oracle: e_n of the entries with bit k of `skip` clear, by subset enumeration.
LD brute_e(const std::vector<LD>& v, int n, unsigned long skip = 0) {
  if (n < 0) return 0;
  LD sum = 0;
  const unsigned long m = v.size();
  for (unsigned long s = 0; s < (1ul << m); ++s) {
    if (s & skip || __builtin_popcountl(s) != n) continue;
    LD prod = 1;
    for (unsigned long k = 0; k < m; ++k)
      if (s >> k & 1ul) prod *= v[k];
    sum += prod;
  }
  return sum;
}

std::vector<LD> to_ld(const VectorXd& x) { return std::vector<LD>(x.data(), x.data() + x.size()); }

// Oracle: V_n by enumeration over the squared gaps.
LD brute_V(const std::vector<LD>& x, int n) {
  std::vector<LD> a;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) a.push_back((x[i] - x[j]) * (x[i] - x[j]));
  return brute_e(a, n);
}

// Itô generator of f at x by central differences in long double, with the
// singular drift evaluated directly: sum_i mu_i d_i f + 1/2 sigma_i^2 d_ii f.
template <typename F>
LD generator(const CoefficientSet& cs, const ChamberPoint& x, F f) {
  const int p = cs.size();
  std::vector<LD> base = to_ld(x.coords());
  const LD h = 1e-4L;
  LD out = 0;
  for (int i = 0; i < p; ++i) {
    std::vector<LD> up = base, dn = base;
    up[static_cast<std::size_t>(i)] += h;
    dn[static_cast<std::size_t>(i)] -= h;
    const LD fu = f(up), fd = f(dn), f0 = f(base);
    const LD d1 = (fu - fd) / (2 * h), d2 = (fu - 2 * f0 + fd) / (h * h);
    LD mu = cs.drift(i, x[i]);
    for (int j = 0; j < p; ++j)
      if (j != i) mu += LD(cs.H(i, j, x[i], x[j])) / (LD(x[i]) - LD(x[j]));
    const LD s = cs.sigma(i, x[i]);
    out += mu * d1 + s * s * d2 / 2;
  }
  return out;
}

std::vector<CoefficientSet> systems(int p) {
  return {build_preset(DysonCepa{1.0}, p), build_preset(NearestNeighbor{0.75}, p),
          build_preset(BetaWishart{3.0, 1.5}, p), build_preset(Jacobi{3.0, 4.0, 1.0}, p),
          build_preset(Hyperbolic{0.8}, p)};
}

ChamberPoint inside_domain(const CoefficientSet& cs, std::mt19937_64& rng) {
  const int p = cs.size();
  if (cs.domain() == Domain::Real) return random_chamber(rng, p);
  const double lo = 0.05, hi = cs.domain() == Domain::UnitInterval ? 0.95 : 3.0;
  std::uniform_real_distribution<double> u(lo, hi);
  VectorXd x(p);
  for (int i = 0; i < p; ++i) x[i] = u(rng);
  return ChamberPoint::sorted(x);
}

}  // namespace

TEST_SUITE("sympoly") {
  TEST_CASE("elem_sym examples") {
    CHECK(elem_sym(ChamberPoint(vec({1, 2, 3}))).to_double() == vec({6, 11, 6}));
    CHECK(elem_sym(ChamberPoint(vec({0, 0, 0}))).to_double() == vec({0, 0, 0}));
    CHECK(elem_sym(ChamberPoint(vec({-1, 1}))).to_double() == vec({0, -1}));
  }

  TEST_CASE("incomplete_elem_sym examples and conventions") {
    const ChamberPoint x(vec({1, 2, 3}));
    const int ex2[] = {1};
    const int ex13[] = {0, 2};
    CHECK(incomplete_elem_sym(x, ex2, 1) == 4.0);
    CHECK(incomplete_elem_sym(x, ex2, 0) == 1.0);
    CHECK(incomplete_elem_sym(x, ex13, 2) == 0.0);
    CHECK(incomplete_elem_sym(x, ex13, -1) == 0.0);
  }

  TEST_CASE("incomplete table matches subset enumeration") {
    std::mt19937_64 rng(1);
    for (int p = 1; p <= 7; ++p) {
      const ChamberPoint x = random_chamber(rng, p);
      const MatrixXd J = incomplete_table(x.coords());
      const auto v = to_ld(x.coords());
      for (int n = 0; n < p; ++n)
        for (int i = 0; i < p; ++i)
          CHECK(J(n, i) == doctest::Approx(static_cast<double>(brute_e(v, n, 1ul << i))).epsilon(1e-12));
    }
  }

  TEST_CASE("poly_to_chamber examples") {
    CHECK((poly_to_chamber(PolyPoint(vec({6, 11, 6}))).coords() - vec({1, 2, 3})).norm() < 1e-12);
    CHECK(poly_to_chamber(PolyPoint(vec({0, 0, 0}))).coords() == vec({0, 0, 0}));
    const ChamberPoint dbl = poly_to_chamber(PolyPoint(vec({2, 1})));
    CHECK(dbl[0] == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(dbl[1] == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(dbl[0] <= dbl[1]);
  }

  TEST_CASE("poly_to_chamber rejects clearly complex roots") {
    // z^2 + 1
    CHECK_THROWS_AS(poly_to_chamber(PolyPoint(vec({0, 1}))), NonRealRootsError);
    // z^2 - 2z + (1 + 1e-16): a pair well inside the collapse tolerance
    CHECK_NOTHROW(poly_to_chamber(PolyPoint(vec({2, 1 + 1e-15}))));
  }

  TEST_CASE("roundtrip on interior points") {
    std::mt19937_64 rng(2);
    for (int s = 0; s < 2000; ++s) {
      const int p = 2 + s % 11;
      const ChamberPoint x = random_chamber(rng, p);
      const ChamberPoint back = poly_to_chamber(elem_sym(x));
      CHECK((back.coords() - x.coords()).cwiseAbs().maxCoeff() / std::max(1.0, x.coords().cwiseAbs().maxCoeff()) <
            1e-8);
    }
  }

  TEST_CASE("warm-started recovery agrees with the companion solver") {
    std::mt19937_64 rng(3);
    for (int s = 0; s < 500; ++s) {
      const int p = 2 + s % 6;
      const ChamberPoint x = random_chamber(rng, p, 0.01, 1.0);
      VectorXd guess = x.coords();
      for (Index i = 0; i < guess.size(); ++i) guess[i] += 1e-3 * ((i % 2) ? 1 : -1);
      const PolyPoint y = elem_sym(x);
      const RootRecovery a = recover_roots_near(y, guess), b = recover_roots(y);
      CHECK((a.roots - b.roots).cwiseAbs().maxCoeff() < 1e-12);
    }
    // A complex pair is never reported as real.
    const RootRecovery c = recover_roots_near(PolyPoint(vec({0, 1})), vec({-0.5, 0.5}));
    CHECK(c.max_imag == doctest::Approx(1.0));
  }

  TEST_CASE("Newton identities reproduce power sums") {
    std::mt19937_64 rng(4);
    for (int p = 1; p <= 8; ++p) {
      const ChamberPoint x = random_chamber(rng, p);
      const VectorXd ps = power_sums_from_elem(elem_sym(x).to_double(), p);
      for (int k = 1; k <= p; ++k) {
        double direct = 0.0;
        for (int i = 0; i < p; ++i) direct += std::pow(x[i], k);
        CHECK(ps[k - 1] == doctest::Approx(direct).epsilon(1e-10));
      }
    }
  }

  TEST_CASE("poly_dynamics examples") {
    const CoefficientSet cs = build_preset(DysonCepa{0.7}, 2);
    const PolyDynamics d = poly_dynamics(cs, ChamberPoint(vec({-0.3, 2.0})));
    CHECK(d.q[0] == 0.0);
    CHECK(d.q[1] == doctest::Approx(-0.7));
    const PolyDynamics e = poly_dynamics(build_preset(DysonCepa{1.0}, 2), ChamberPoint(vec({0, 1})));
    CHECK(e.S(0, 1) == doctest::Approx(1.0));
    CHECK(e.a[1] == doctest::Approx(1.0));  // S(2,2) = x_2^2 + x_1^2
  }

  TEST_CASE("q and S match the Ito generator of e_n") {
    std::mt19937_64 rng(5);
    for (int p : {2, 3, 4}) {
      for (const CoefficientSet& cs : systems(p)) {
        const ChamberPoint x = inside_domain(cs, rng);
        const PolyDynamics d = poly_dynamics(cs, x);
        for (int n = 1; n <= p; ++n) {
          const LD g = generator(cs, x, [n](const std::vector<LD>& v) { return brute_e(v, n); });
          CHECK(d.q[n - 1] == doctest::Approx(static_cast<double>(g)).epsilon(1e-6).scale(1.0));
        }
        // S(n, m) = sum_i sigma_i^2 d_i e_n d_i e_m, with d_i e_n = e_{n-1}^{ī}.
        const auto v = to_ld(x.coords());
        for (int n = 1; n <= p; ++n)
          for (int m = 1; m <= p; ++m) {
            LD s = 0;
            for (int i = 0; i < p; ++i) {
              const LD sg = cs.sigma(i, x[i]);
              s += sg * sg * brute_e(v, n - 1, 1ul << i) * brute_e(v, m - 1, 1ul << i);
            }
            CHECK(d.S(n - 1, m - 1) == doctest::Approx(static_cast<double>(s)).epsilon(1e-10).scale(1.0));
          }
        for (int n = 0; n < p; ++n) CHECK(d.a[n] * d.a[n] == doctest::Approx(d.S(n, n)).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("S is positive semidefinite") {
    std::mt19937_64 rng(6);
    for (int s = 0; s < 200; ++s) {
      const int p = 2 + s % 6;
      const CoefficientSet cs = build_preset(BetaWishart{2.0, 1.0}, p);
      const ChamberPoint x = inside_domain(cs, rng);
      const MatrixXd S = poly_dynamics(cs, x).S;
      CHECK((S - S.transpose()).norm() <= 1e-12 * S.norm());
      const double lmin = Eigen::SelfAdjointEigenSolver<MatrixXd>(S).eigenvalues().minCoeff();
      CHECK(lmin >= -1e-10 * S.trace());
    }
  }

  TEST_CASE("gap_polys examples and ordering") {
    CHECK(gap_polys(vec({0, 1}))[0] == 1.0);
    CHECK(gap_polys(vec({0, 1, 3})) == vec({14, 49, 36}));
    CHECK(gap_polys(vec({2, 2, 2, 2})).isZero());
    // V_n = 0 forces V_m = 0 for m > n.
    std::mt19937_64 rng(7);
    for (int s = 0; s < 200; ++s) {
      const int p = 3 + s % 4;
      VectorXd x = random_chamber(rng, p).coords();
      const Index k = s % (p - 1);
      x[k + 1] = x[k];  // planted collision
      if (s % 3 == 0 && k + 2 < p) x[k + 2] = x[k];
      const VectorXd V = gap_polys(x);
      for (Index n = 0; n < V.size(); ++n) {
        CHECK(V[n] >= 0.0);
        if (V[n] == 0.0)
          for (Index m = n + 1; m < V.size(); ++m) CHECK(V[m] == 0.0);
      }
      CHECK(V[V.size() - 1] == 0.0);
    }
  }

  TEST_CASE("gap_dynamics examples") {
    const double g = 0.3;
    const GapDynamics d = gap_dynamics(build_preset(DysonCepa{g}, 2), ChamberPoint(vec({-0.4, 1.1})));
    CHECK(d.D[0] == doctest::Approx(2.0 + 4.0 * g));
    CHECK(d.QV[0] == doctest::Approx(8.0 * 1.5 * 1.5));
  }

  TEST_CASE("gap_dynamics matches the Ito generator of V_n") {
    std::mt19937_64 rng(8);
    for (int p : {2, 3, 4}) {
      for (const CoefficientSet& cs : systems(p)) {
        const ChamberPoint x = inside_domain(cs, rng);
        const GapDynamics gd = gap_dynamics(cs, x);
        const auto v = to_ld(x.coords());
        const int N = p * (p - 1) / 2;
        for (int n = 1; n <= N; ++n) {
          CHECK(gd.V[n - 1] == doctest::Approx(static_cast<double>(brute_V(v, n))).epsilon(1e-12));
          const LD g = generator(cs, x, [n](const std::vector<LD>& w) { return brute_V(w, n); });
          CHECK(gd.D[n - 1] == doctest::Approx(static_cast<double>(g)).epsilon(1e-5).scale(1.0));
          // QV_n = sum_i sigma_i^2 (d_i V_n)^2.
          LD qv = 0;
          for (int i = 0; i < p; ++i) {
            std::vector<LD> up = v, dn = v;
            up[static_cast<std::size_t>(i)] += 1e-5L;
            dn[static_cast<std::size_t>(i)] -= 1e-5L;
            const LD dV = (brute_V(up, n) - brute_V(dn, n)) / 2e-5L;
            const LD sg = cs.sigma(i, x[i]);
            qv += sg * sg * dV * dV;
          }
          CHECK(gd.QV[n - 1] == doctest::Approx(static_cast<double>(qv)).epsilon(1e-6).scale(1.0));
        }
      }
    }
  }

  TEST_CASE("gap_dynamics is finite at collisions and D_1 at a full collision") {
    for (int p : {2, 3, 5}) {
      const double gamma = 0.8;
      const GapDynamics d = gap_dynamics(build_preset(DysonCepa{gamma}, p), ChamberPoint(VectorXd::Constant(p, 0.4)));
      CHECK(d.V.isZero());
      CHECK(d.D.allFinite());
      const double npairs = p * (p - 1) / 2.0;
      CHECK(d.D[0] == doctest::Approx((p - 1) * p * 1.0 + 2.0 * p * npairs * gamma));
      for (Index n = 1; n < d.D.size(); ++n) CHECK(d.D[n] == doctest::Approx(0.0));
    }
  }

  TEST_CASE("log_vandermonde_drift examples") {
    for (double g : {0.25, 0.5, 1.0}) {
      const double val = log_vandermonde_drift(build_preset(DysonCepa{g}, 2), ChamberPoint(vec({0.2, 0.9})));
      CHECK(val == doctest::Approx((1.0 - 2.0 * g) / (0.7 * 0.7)));
    }
    CHECK(log_vandermonde_drift(build_preset(NearestNeighbor{0.75}, 3), ChamberPoint(vec({0, 1, 2}))) <= 0.0);
    std::mt19937_64 rng(9);
    for (int s = 0; s < 100; ++s) {
      const ChamberPoint x = random_chamber(rng, 2 + s % 5);
      CHECK(log_vandermonde_drift(build_preset(DysonCepa{0.5}, static_cast<int>(x.size())), x) ==
            doctest::Approx(0.0).scale(1.0));
    }
    CHECK_THROWS_AS(log_vandermonde_drift(build_preset(DysonCepa{1.0}, 3), ChamberPoint(vec({0, 0, 1}))),
                    SingularityError);
  }

  TEST_CASE("log_vandermonde_drift matches the generator of -1/2 ln V_N") {
    std::mt19937_64 rng(10);
    for (int p : {2, 3, 4})
      for (const CoefficientSet& cs : systems(p)) {
        const ChamberPoint x = inside_domain(cs, rng);
        LD drift = 0;
        for (int i = 0; i < p; ++i) {
          LD mu = cs.drift(i, x[i]), d1 = 0, d2 = 0;
          for (int j = 0; j < p; ++j) {
            if (j == i) continue;
            const LD diff = LD(x[i]) - LD(x[j]);
            mu += LD(cs.H(i, j, x[i], x[j])) / diff;
            d1 -= 1 / diff;
            d2 += 1 / (diff * diff);
          }
          const LD s = cs.sigma(i, x[i]);
          drift += mu * d1 + s * s * d2 / 2;
        }
        CHECK(log_vandermonde_drift<LD>(cs, x) == doctest::Approx(static_cast<double>(drift)).epsilon(1e-9));
      }
  }
}
