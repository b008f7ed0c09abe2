#include "ncps/sympoly.hpp"

#include <unsupported/Eigen/Polynomials>

#include <complex>

namespace ncps {
namespace {

// Expansion e_0..e_deg of the entries of `v` not flagged in `mask`.
VectorXd masked_expansion(const VectorXd& v, const std::vector<bool>& mask, Index deg) {
  VectorXd e = VectorXd::Zero(deg + 1);
  if (deg < 0) return e;
  e[0] = 1.0;
  Index used = 0;
  for (Index k = 0; k < v.size(); ++k) {
    if (mask[static_cast<std::size_t>(k)]) continue;
    ++used;
    for (Index m = std::min(used, deg); m >= 1; --m) e[m] += v[k] * e[m - 1];
  }
  return e;
}

// Monic p(z) = z^p - y_1 z^{p-1} + ... and its derivative, by Horner.
std::pair<long double, long double> monic_eval(const VectorXld& y, long double z) {
  long double f = 1.0L, df = 0.0L;
  for (Index k = 0; k < y.size(); ++k) {
    df = df * z + f;
    f = f * z + (k % 2 == 0 ? -y[k] : y[k]);
  }
  return {f, df};
}

}  // namespace

PolyPoint elem_sym(const ChamberPoint& x) {
  const VectorXld e = elem_sym_full(x.coords().cast<long double>());
  return PolyPoint(VectorXld(e.tail(x.size())));
}

double incomplete_elem_sym(const ChamberPoint& x, std::span<const int> excluded, int n) {
  return incomplete_elem_sym(x.coords(), excluded, static_cast<Index>(n));
}

double default_root_tolerance(const PolyPoint& y) {
  return 1e-7 * std::max(1.0, static_cast<double>(y.coords().norm()));
}

RootRecovery recover_roots(const PolyPoint& y) {
  using LD = long double;
  const Index p = y.size();
  RootRecovery out;
  out.roots.resize(p);
  if (p == 0) return out;
  if (p == 1) {
    out.roots[0] = static_cast<double>(y[0]);
    return out;
  }

  // Ascending coefficients of z^p + sum_k (-1)^k y_k z^{p-k}.
  VectorXld coeffs(p + 1);
  coeffs[p] = 1.0L;
  for (Index k = 1; k <= p; ++k) coeffs[p - k] = k % 2 == 1 ? -y[k - 1] : y[k - 1];

  Eigen::PolynomialSolver<LD, Eigen::Dynamic> solver;
  solver.compute(coeffs);
  const auto& z = solver.roots();

  std::vector<std::complex<LD>> raw(z.data(), z.data() + z.size());
  std::sort(raw.begin(), raw.end(), [](auto a, auto b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  VectorXld roots(p);
  LD max_imag = 0.0L;
  for (const auto& r : raw) max_imag = std::max(max_imag, std::abs(r.imag()));
  for (Index k = 0; k < p; ++k) roots[k] = raw[static_cast<std::size_t>(k)].real();
  out.max_imag = static_cast<double>(max_imag);

  // Conjugate pairs are adjacent after sorting by real part; count them.
  for (std::size_t k = 0; k < raw.size(); ++k)
    if (raw[k].imag() > 0.0L) ++out.collapsed_pairs;

  // Guarded Newton steps on roots that were real to begin with; collapsed
  // pairs sit at a (near) double root where Newton is ill-conditioned.
  const LD scale = std::max(LD(1), roots.cwiseAbs().maxCoeff());
  for (int pass = 0; pass < 2; ++pass)
    for (Index k = 0; k < p; ++k) {
      if (raw[static_cast<std::size_t>(k)].imag() != 0.0L) continue;
      const LD r = roots[k];
      const auto [f, df] = monic_eval(y.coords(), r);
      if (df == 0.0L || !std::isfinite(df)) continue;
      const LD step = f / df;
      // Keep the root between its neighbours so the ordering is preserved.
      const LD lo = k > 0 ? roots[k - 1] : -std::numeric_limits<LD>::infinity();
      const LD hi = k + 1 < p ? roots[k + 1] : std::numeric_limits<LD>::infinity();
      const LD cand = r - step;
      if (!(cand >= lo && cand <= hi) || std::abs(step) > 1e-3L * scale) continue;
      if (std::abs(monic_eval(y.coords(), cand).first) <= std::abs(f)) roots[k] = cand;
    }
  std::sort(roots.data(), roots.data() + p);
  out.roots = roots.cast<double>();
  return out;
}

RootRecovery recover_roots_near(const PolyPoint& y, const VectorXd& guess) {
  using LD = long double;
  const Index p = y.size();
  if (p < 2 || guess.size() != p) return recover_roots(y);
  const LD scale = std::max(LD(1), LD(guess.cwiseAbs().maxCoeff()));
  VectorXld r = guess.cast<LD>();
  for (Index k = 0; k < p; ++k) {
    bool converged = false;
    for (int it = 0; it < 12 && !converged; ++it) {
      const auto [f, df] = monic_eval(y.coords(), r[k]);
      if (df == 0.0L || !std::isfinite(df)) break;
      const LD step = f / df;
      r[k] -= step;
      converged = std::abs(step) <= 1e-17L * scale;
    }
    if (!converged) return recover_roots(y);
  }
  // p distinct real roots of a degree-p polynomial are all of its roots.
  for (Index k = 1; k < p; ++k)
    if (!(r[k] - r[k - 1] > 1e-9L * scale)) return recover_roots(y);
  RootRecovery out;
  out.roots = r.cast<double>();
  return out;
}

ChamberPoint poly_to_chamber(const PolyPoint& y, double tol) {
  RootRecovery rec = recover_roots(y);
  if (rec.max_imag > tol)
    throw NonRealRootsError("poly_to_chamber: imaginary part " + std::to_string(rec.max_imag) +
                                " exceeds tolerance " + std::to_string(tol),
                            rec.max_imag);
  return ChamberPoint(std::move(rec.roots));
}

VectorXd poly_drift(const CoefficientSet& cs, const ChamberPoint& x, const MatrixXd& J) {
  const int p = cs.size();
  VectorXd q = VectorXd::Zero(p);
  for (int i = 0; i < p; ++i) {
    const double b = cs.drift(i, x[i]);
    if (b != 0.0) q += b * J.col(i);
  }
  if (p < 2) return q;
  std::vector<bool> mask(static_cast<std::size_t>(p), false);
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j) {
      if (!cs.kernel_active(i, j)) continue;
      const double h = cs.H(i, j, x[i], x[j]);
      if (h == 0.0) continue;
      mask[static_cast<std::size_t>(i)] = mask[static_cast<std::size_t>(j)] = true;
      const VectorXd e = masked_expansion(x.coords(), mask, p - 2);
      mask[static_cast<std::size_t>(i)] = mask[static_cast<std::size_t>(j)] = false;
      // q_n picks up e_{n-2}^{ī,j̄}, i.e. entry n-2 for n = 2..p.
      q.tail(p - 1) -= h * e;
    }
  return q;
}

PolyDynamics poly_dynamics(const CoefficientSet& cs, const ChamberPoint& x) {
  const int p = cs.size();
  PolyDynamics d;
  d.J = incomplete_table(x.coords());
  VectorXd s2(p);
  for (int i = 0; i < p; ++i) {
    const double s = cs.sigma(i, x[i]);
    s2[i] = s * s;
  }
  d.S = d.J * s2.asDiagonal() * d.J.transpose();
  d.a = d.S.diagonal().cwiseMax(0.0).cwiseSqrt();
  d.q = poly_drift(cs, x, d.J);
  return d;
}

GapDynamics gap_dynamics(const CoefficientSet& cs, const ChamberPoint& x) {
  const int p = cs.size();
  const Index N = static_cast<Index>(p) * (p - 1) / 2;
  GapDynamics g;
  g.V = gap_polys(x.coords());
  g.D = VectorXd::Zero(N);
  g.QV = VectorXd::Zero(N);
  if (N == 0) return g;

  const VectorXd A = squared_gaps(x.coords());
  std::vector<int> pidx(static_cast<std::size_t>(p * p), -1);
  {
    int k = 0;
    for (int i = 0; i < p; ++i)
      for (int j = i + 1; j < p; ++j) {
        pidx[static_cast<std::size_t>(i * p + j)] = k;
        pidx[static_cast<std::size_t>(j * p + i)] = k;
        ++k;
      }
  }
  auto pair = [&](int i, int j) { return static_cast<std::size_t>(pidx[static_cast<std::size_t>(i * p + j)]); };

  VectorXd s2(p), b(p);
  for (int i = 0; i < p; ++i) {
    const double s = cs.sigma(i, x[i]);
    s2[i] = s * s;
    b[i] = cs.drift(i, x[i]);
  }
  auto H = [&](int i, int j) { return cs.kernel_active(i, j) ? cs.H(i, j, x[i], x[j]) : 0.0; };

  std::vector<bool> mask(static_cast<std::size_t>(N), false);
  // D and QV use e_{n-1} and e_{n-2} for n = 1..N; expansions carry degrees 0..N-1.
  auto add_shifted = [&](VectorXd& target, const VectorXd& e, Index shift, double w) {
    for (Index n = shift; n < N; ++n) target[n] += w * e[n - shift];
  };

  // Single-pair exclusions: first, second and fifth terms, and the martingale part.
  std::vector<VectorXd> e1(static_cast<std::size_t>(N));
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j) {
      const std::size_t k = pair(i, j);
      mask[k] = true;
      e1[k] = masked_expansion(A, mask, N - 1);
      mask[k] = false;
      const double w = s2[i] + s2[j] + 4.0 * H(i, j) + 2.0 * (x[j] - x[i]) * (b[j] - b[i]);
      add_shifted(g.D, e1[k], 0, w);
    }
  for (int i = 0; i < p; ++i) {
    VectorXd m = VectorXd::Zero(N);
    for (int j = 0; j < p; ++j)
      if (j != i) m += (x[i] - x[j]) * e1[pair(i, j)];
    g.QV += 4.0 * s2[i] * m.cwiseAbs2();
  }

  // Pairs sharing particle i: third term and the first part of the fourth.
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      if (j == i) continue;
      for (int k = 0; k < p; ++k) {
        if (k == i || k == j) continue;
        const double w = 2.0 * (x[i] - x[j]) * (x[i] - x[k]) * (s2[i] + H(i, k));
        if (w == 0.0) continue;
        mask[pair(i, j)] = mask[pair(i, k)] = true;
        add_shifted(g.D, masked_expansion(A, mask, N - 2), 1, w);
        mask[pair(i, j)] = mask[pair(i, k)] = false;
      }
    }

  // Second part of the fourth term, regrouped over each triangle {i, j, k}.
  for (int i = 0; i < p; ++i)
    for (int k = i + 1; k < p; ++k) {
      const double h = H(i, k);
      if (h == 0.0) continue;
      for (int j = 0; j < p; ++j) {
        if (j == i || j == k) continue;
        mask[pair(i, j)] = mask[pair(i, k)] = mask[pair(j, k)] = true;
        const VectorXd e = masked_expansion(A, mask, N - 1);
        mask[pair(i, j)] = mask[pair(i, k)] = mask[pair(j, k)] = false;
        add_shifted(g.D, e, 0, 2.0 * h);
        add_shifted(g.D, e, 1, -2.0 * h * (x[i] - x[j]) * (x[k] - x[j]));
      }
    }
  return g;
}

}  // namespace ncps
