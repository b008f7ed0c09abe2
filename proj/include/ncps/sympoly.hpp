#pragma once

#include "ncps/coefficients.hpp"
#include "ncps/types.hpp"

#include <span>
#include <vector>

namespace ncps {

// ---------------------------------------------------------------------------
// Elementary symmetric polynomials.
//
// All routines use the product expansion prod_k (1 + x_k t) and never
// enumerate subsets, so e_0..e_p costs O(p^2).  They are templates over the
// Eigen scalar type so tests and tight diagnostics can run them in long double.
// ---------------------------------------------------------------------------

/// Coefficients (e_0, e_1, ..., e_p) of prod_k (1 + x_k t).
template <typename Derived>
Vector<typename Derived::Scalar> elem_sym_full(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Index p = x.size();
  Vector<Scalar> e = Vector<Scalar>::Zero(p + 1);
  e[0] = Scalar(1);
  for (Index k = 0; k < p; ++k)
    for (Index n = k + 1; n >= 1; --n) e[n] += x[k] * e[n - 1];
  return e;
}

/// e_n over the coordinates whose `mask` entry is false; e_0 = 1, e_{-1} = 0,
/// and zero for n larger than the number of remaining coordinates.
template <typename Derived>
typename Derived::Scalar elem_sym_masked(const Eigen::MatrixBase<Derived>& x, const std::vector<bool>& mask,
                                         Index n) {
  using Scalar = typename Derived::Scalar;
  if (n < 0) return Scalar(0);
  if (n == 0) return Scalar(1);
  Vector<Scalar> e = Vector<Scalar>::Zero(n + 1);
  e[0] = Scalar(1);
  Index used = 0;
  for (Index k = 0; k < x.size(); ++k) {
    if (mask[static_cast<std::size_t>(k)]) continue;
    ++used;
    for (Index m = std::min(used, n); m >= 1; --m) e[m] += x[k] * e[m - 1];
  }
  return e[n];
}

/// Sum of all degree-n products avoiding the `excluded` indices.
template <typename Derived>
typename Derived::Scalar incomplete_elem_sym(const Eigen::MatrixBase<Derived>& x, std::span<const int> excluded,
                                             Index n) {
  std::vector<bool> mask(static_cast<std::size_t>(x.size()), false);
  for (int i : excluded) mask.at(static_cast<std::size_t>(i)) = true;
  return elem_sym_masked(x, mask, n);
}

/// J(n, i) = e_n^{ī}(x) for n = 0..p-1, from prefix and suffix expansions.
template <typename Derived>
Matrix<typename Derived::Scalar> incomplete_table(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Index p = x.size();
  // prefix.col(k): expansion of the first k coordinates; suffix.col(k): of coordinates k..p-1.
  Matrix<Scalar> prefix = Matrix<Scalar>::Zero(p + 1, p + 1);
  Matrix<Scalar> suffix = Matrix<Scalar>::Zero(p + 1, p + 2);
  prefix(0, 0) = Scalar(1);
  for (Index k = 0; k < p; ++k) {
    prefix.col(k + 1) = prefix.col(k);
    for (Index n = k + 1; n >= 1; --n) prefix(n, k + 1) += x[k] * prefix(n - 1, k);
  }
  suffix(0, p) = Scalar(1);
  for (Index k = p - 1; k >= 0; --k) {
    suffix.col(k) = suffix.col(k + 1);
    for (Index n = p - k; n >= 1; --n) suffix(n, k) += x[k] * suffix(n - 1, k + 1);
  }
  Matrix<Scalar> J = Matrix<Scalar>::Zero(p, p);
  for (Index i = 0; i < p; ++i)
    for (Index n = 0; n < p; ++n) {
      Scalar acc(0);
      for (Index a = 0; a <= std::min(n, i); ++a) {
        const Index b = n - a;
        if (b <= p - 1 - i) acc += prefix(a, i) * suffix(b, i + 1);
      }
      J(n, i) = acc;
    }
  return J;
}

/// Squared gaps (x_i - x_j)^2 for i < j in row-major pair order.
template <typename Derived>
Vector<typename Derived::Scalar> squared_gaps(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Index p = x.size();
  Vector<Scalar> a(p * (p - 1) / 2);
  Index k = 0;
  for (Index i = 0; i < p; ++i)
    for (Index j = i + 1; j < p; ++j) {
      const Scalar d = x[i] - x[j];
      a[k++] = d * d;
    }
  return a;
}

/// V_1..V_N, the elementary symmetric polynomials of the N = p(p-1)/2 squared gaps.
template <typename Derived>
Vector<typename Derived::Scalar> gap_polys(const Eigen::MatrixBase<Derived>& x) {
  const auto e = elem_sym_full(squared_gaps(x));
  return e.tail(e.size() - 1);
}

/// Newton's identities: power sums p_1..p_m from y_1..y_p (y_k = 0 for k > p).
template <typename Derived>
Vector<typename Derived::Scalar> power_sums_from_elem(const Eigen::MatrixBase<Derived>& y, Index m) {
  using Scalar = typename Derived::Scalar;
  const Index p = y.size();
  auto ek = [&](Index k) { return k <= p ? y[k - 1] : Scalar(0); };
  Vector<Scalar> ps(m);
  for (Index k = 1; k <= m; ++k) {
    Scalar acc = (k % 2 == 1 ? Scalar(1) : Scalar(-1)) * Scalar(k) * ek(k);
    for (Index i = 1; i < k; ++i) acc += ((i - 1) % 2 == 0 ? Scalar(1) : Scalar(-1)) * ek(i) * ps[k - i - 1];
    ps[k - 1] = acc;
  }
  return ps;
}

PolyPoint elem_sym(const ChamberPoint& x);

double incomplete_elem_sym(const ChamberPoint& x, std::span<const int> excluded, int n);

// ---------------------------------------------------------------------------
// Chamber recovery: ascending real roots of
//   z^p - y_1 z^{p-1} + y_2 z^{p-2} - ... + (-1)^p y_p.
// ---------------------------------------------------------------------------

struct RootRecovery {
  VectorXd roots;        ///< ascending; conjugate pairs replaced by their real part
  double max_imag = 0.0; ///< largest |Im| among the raw eigenvalues
  int collapsed_pairs = 0;
};

/// Companion-matrix eigenvalues (balanced) followed by two guarded Newton steps per real root.
RootRecovery recover_roots(const PolyPoint& y);

/// Newton iteration from `guess` (the previous state of a path); falls back
/// to recover_roots unless it converges to p distinct ascending real roots.
RootRecovery recover_roots_near(const PolyPoint& y, const VectorXd& guess);

/// Default conjugate-pair collapse threshold, 1e-7 * max(1, |y|).
double default_root_tolerance(const PolyPoint& y);

/// Throws NonRealRootsError when an imaginary part exceeds `tol`.
ChamberPoint poly_to_chamber(const PolyPoint& y, double tol);
inline ChamberPoint poly_to_chamber(const PolyPoint& y) { return poly_to_chamber(y, default_root_tolerance(y)); }

// ---------------------------------------------------------------------------
// Singularity-free dynamics.
// ---------------------------------------------------------------------------

/// Coefficients of dy_n = a_n dU_n + q_n dt with d<y_n, y_m> = S(n, m) dt.
struct PolyDynamics {
  VectorXd a;
  VectorXd q;
  MatrixXd S;
  MatrixXd J;  ///< J(n, i) = e_{n}^{ī}(x), i.e. row n holds the coefficients of dx_i in dy_{n+1}
};

/// Drift q_n = sum_i b_i e_{n-1}^{ī} - sum_{i<j} H_ij e_{n-2}^{ī,j̄} for n = 1..p.
VectorXd poly_drift(const CoefficientSet& cs, const ChamberPoint& x, const MatrixXd& J);

PolyDynamics poly_dynamics(const CoefficientSet& cs, const ChamberPoint& x);

/// Drift and quadratic-variation rates of the gap polynomials V_1..V_N.
struct GapDynamics {
  VectorXd V;
  VectorXd D;
  VectorXd QV;
};

/// Evaluates the drift with the fourth (cross-interaction) term regrouped so
/// that no (x_i - x_k)^{-1} factor remains; valid at any collision.
GapDynamics gap_dynamics(const CoefficientSet& cs, const ChamberPoint& x);

/// Finite-variation rate of U = -1/2 ln V_N.  Requires a collision-free x
/// (throws SingularityError otherwise).
template <typename Scalar = double>
Scalar log_vandermonde_drift(const CoefficientSet& cs, const ChamberPoint& x) {
  const int p = cs.size();
  for (int i = 0; i + 1 < p; ++i)
    if (gap_is_singular(x[i], x[i + 1]))
      throw SingularityError("log_vandermonde_drift: collided state");
  std::vector<Scalar> lam(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) lam[static_cast<std::size_t>(i)] = Scalar(x[i]);
  auto L = [&](int i) { return lam[static_cast<std::size_t>(i)]; };
  auto H = [&](int i, int j) { return Scalar(cs.H(i, j, x[i], x[j])); };

  Scalar pair_drift(0), pair_noise(0), triple(0);
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j) {
      const Scalar g = L(j) - L(i);
      pair_drift += (Scalar(cs.drift(i, x[i])) - Scalar(cs.drift(j, x[j]))) / g;
      const Scalar si = Scalar(cs.sigma(i, x[i])), sj = Scalar(cs.sigma(j, x[j]));
      pair_noise += (si * si + sj * sj - Scalar(4) * H(i, j)) / (g * g);
    }
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j)
      for (int k = j + 1; k < p; ++k) {
        const Scalar num = H(j, k) * (L(k) - L(j)) - H(i, k) * (L(k) - L(i)) + H(i, j) * (L(j) - L(i));
        triple += num / ((L(k) - L(j)) * (L(k) - L(i)) * (L(j) - L(i)));
      }
  return pair_drift + pair_noise / Scalar(2) + triple;
}

}  // namespace ncps
