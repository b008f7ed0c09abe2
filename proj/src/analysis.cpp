#include "ncps/analysis.hpp"

#include "ncps/noise.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>

namespace ncps {

CollisionReport collision_report(const Trajectory& traj, double eps, double tol) {
  CollisionReport r;
  r.times = traj.times;
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const ChamberPoint& x = traj.states[k];
    const double g = x.size() >= 2 ? x.min_gap() : std::numeric_limits<double>::infinity();
    r.min_gap_series.push_back(g);
    r.VN_series.push_back(vandermonde_squared(x));
    if (!r.diffraction_time && g > eps) r.diffraction_time = traj.times[k];
    if (k > 0 && g < tol) r.collision_flag = true;
  }
  return r;
}

double oracle_off_diagonal_rate(int beta, int p) {
  if (beta != 1 && beta != 2) throw std::invalid_argument("matrix oracle supports beta = 1 or 2");
  if (p < 2) return 0.0;
  const double gamma = beta / 2.0;
  const double rate = p + gamma * p * (p - 1);
  // E tr X_t^2 = t (p * 1 + p (p - 1) * v_off).
  return (rate - p) / (p * (p - 1.0));
}

EigenSample matrix_oracle(int beta, int p, double t, std::size_t n, std::uint64_t seed) {
  if (beta != 1 && beta != 2) throw std::invalid_argument("matrix oracle supports beta = 1 or 2");
  if (p < 1) throw std::invalid_argument("matrix oracle needs p >= 1");
  EigenSample out;
  out.beta = beta;
  out.t = t;
  const double sd_diag = std::sqrt(t);
  const double v_off = oracle_off_diagonal_rate(beta, p) * t;
  const NoisePath rng(seed, 0x6d61747269780000ull);
  const int draws = p + (beta == 1 ? 1 : 2) * p * (p - 1) / 2;
  VectorXd z(draws);
  for (std::size_t s = 0; s < n; ++s) {
    rng.normals(s, 0, z);
    int k = 0;
    VectorXd ev;
    if (beta == 1) {
      MatrixXd M(p, p);
      for (int i = 0; i < p; ++i) M(i, i) = sd_diag * z[k++];
      for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j) M(i, j) = M(j, i) = std::sqrt(v_off) * z[k++];
      ev = Eigen::SelfAdjointEigenSolver<MatrixXd>(M, Eigen::EigenvaluesOnly).eigenvalues();
    } else {
      Eigen::MatrixXcd M(p, p);
      for (int i = 0; i < p; ++i) M(i, i) = sd_diag * z[k++];
      // Real and imaginary parts share the off-diagonal variance equally.
      const double sd_part = std::sqrt(v_off / 2.0);
      for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j) {
          const std::complex<double> w(sd_part * z[k], sd_part * z[k + 1]);
          k += 2;
          M(i, j) = w;
          M(j, i) = std::conj(w);
        }
      ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(M, Eigen::EigenvaluesOnly).eigenvalues();
    }
    std::sort(ev.data(), ev.data() + ev.size());
    out.samples.push_back(std::move(ev));
  }
  return out;
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_distance: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return d;
}

std::string to_string(Observable o) { return o == Observable::R ? "R" : "e1"; }

double moment_rate(const CoefficientSet& cs, Observable* which) {
  const int p = cs.size();
  if (!cs.preset()) throw std::invalid_argument("moment_report: no closed-form rate for custom systems");
  const auto& pr = *cs.preset();
  if (const auto* d = std::get_if<DysonCepa>(&pr)) {
    if (which) *which = Observable::R;
    return p + d->gamma * p * (p - 1);
  }
  if (const auto* d = std::get_if<NearestNeighbor>(&pr)) {
    if (which) *which = Observable::R;
    return p + 2.0 * d->gamma * (p - 1);
  }
  if (const auto* d = std::get_if<BetaWishart>(&pr)) {
    if (which) *which = Observable::E1;
    return d->beta * p * d->alpha;
  }
  if (const auto* d = std::get_if<BetaWishartAbs>(&pr)) {
    if (which) *which = Observable::E1;
    return d->beta * p * d->alpha;
  }
  throw std::invalid_argument("moment_report: no closed-form rate for preset " + preset_name(pr));
}

MomentReport moment_report(const EnsembleStats& ens, const CoefficientSet& cs, double t) {
  if (ens.times.empty()) throw std::invalid_argument("moment_report: empty ensemble");
  MomentReport r;
  const double rate = moment_rate(cs, &r.observable);
  const auto& series = r.observable == Observable::R ? ens.R : ens.e1;
  const std::size_t k = ens.time_index(t);
  r.t = ens.times[k];
  r.mean = series[k].mean;
  r.stderr_ = series[k].stderr_;
  r.predicted = series[0].mean + rate * r.t;
  const double diff = r.mean - r.predicted;
  r.z = r.stderr_ > 0.0 ? diff / r.stderr_ : (diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff));
  return r;
}

}  // namespace ncps
