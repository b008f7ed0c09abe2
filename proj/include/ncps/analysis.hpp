#pragma once

#include "ncps/coefficients.hpp"
#include "ncps/integrate.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ncps {

struct CollisionReport {
  std::vector<double> times;
  std::vector<double> min_gap_series;
  std::vector<double> VN_series;
  /// First sample time with min gap > eps; empty if there is none.
  std::optional<double> diffraction_time;
  /// Min gap below tol at some sample after the first.
  bool collision_flag = false;
};

CollisionReport collision_report(const Trajectory& traj, double eps, double tol);

struct EigenSample {
  int beta = 1;
  double t = 0.0;
  std::vector<VectorXd> samples;  // each ascending
};

/// Variance rate of an off-diagonal entry (E|X_ij|^2 = rate * t) that makes
/// E[sum lambda_i^2] of the matrix Brownian motion match the particle rate
/// p + gamma p (p - 1), gamma = beta / 2, given unit-rate diagonal entries.
double oracle_off_diagonal_rate(int beta, int p);

/// Eigenvalues of a real symmetric (beta = 1) or complex Hermitian (beta = 2)
/// Brownian matrix at time t, from zero; diagonal entries N(0, t),
/// off-diagonal entries calibrated by oracle_off_diagonal_rate.
EigenSample matrix_oracle(int beta, int p, double t, std::size_t n, std::uint64_t seed);

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_distance(std::vector<double> a, std::vector<double> b);

enum class Observable { R, E1 };

std::string to_string(Observable o);

struct MomentReport {
  Observable observable = Observable::R;
  double t = 0.0;
  double mean = 0.0;
  double stderr_ = 0.0;
  double predicted = 0.0;
  double z = 0.0;
};

/// Closed-form mean of R_t = sum x_i^2 for constant-kernel Brownian systems
/// (rate p + 2 sum_{i<j} H) or of e_1 for the Wishart families (rate beta p alpha),
/// compared with the ensemble at the sample nearest to t. The initial value is
/// read from the t = 0 sample. Throws std::invalid_argument for other systems.
MomentReport moment_report(const EnsembleStats& ens, const CoefficientSet& cs, double t);

/// The drift rate used by moment_report.
double moment_rate(const CoefficientSet& cs, Observable* which = nullptr);

}  // namespace ncps
