#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace ncps {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using VectorXd = Vector<double>;
using VectorXld = Vector<long double>;
using MatrixXd = Matrix<double>;
using Index = Eigen::Index;

/// Raised when a pairwise term H_ij/(x_i - x_j) is evaluated across a collapsed gap.
class SingularityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The polynomial with the given elementary symmetric coefficients has
/// roots whose imaginary parts exceed the recovery tolerance.
class NonRealRootsError : public std::runtime_error {
 public:
  NonRealRootsError(const std::string& what, double max_imag)
      : std::runtime_error(what), max_imag_(max_imag) {}
  double max_imag() const { return max_imag_; }

 private:
  double max_imag_;
};

class ExplosionError : public std::runtime_error {
 public:
  ExplosionError(const std::string& what, double time)
      : std::runtime_error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// Particle positions x_1 <= ... <= x_p, a point of the closed Weyl chamber.
class ChamberPoint {
 public:
  ChamberPoint() = default;

  /// Throws std::invalid_argument unless `x` is finite and ascending.
  explicit ChamberPoint(VectorXd x) : x_(std::move(x)) {
    for (Index i = 0; i < x_.size(); ++i) {
      if (!std::isfinite(x_[i]))
        throw std::invalid_argument("ChamberPoint: non-finite coordinate");
      if (i > 0 && x_[i] < x_[i - 1])
        throw std::invalid_argument("ChamberPoint: coordinates are not ascending");
    }
  }

  /// Sorts `x` ascending before wrapping it.
  static ChamberPoint sorted(VectorXd x) {
    std::sort(x.data(), x.data() + x.size());
    return ChamberPoint(std::move(x));
  }

  const VectorXd& coords() const { return x_; }
  Index size() const { return x_.size(); }
  double operator[](Index i) const { return x_[i]; }

  /// Smallest adjacent gap; +inf for fewer than two particles.
  double min_gap() const {
    double g = std::numeric_limits<double>::infinity();
    for (Index i = 1; i < x_.size(); ++i) g = std::min(g, x_[i] - x_[i - 1]);
    return g;
  }

  bool operator==(const ChamberPoint& other) const { return x_ == other.x_; }

 private:
  VectorXd x_;
};

/// Elementary symmetric coordinates y_n = e_n(x), n = 1..p.
///
/// Held in extended precision: the roots of the monic polynomial are
/// ill-conditioned in its coefficients (for a dozen unit-spaced particles a
/// coefficient rounding of 1e-16 already moves the roots by ~1e-6).
class PolyPoint {
 public:
  PolyPoint() = default;
  explicit PolyPoint(VectorXld y) : y_(std::move(y)) {}
  explicit PolyPoint(const VectorXd& y) : y_(y.cast<long double>()) {}

  const VectorXld& coords() const { return y_; }
  VectorXd to_double() const { return y_.cast<double>(); }
  Index size() const { return y_.size(); }
  long double operator[](Index n) const { return y_[n]; }

 private:
  VectorXld y_;
};

}  // namespace ncps
