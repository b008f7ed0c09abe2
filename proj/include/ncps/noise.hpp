#pragma once

#include "ncps/types.hpp"

#include <array>
#include <cstdint>

namespace ncps {

/// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key);

/// Deterministic Gaussian increments addressed by (seed, stream, step, node).
///
/// Nothing is kept between calls: the normals for a step are a pure function
/// of their address, so any worker can regenerate any path, and refinement
/// of a step by Brownian bridging draws from nodes that never collide with
/// the base increments.
class NoisePath {
 public:
  explicit NoisePath(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  /// Independent stream for ensemble path `index`.
  NoisePath substream(std::uint64_t index) const;

  /// p standard normals at (step, node). Node 0 is the base increment of a
  /// step; nodes >= 1 number the Brownian-bridge midpoints of that step as a
  /// binary heap. Nodes must stay below 2^20.
  void normals(std::uint64_t step, std::uint32_t node, Eigen::Ref<VectorXd> out) const;

  /// Brownian increment over [step*dt, (step+1)*dt] built from 2^level
  /// finer base increments, so a path at dt and one at dt/2 (level - 1)
  /// share the same Brownian motion.
  VectorXd increment(std::uint64_t step, int p, double dt, int level = 0) const;

  /// Splits the increment dW over an interval of length h at its midpoint,
  /// returning the first half; the second half is dW minus the result.
  VectorXd bridge_midpoint(std::uint64_t step, std::uint32_t node, const VectorXd& dW, double h) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
};

}  // namespace ncps
