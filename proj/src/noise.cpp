#include "ncps/noise.hpp"

#include <cmath>
#include <numbers>

namespace ncps {
namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Uniform in (0, 1] from the top 53 bits, safe for log().
double unit_open_left(std::uint64_t bits) { return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53; }
double unit_closed_left(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

NoisePath NoisePath::substream(std::uint64_t index) const {
  return NoisePath(seed_, splitmix64(stream_ ^ splitmix64(index + 1)));
}

void NoisePath::normals(std::uint64_t step, std::uint32_t node, Eigen::Ref<VectorXd> out) const {
  // The stream's high word is folded into the key so the counter keeps room
  // for the step, node and lane.
  const std::uint64_t k = seed_ ^ splitmix64(stream_ >> 32);
  const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  const Index n = out.size();
  for (Index lane = 0; 2 * lane < n; ++lane) {
    const std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32),
                                           node | (static_cast<std::uint32_t>(lane) << 20),
                                           static_cast<std::uint32_t>(stream_)};
    const auto r = philox4x32(ctr, key);
    const std::uint64_t a = (static_cast<std::uint64_t>(r[0]) << 32) | r[1];
    const std::uint64_t b = (static_cast<std::uint64_t>(r[2]) << 32) | r[3];
    // Box-Muller.
    const double rad = std::sqrt(-2.0 * std::log(unit_open_left(a)));
    const double ang = 2.0 * std::numbers::pi * unit_closed_left(b);
    out[2 * lane] = rad * std::cos(ang);
    if (2 * lane + 1 < n) out[2 * lane + 1] = rad * std::sin(ang);
  }
}

VectorXd NoisePath::increment(std::uint64_t step, int p, double dt, int level) const {
  VectorXd dW = VectorXd::Zero(p);
  VectorXd z(p);
  const std::uint64_t parts = std::uint64_t{1} << level;
  for (std::uint64_t m = 0; m < parts; ++m) {
    normals(step * parts + m, 0, z);
    dW += z;
  }
  return dW * std::sqrt(dt / static_cast<double>(parts));
}

VectorXd NoisePath::bridge_midpoint(std::uint64_t step, std::uint32_t node, const VectorXd& dW, double h) const {
  VectorXd z(dW.size());
  normals(step, node, z);
  return 0.5 * dW + 0.5 * std::sqrt(h) * z;
}

}  // namespace ncps
