#include "netate/rng.hpp"

#include <cmath>
#include <numbers>

namespace netate {

Pcg32::Pcg32(std::uint64_t seed, std::uint64_t stream) {
  inc_ = (stream << 1u) | 1u;
  state_ = 0u;
  next_u32();
  state_ += seed;
  next_u32();
}

std::uint32_t Pcg32::next_u32() {
  std::uint64_t old = state_;
  state_ = old * 6364136223846793005ULL + inc_;
  auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
  auto rot = static_cast<std::uint32_t>(old >> 59u);
  return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
}

std::uint64_t Pcg32::next_u64() {
  std::uint64_t hi = next_u32();
  std::uint64_t lo = next_u32();
  return (hi << 32u) | lo;
}

double Pcg32::next_double() {
  return static_cast<double>(next_u64() >> 11u) * 0x1.0p-53;
}

double Pcg32::next_open() {
  double u = next_double();
  return u > 0.0 ? u : 0x1.0p-53;
}

double Pcg32::next_normal() {
  double u1 = next_open();
  double u2 = next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Pcg32::next_chi2_3() {
  double a = next_normal();
  double b = next_normal();
  double c = next_normal();
  return a * a + b * b + c * c;
}

double Pcg32::next_scaled_t3(double multiplier, double location, double sigma) {
  double z = next_normal();
  double v = next_chi2_3();
  return multiplier * (location + sigma * z / std::sqrt(v / 3.0));
}

}  // namespace netate
