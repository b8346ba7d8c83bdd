#pragma once

#include <cstdint>
#include <string_view>

namespace netate {

// Identifier embedded in reports so a result can be tied to the generator
// that produced it.
inline constexpr std::string_view kRngId = "pcg32";

// Minimal PCG32 generator (O'Neill's XSH-RR variant). The stream selector
// makes it splittable: Pcg32(seed, r) and Pcg32(seed, r') produce
// statistically independent sequences for r != r', which is how Monte Carlo
// replications get order-independent, bit-reproducible randomness.
class Pcg32 {
 public:
  Pcg32() : Pcg32(0x853c49e6748fea9bULL, 0) {}
  Pcg32(std::uint64_t seed, std::uint64_t stream);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  // Uniform double in [0, 1) with 53 random bits.
  double next_double();

  // Uniform double in (0, 1); never returns an endpoint, safe under log().
  double next_open();

  bool next_bernoulli(double p) { return next_double() < p; }

  // One standard normal via Box-Muller; consumes exactly two uniforms.
  double next_normal();
  double next_normal(double mean, double sd) { return mean + sd * next_normal(); }

  // Chi-squared with 3 degrees of freedom (sum of three squared normals).
  double next_chi2_3();

  // multiplier * (location + sigma * T) where T is standard t with 3 df.
  double next_scaled_t3(double multiplier, double location, double sigma);

 private:
  std::uint64_t state_;
  std::uint64_t inc_;
};

// Stream for replication r of a run keyed by master_seed. Stream 0 is
// reserved for population-level draws; replication r uses stream r + 1.
inline Pcg32 replication_stream(std::uint64_t master_seed, std::uint64_t replication) {
  return Pcg32(master_seed, replication + 1);
}
inline Pcg32 population_stream(std::uint64_t master_seed) {
  return Pcg32(master_seed, 0);
}

}  // namespace netate
