#pragma once

#include <cstdint>
#include <vector>

#include "netate/rng.hpp"

namespace netate {

// Bernoulli design: each unit treated independently with probability r1.
struct Design {
  double r1;

  explicit Design(double treated_prob);
  double r0() const { return 1.0 - r1; }
};

struct Assignment {
  std::vector<std::uint8_t> z;

  int n() const { return static_cast<int>(z.size()); }
  int treated_count() const;
  bool treated(int i) const { return z[i] != 0; }
};

Assignment draw_assignment(const Design& d, int n, Pcg32& stream);

}  // namespace netate
