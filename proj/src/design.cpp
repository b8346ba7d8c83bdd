#include "netate/design.hpp"

#include <numeric>
#include <stdexcept>

namespace netate {

Design::Design(double treated_prob) : r1(treated_prob) {
  if (!(r1 > 0.0) || !(r1 < 1.0))
    throw std::invalid_argument("treatment probability must lie strictly in (0,1)");
}

int Assignment::treated_count() const {
  return std::accumulate(z.begin(), z.end(), 0, [](int acc, std::uint8_t v) { return acc + v; });
}

Assignment draw_assignment(const Design& d, int n, Pcg32& stream) {
  if (n < 1) throw std::invalid_argument("assignment requires n >= 1");
  Assignment a;
  a.z.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) a.z[i] = stream.next_bernoulli(d.r1) ? 1 : 0;
  return a;
}

}  // namespace netate
