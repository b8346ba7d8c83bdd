#include "netate/estimators.hpp"

#include <stdexcept>

namespace netate {

namespace {

void check_lengths(std::span<const double> y, const Assignment& z, int n) {
  if (static_cast<int>(y.size()) != n || z.n() != n)
    throw std::invalid_argument("outcome/assignment length mismatch");
}

}  // namespace

double ht_direct(std::span<const double> y, const Assignment& z, const Design& d) {
  check_lengths(y, z, z.n());
  if (y.size() != z.z.size()) throw std::invalid_argument("length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    sum += z.z[i] ? y[i] / d.r1 : -y[i] / d.r0();
  return sum / static_cast<double>(y.size());
}

double ht_indirect(std::span<const double> y, const Assignment& z, const DirectedGraph& g,
                   const Design& d) {
  check_lengths(y, z, g.n());
  const double scale = 1.0 / (d.r1 * d.r0());
  double sum = 0.0;
  for (int i = 0; i < g.n(); ++i) {
    double s = 0.0;
    for (int j : g.out_neighbors(i)) s += static_cast<double>(z.z[j]) - d.r1;
    sum += y[static_cast<std::size_t>(i)] * s * scale;
  }
  return sum / g.n();
}

double ht_total(std::span<const double> y, const Assignment& z, const DirectedGraph& g,
                const Design& d) {
  return ht_direct(y, z, d) + ht_indirect(y, z, g, d);
}

namespace {

void check_arm_sizes(const Assignment& z, const Eigen::MatrixXd& w) {
  const auto needed = static_cast<int>(w.cols());
  int treated = z.treated_count();
  int control = z.n() - treated;
  if (treated == 0 || control == 0) throw std::invalid_argument("arm has no units");
  if (treated < needed || control < needed)
    throw std::invalid_argument("arm smaller than the number of regressors (" +
                                std::to_string(needed) + ")");
}

}  // namespace

EvEstimate ev_adjusted_indirect(std::span<const double> y, const Assignment& z,
                                const DirectedGraph& g, const Eigen::MatrixXd& w,
                                const Design& d) {
  check_lengths(y, z, g.n());
  if (w.cols() > 0) check_arm_sizes(z, w);
  EvEstimate out;
  out.regression = within_arm_ols(y, z, w);
  out.value = ht_indirect(out.regression.residuals, z, g, d);
  return out;
}

EvEstimate ev_adjusted_total(std::span<const double> y, const Assignment& z,
                             const DirectedGraph& g, const Eigen::MatrixXd& w, const Design& d) {
  EvEstimate out = ev_adjusted_indirect(y, z, g, w, d);
  out.value += ht_direct(y, z, d);
  return out;
}

}  // namespace netate
