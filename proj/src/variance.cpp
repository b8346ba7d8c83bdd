#include "netate/variance.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace netate {

std::string estimand_label(EstimandKind kind) {
  switch (kind) {
    case EstimandKind::kDir: return "DIR";
    case EstimandKind::kInd: return "IND";
    case EstimandKind::kTot: return "TOT";
    case EstimandKind::kEvInd: return "EV_IND";
    case EstimandKind::kEvTot: return "EV_TOT";
  }
  return "?";
}

double var_dir_hat(std::span<const double> y, const Assignment& z, const Design& d) {
  if (y.size() != z.z.size()) throw std::invalid_argument("length mismatch");
  const double n2 = static_cast<double>(y.size()) * static_cast<double>(y.size());
  double treated = 0.0, control = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    (z.z[i] ? treated : control) += y[i] * y[i];
  return treated / (n2 * d.r1 * d.r1) + control / (n2 * d.r0() * d.r0());
}

namespace {

// The four-term weighted sum of squares shared by the IND/TOT estimators.
// `ego` contributes the unit's own outcome inside the squares (zero span for
// the IND form); `neighbor` feeds the in-neighbor totals.
double neighbor_total_variance(std::span<const double> ego, std::span<const double> neighbor,
                               const Assignment& z, const DirectedGraph& g, const Design& d) {
  const int n = g.n();
  if (static_cast<int>(neighbor.size()) != n || z.n() != n)
    throw std::invalid_argument("length mismatch");
  if (!ego.empty() && static_cast<int>(ego.size()) != n)
    throw std::invalid_argument("length mismatch");
  const double r1 = d.r1;
  const double r0 = d.r0();
  std::vector<double> t1(static_cast<std::size_t>(n), 0.0);
  std::vector<double> t0(static_cast<std::size_t>(n), 0.0);
  for (int j = 0; j < n; ++j) {
    double w = z.z[j] ? neighbor[static_cast<std::size_t>(j)] / r1 : 0.0;
    double v = z.z[j] ? 0.0 : neighbor[static_cast<std::size_t>(j)] / r0;
    if (w == 0.0 && v == 0.0) continue;
    for (int i : g.out_neighbors(j)) {
      t1[static_cast<std::size_t>(i)] += w;
      t0[static_cast<std::size_t>(i)] += v;
    }
  }
  const double n2 = static_cast<double>(n) * n;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    double e = ego.empty() ? 0.0 : ego[static_cast<std::size_t>(i)];
    double a = e + t1[static_cast<std::size_t>(i)];
    double b = e + t0[static_cast<std::size_t>(i)];
    if (z.z[i]) {
      sum += a * a / (n2 * r1) + b * b * r0 / (n2 * r1 * r1);
    } else {
      sum += a * a * r1 / (n2 * r0 * r0) + b * b / (n2 * r0);
    }
  }
  return sum;
}

}  // namespace

double var_ind_hat(std::span<const double> y, const Assignment& z, const DirectedGraph& g,
                   const Design& d) {
  return neighbor_total_variance({}, y, z, g, d);
}

double var_tot_hat(std::span<const double> y, const Assignment& z, const DirectedGraph& g,
                   const Design& d) {
  return neighbor_total_variance(y, y, z, g, d);
}

double var_ev_hat(std::span<const double> y, std::span<const double> residuals,
                  const Assignment& z, const DirectedGraph& g, const Design& d,
                  EstimandKind kind) {
  if (residuals.size() != y.size()) throw std::invalid_argument("length mismatch");
  switch (kind) {
    case EstimandKind::kEvInd:
      return neighbor_total_variance({}, residuals, z, g, d);
    case EstimandKind::kEvTot:
      return neighbor_total_variance(y, residuals, z, g, d);
    default:
      throw std::invalid_argument("var_ev_hat expects an EV estimand kind");
  }
}

EstimateReport wald_ci(EstimandKind kind, double point, double variance_hat, double level,
                       bool doubled) {
  if (variance_hat < 0.0) throw std::invalid_argument("negative variance estimate");
  if (!(level > 0.0) || !(level < 1.0)) throw std::invalid_argument("level must lie in (0,1)");
  EstimateReport r;
  r.estimand = kind;
  r.point = point;
  r.variance_hat = variance_hat;
  r.doubled = doubled;
  r.level = level;
  double half = normal_quantile(0.5 * (1.0 + level)) *
                std::sqrt(variance_hat * (doubled ? 2.0 : 1.0));
  r.ci_low = point - half;
  r.ci_high = point + half;
  return r;
}

// Wichura (1988), algorithm AS241, PPND16.
double normal_quantile(double p) {
  if (!(p > 0.0) || !(p < 1.0)) throw std::invalid_argument("quantile requires p in (0,1)");
  const double q = p - 0.5;
  double r;
  if (std::abs(q) <= 0.425) {
    r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                 6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
               1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
             1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                 3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
               5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
             4.2313330701600911252e+1) * r + 1.0);
  }
  r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
                3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
              4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
              2.05319162663775882187e+0) * r + 1.0);
  } else {
    r -= 5.0;
    value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
              5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -value : value;
}

}  // namespace netate
