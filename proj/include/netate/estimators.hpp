#pragma once

#include <Eigen/Dense>
#include <span>

#include "netate/adjustment.hpp"
#include "netate/design.hpp"
#include "netate/graph.hpp"

namespace netate {

// Horvitz-Thompson estimator of the direct average treatment effect:
//   N^{-1} sum_i { Y_i Z_i / r1 - Y_i (1 - Z_i) / r0 }.
// A pure weighted sum; defined even when one arm is empty.
double ht_direct(std::span<const double> y, const Assignment& z, const Design& d);

// Horvitz-Thompson estimator of the indirect average treatment effect:
//   N^{-1} sum_i sum_j E_ij { Y_i Z_j / r1 - Y_i (1 - Z_j) / r0 },
// evaluated as N^{-1} sum_i Y_i sum_{j in out(i)} (Z_j - r1) / (r1 r0).
double ht_indirect(std::span<const double> y, const Assignment& z, const DirectedGraph& g,
                   const Design& d);

double ht_total(std::span<const double> y, const Assignment& z, const DirectedGraph& g,
                const Design& d);

struct EvEstimate {
  double value = 0.0;
  ArmRegression regression;
};

// Eigenvector-adjusted IATE: the indirect estimator applied to the
// within-arm regression residuals of y on w. Requires both arms to hold at
// least as many units as w has columns.
EvEstimate ev_adjusted_indirect(std::span<const double> y, const Assignment& z,
                                const DirectedGraph& g, const Eigen::MatrixXd& w,
                                const Design& d);

// ht_direct on the raw outcomes plus the adjusted indirect estimator.
EvEstimate ev_adjusted_total(std::span<const double> y, const Assignment& z,
                             const DirectedGraph& g, const Eigen::MatrixXd& w, const Design& d);

}  // namespace netate
