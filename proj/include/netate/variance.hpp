#pragma once

#include <span>
#include <string>

#include "netate/design.hpp"
#include "netate/graph.hpp"

namespace netate {

enum class EstimandKind { kDir, kInd, kTot, kEvInd, kEvTot };

std::string estimand_label(EstimandKind kind);

// V_DIR^ = sum_i Z_i Y_i^2 / (N^2 r1^2) + sum_i (1-Z_i) Y_i^2 / (N^2 r0^2).
double var_dir_hat(std::span<const double> y, const Assignment& z, const Design& d);

// Weighted sum of squares of the per-unit treated/control in-neighbor
// outcome totals T_i^(1) = sum_j E_ji Y_j Z_j / r1 and
// T_i^(0) = sum_j E_ji Y_j (1-Z_j) / r0, computed in one sparse pass.
double var_ind_hat(std::span<const double> y, const Assignment& z, const DirectedGraph& g,
                   const Design& d);

// As var_ind_hat with the unit's own outcome added inside each square.
double var_tot_hat(std::span<const double> y, const Assignment& z, const DirectedGraph& g,
                   const Design& d);

// Adjusted-estimator variance estimates. kEvInd evaluates var_ind_hat on
// the residuals; kEvTot keeps the raw outcome in the ego position and
// builds the neighbor totals from the residuals.
double var_ev_hat(std::span<const double> y, std::span<const double> residuals,
                  const Assignment& z, const DirectedGraph& g, const Design& d,
                  EstimandKind kind);

struct EstimateReport {
  EstimandKind estimand = EstimandKind::kDir;
  double point = 0.0;
  double variance_hat = 0.0;
  bool doubled = false;
  double level = 0.95;
  double ci_low = 0.0;
  double ci_high = 0.0;

  double ci_length() const { return ci_high - ci_low; }
  bool covers(double value) const { return ci_low <= value && value <= ci_high; }
};

// point +- z_{(1+level)/2} sqrt(variance_hat * (doubled ? 2 : 1)). The
// un-doubled interval is the primary report.
EstimateReport wald_ci(EstimandKind kind, double point, double variance_hat, double level,
                       bool doubled);

// Standard normal quantile (Wichura's AS241 rational approximation,
// absolute error well below 1e-9 over (0,1)).
double normal_quantile(double p);

}  // namespace netate
