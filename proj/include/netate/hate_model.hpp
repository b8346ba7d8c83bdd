#pragma once

#include <span>
#include <string>
#include <vector>

#include "netate/design.hpp"
#include "netate/graph.hpp"

namespace netate {

// Finite-population potential-outcome parameters. The outcome of unit i
// under assignment z is
//
//   Y_i(z) = alpha_i + theta_i z_i + sum_j gamma~_ij z_j,
//
// where gamma~ is supported exactly on the hidden network's edges; the
// sparse layout makes that support condition structural.
struct HateParameters {
  std::vector<double> alpha;
  std::vector<double> theta;
  HiddenNetwork support;
  std::vector<double> gamma;  // aligned with support's flat edge order

  int n() const { return support.n(); }
  double gamma_entry(int i, int j) const;
  std::span<const double> gamma_row(int i) const;
  // h_i = sum_j gamma~_ij, the total spillover unit i can receive.
  std::vector<double> spillover_totals() const;

  void validate() const;
};

struct BoundDiagnostics {
  double max_abs_alpha = 0.0;
  double max_abs_theta = 0.0;
  double max_scaled_gamma = 0.0;  // max over edges of N~_i |gamma~_ij|
};

// Reported, never enforced: the estimators are exact finite-sample formulas
// whether or not the magnitudes are bounded.
BoundDiagnostics bound_diagnostics(const HateParameters& p);

struct Estimands {
  double tau_dir = 0.0;
  double tau_ind = 0.0;
  double tau_tot = 0.0;
};

std::vector<double> realize_outcomes(const HateParameters& p, const Assignment& z);

Estimands true_estimands(const HateParameters& p);

// Parameter files: CSV `i,alpha,theta` plus a sparse CSV `i,j,gamma`.
void save_parameters(const HateParameters& p, const std::string& alpha_theta_path,
                     const std::string& gamma_path);
HateParameters load_parameters(const std::string& alpha_theta_path,
                               const std::string& gamma_path);

}  // namespace netate
