#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "netate/design.hpp"
#include "netate/graph.hpp"
#include "netate/rng.hpp"

namespace netate {

// Top-K eigenpairs of E E^T together with the whitened regression covariates
// W = [1, V_1, ..., V_K] satisfying N^{-1} sum_i W_i W_i^T = I_{K+1}.
struct SpectralBasis {
  int k = 0;
  std::vector<double> eigenvalues;       // lambda_1 >= ... >= lambda_K
  double next_eigenvalue_bound = 0.0;    // (K+1)-th Ritz value
  Eigen::MatrixXd w;                     // n x (K+1)
  std::vector<std::string> warnings;
};

// Lanczos with full reorthogonalization on the matrix-free operator
// v -> E (E^T v). Random start vector from `stream`. Throws on
// non-convergence, with the worst Ritz residual in the message.
SpectralBasis top_k_spectrum(const DirectedGraph& g, int k, double tol = 1e-10,
                             int max_iter = 0, Pcg32* stream = nullptr);

struct ArmRegression {
  Eigen::VectorXd beta1;
  Eigen::VectorXd beta0;
  std::vector<double> residuals;         // e_i = y_i - beta_{z_i}^T W_i, all units
  bool rank_deficient = false;
  std::vector<std::string> warnings;
};

// Separate least-squares fits of y on the rows of w within each treatment
// arm. A singular arm Gram matrix falls back to the minimum-norm solution
// (truncated SVD, relative cutoff 1e-10) with a rank-deficiency warning.
// A zero-column w is the forced zero fit: residuals equal y.
ArmRegression within_arm_ols(std::span<const double> y, const Assignment& z,
                             const Eigen::MatrixXd& w);

struct CovariateMatrix {
  Eigen::MatrixXd w;
  std::vector<std::string> warnings;
};

// Merged-group indicators: intercept plus one column per stratum except the
// last, whitened. Strata labels must cover 0..S-1 with no empty stratum.
CovariateMatrix merged_group_covariates(std::span<const int> strata);

// Two-way indicators: intercept + (row strata - 1) + (column strata - 1)
// columns, whitened; rank-deficient combinations are reduced to a basis.
CovariateMatrix two_way_covariates(std::span<const int> row_strata,
                                   std::span<const int> col_strata);

enum class WhitenPolicy {
  kReduceToBasis,   // drop numerically dependent directions
  kCompleteBasis,   // keep the column count, fill with orthonormal vectors
};

// Transforms the columns of `raw` so that raw^T raw / n = I. Used by both
// the spectral and the structural covariate builders.
Eigen::MatrixXd whiten_columns(const Eigen::MatrixXd& raw, WhitenPolicy policy,
                               std::vector<std::string>* warnings);

}  // namespace netate
