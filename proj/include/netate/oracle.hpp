#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "netate/design.hpp"
#include "netate/graph.hpp"
#include "netate/hate_model.hpp"
#include "netate/rng.hpp"
#include "netate/variance.hpp"

namespace netate {

// Exact finite-population verification tools. Everything here enumerates or
// evaluates closed forms at small n; nothing is sampled.

struct VarianceDecomposition {
  double component1 = 0.0;  // linear-part variance
  double component2 = 0.0;  // quadratic-part variance
  double total() const { return component1 + component2; }
};

// Closed-form conditional expectations of outcomes over the Bernoulli
// design:
//   E(Y_i | Z_i = z)           = alpha_i + theta_i z + r1 h_i
//   E(Y_i | Z_i = z, Z_j = z') = alpha_i + theta_i z + gamma~_ij z'
//                                 + r1 (h_i - gamma~_ij),   j != i.
class ConditionalMeans {
 public:
  ConditionalMeans(const HateParameters& p, const Design& d);

  double given_own(int i, int z) const;
  double given_own_and_other(int i, int z_i, int j, int z_j) const;

 private:
  const HateParameters* params_;
  std::vector<double> h_;
  double r1_;
};

ConditionalMeans conditional_means(const HateParameters& p, const Design& d);

// Exact variance decomposition of the DIR/IND/TOT estimators, evaluated
// literally from the linear/quadratic kernels.
VarianceDecomposition closed_form_variance(EstimandKind kind, const HateParameters& p,
                                           const DirectedGraph& g, const Design& d);

// General form for the plug-in total estimator whose direct part uses the
// `ego` parameters and whose indirect part is applied to outcomes generated
// by the `neighbor` parameters. With neighbor = oracle residual parameters
// this yields the adjusted estimators' variance decompositions.
VarianceDecomposition closed_form_variance_mixed(EstimandKind kind, const HateParameters& ego,
                                                 const HateParameters& neighbor,
                                                 const DirectedGraph& g, const Design& d);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

using Statistic = std::function<double(const Assignment&, std::span<const double>)>;

// Exact design moments: mean and variance of each statistic over all 2^n
// assignments weighted by r1^{#treated} r0^{n-#treated}. Assignments are
// visited in Gray-code order so outcomes update incrementally; accumulation
// is compensated because conservativeness margins can be tiny.
std::vector<Moments> enumerate_joint_moments(const HateParameters& p, const Design& d,
                                             std::span<const Statistic> statistics,
                                             int max_n = 14);

enum class StatisticId { kTauDir, kTauInd, kTauTot, kVhatDir, kVhatInd, kVhatTot };

Moments enumerate_moments(const HateParameters& p, const DirectedGraph& g, const Design& d,
                          StatisticId statistic, int max_n = 14);

Statistic make_statistic(StatisticId id, const DirectedGraph& g, const Design& d);

// Oracle regression with fixed (non-random) coefficients
// beta_{z,ora} = N^{-1} sum_i W_i E(Y_i | Z_i = z), requiring whitened W.
// The residual e_i is itself an outcome of the substituted parameter triple
// (alpha - beta0^T W, theta residualized on W, gamma~), which is how the
// adjusted variance decompositions are evaluated.
struct OracleResiduals {
  Eigen::VectorXd beta1_ora;
  Eigen::VectorXd beta0_ora;
  HateParameters residual_params;
  std::vector<double> e_treated;  // e_{Z_i=1}
  std::vector<double> e_control;  // e_{Z_i=0}
  double delta_n = 0.0;
  VarianceDecomposition ev_ind;
  VarianceDecomposition ev_tot;
};

OracleResiduals oracle_adjustment(const HateParameters& p, const DirectedGraph& g,
                                  const Eigen::MatrixXd& w, const Design& d);

struct RandomInstance {
  DirectedGraph graph;
  HateParameters params;
};

// Seeded dense-ish instance with hidden thinning and reciprocal edges, so
// both variance components are exercised.
RandomInstance make_random_instance(int n, Pcg32& stream);

struct IdentityCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double tolerance = 0.0;
  bool one_sided = false;  // pass iff lhs >= rhs - tolerance
  bool pass = false;
};

// Runs every proposition/theorem identity on a seeded random instance.
// `tamper_variance` perturbs one variance formula as a negative control.
std::vector<IdentityCheck> oracle_check(std::uint64_t seed, int n, double r1,
                                        bool tamper_variance = false);

}  // namespace netate
