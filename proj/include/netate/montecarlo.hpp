#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "netate/adjustment.hpp"
#include "netate/design.hpp"
#include "netate/generators.hpp"
#include "netate/graph.hpp"
#include "netate/hate_model.hpp"

namespace netate {

struct MonteCarloSummary {
  std::string estimator;
  double truth = 0.0;
  double bias = 0.0;
  double sd = 0.0;    // sample standard deviation, R-1 denominator
  double rmse = 0.0;  // sqrt of the mean squared error about the truth
  double cp = 0.0;    // coverage of the un-doubled 95% Wald interval
  double mean_ci_length = 0.0;
  int replications = 0;
  int failures = 0;
};

// One fixed population: graph, hidden network, parameters, and the
// adjustment covariates, all drawn from stream (master_seed, 0).
struct Population {
  ScenarioConfig config;
  DirectedGraph graph;
  HiddenNetwork hidden;
  HateParameters params;
  Eigen::MatrixXd w;  // zero columns when adjustment is disabled
  std::vector<double> spectrum;
  double next_eigenvalue_bound = 0.0;
  Estimands truth;
  std::vector<int> cluster_labels;  // partial scenario only
  std::vector<std::string> warnings;
};

Population build_population(const ScenarioConfig& cfg, std::uint64_t master_seed);

struct SimulationResult {
  std::vector<std::string> estimator_names;
  std::vector<MonteCarloSummary> rows;
  // points[r][e] / var_hats[r][e]; NaN on failed replications.
  std::vector<std::vector<double>> points;
  std::vector<std::vector<double>> var_hats;
  std::vector<std::uint8_t> failed;
  int failures = 0;
};

// Fixed population, R independent Bernoulli replications; replication r
// draws from stream (master_seed, r+1), so results are bit-identical for
// any worker count. Throws if more than 1% of replications fail.
SimulationResult run_replications(const ScenarioConfig& cfg, int replications,
                                  std::uint64_t master_seed, int threads = 1);

// Difference in means under cluster-level Bernoulli assignment, paired with
// the Neyman-type variance estimator on cluster-aggregated outcomes.
struct ClusterDraw {
  double point = 0.0;
  double var_hat = 0.0;
};

double cluster_randomization_estimate(const HateParameters& p,
                                      std::span<const int> cluster_labels,
                                      const Assignment& cluster_assignment, const Design& d,
                                      double* var_hat = nullptr);

ClusterDraw cluster_randomization_baseline(const HateParameters& p,
                                           std::span<const int> cluster_labels, const Design& d,
                                           Pcg32& stream);

// Summary CSV: one row per estimator with columns
// estimator,true,bias,sd,rmse,cp,length,R,failures.
void write_summary_csv(std::ostream& out, const std::vector<MonteCarloSummary>& rows);
std::vector<MonteCarloSummary> parse_summary_csv(std::istream& in);

// Per-replication point estimates, one row per replication.
void write_replication_matrix(std::ostream& out, const SimulationResult& result);

}  // namespace netate
