#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "netate/graph.hpp"
#include "netate/hate_model.hpp"
#include "netate/rng.hpp"

namespace netate {

// Piecewise-constant function on [0,1) with equal-width bins.
struct StepFunction {
  std::vector<double> values{1.0};

  double operator()(double u) const;
  bool constant() const;
};

// One eigenfunction of the low-rank graphon: `const`, `step:v1,v2,...`, or
// `cos:k` for sqrt(2) cos(k pi u).
struct PsiSpec {
  enum class Kind { kConst, kStep, kCos } kind = Kind::kConst;
  StepFunction step;
  int frequency = 1;

  double operator()(double u) const;
  static PsiSpec parse(const std::string& text);
  std::string to_string() const;
};

// G(u, v) = sum_k lambda_k psi_k(u) psi_k(v); edges drawn with probability
// min{1, rho_star * G(u, v)}.
struct GraphonSpec {
  std::vector<double> lambda{1.0};
  std::vector<PsiSpec> psi{PsiSpec{}};

  int rank() const { return static_cast<int>(lambda.size()); }
  double evaluate(double u, double v) const;
};

enum class ScenarioKind { kPartial, kMarketplace, kGraphon, kExternal };
enum class AdjustmentKind { kSpectral, kMergedGroups, kTwoWay, kNone };

struct PartialConfig {
  int group_size = 10;
  int groups = 45;
  int strata = 3;
  std::vector<double> stratum_mu{0.0, 1.0, 2.0};
};

struct MarketplaceConfig {
  int rows = 20;
  int cols = 20;
  int row_strata = 2;
  int col_strata = 2;
  double base_mu = 1.0;
  std::vector<double> row_delta{-1.0, 1.0};
  std::vector<double> col_delta{-1.0, 1.0};
};

struct GraphonConfig {
  int n = 500;
  double rho_star = 0.1;
  GraphonSpec spec;
  StepFunction mu;  // evaluated at the latent U_i; constant 1 by default
};

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::kPartial;
  PartialConfig partial;
  MarketplaceConfig marketplace;
  GraphonConfig graphon;
  std::string external_edge_list;

  double keep_prob = 0.25;  // hidden-network edge retention
  double alpha_sigma = 1.0;
  double theta_multiplier = 0.8;
  double theta_sigma = 0.5;
  double gamma_multiplier = 1.8;
  double gamma_sigma = 0.5;

  double r1 = 0.5;
  AdjustmentKind adjustment = AdjustmentKind::kMergedGroups;
  int k = 0;  // spectral adjustment rank

  std::string to_string() const;
  static ScenarioConfig from_string(const std::string& text);
  static ScenarioConfig load(const std::string& path);
  void save(const std::string& path) const;

  void validate() const;
};

// Block-diagonal union of complete directed graphs: E_ij = 1 iff the units
// share a group.
DirectedGraph partial_interference_graph(int group_size, int groups);

// Grid of buyer-seller pairs; edges join units in the same row or column.
// Unit i maps to (row i / cols, column i % cols).
DirectedGraph marketplace_graph(int rows, int cols);

struct GraphonDraw {
  DirectedGraph graph;
  std::vector<double> u;      // latent positions, recorded for audit
  int clamped_negative = 0;   // G evaluations clipped at zero
};

GraphonDraw graphon_graph(int n, double rho_star, const GraphonSpec& spec, Pcg32& stream);

// Independent edge retention with probability keep_prob.
HiddenNetwork thin_to_hidden(const DirectedGraph& g, double keep_prob, Pcg32& stream);

// Per-unit location parameters mu_i implied by the scenario. The graphon
// scenario needs the recorded U draws when mu varies.
std::vector<double> scenario_mu(const ScenarioConfig& cfg, int n,
                                const std::vector<double>* u = nullptr);

// alpha_i ~ N(mu_i, alpha_sigma); theta_i ~ m_t (mu_i + s_t T3);
// gamma'_ij ~ m_g ((mu_i+mu_j)/2 + s_g T3) on hidden edges, normalized by
// the hidden out-degree.
HateParameters draw_parameters(const ScenarioConfig& cfg, const std::vector<double>& mu,
                               const HiddenNetwork& h, Pcg32& stream);

// Stratum labels for the structural adjustments.
std::vector<int> partial_stratum_labels(const PartialConfig& cfg);
std::vector<int> marketplace_row_labels(const MarketplaceConfig& cfg);
std::vector<int> marketplace_col_labels(const MarketplaceConfig& cfg);
std::vector<int> partial_cluster_labels(const PartialConfig& cfg);

}  // namespace netate
