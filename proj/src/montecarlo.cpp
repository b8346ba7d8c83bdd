#include "netate/montecarlo.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "netate/estimators.hpp"
#include "netate/variance.hpp"

namespace netate {

namespace {

constexpr double kCiLevel = 0.95;

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

Population build_population(const ScenarioConfig& cfg, std::uint64_t master_seed) {
  cfg.validate();
  Population pop;
  pop.config = cfg;
  Pcg32 stream = population_stream(master_seed);

  std::vector<double> latent_u;
  switch (cfg.kind) {
    case ScenarioKind::kPartial:
      pop.graph = partial_interference_graph(cfg.partial.group_size, cfg.partial.groups);
      pop.cluster_labels = partial_cluster_labels(cfg.partial);
      break;
    case ScenarioKind::kMarketplace:
      pop.graph = marketplace_graph(cfg.marketplace.rows, cfg.marketplace.cols);
      break;
    case ScenarioKind::kGraphon: {
      GraphonDraw draw = graphon_graph(cfg.graphon.n, cfg.graphon.rho_star, cfg.graphon.spec,
                                       stream);
      pop.graph = std::move(draw.graph);
      latent_u = std::move(draw.u);
      if (draw.clamped_negative > 0)
        pop.warnings.push_back(std::to_string(draw.clamped_negative) +
                               " negative graphon evaluations clamped to zero");
      break;
    }
    case ScenarioKind::kExternal:
      pop.graph = load_edge_list(cfg.external_edge_list);
      break;
  }

  const int n = pop.graph.n();
  pop.hidden = thin_to_hidden(pop.graph, cfg.keep_prob, stream);
  std::vector<double> mu =
      scenario_mu(cfg, n, latent_u.empty() ? nullptr : &latent_u);
  pop.params = draw_parameters(cfg, mu, pop.hidden, stream);
  pop.truth = true_estimands(pop.params);

  switch (cfg.adjustment) {
    case AdjustmentKind::kNone:
      pop.w = Eigen::MatrixXd(n, 0);
      break;
    case AdjustmentKind::kSpectral: {
      if (cfg.k == 0) {
        pop.w = Eigen::MatrixXd::Ones(n, 1);
      } else {
        SpectralBasis basis = top_k_spectrum(pop.graph, cfg.k, 1e-10, 0, &stream);
        pop.w = basis.w;
        pop.spectrum = basis.eigenvalues;
        pop.next_eigenvalue_bound = basis.next_eigenvalue_bound;
        for (auto& w : basis.warnings) pop.warnings.push_back(std::move(w));
      }
      break;
    }
    case AdjustmentKind::kMergedGroups: {
      std::vector<int> labels;
      if (cfg.kind == ScenarioKind::kPartial) {
        labels = partial_stratum_labels(cfg.partial);
      } else if (cfg.kind == ScenarioKind::kMarketplace) {
        auto rows = marketplace_row_labels(cfg.marketplace);
        auto cols = marketplace_col_labels(cfg.marketplace);
        labels.resize(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i)
          labels[i] = rows[i] * cfg.marketplace.col_strata + cols[i];
      } else {
        throw std::invalid_argument(
            "merged-groups adjustment needs a stratified scenario (partial or marketplace)");
      }
      CovariateMatrix cov = merged_group_covariates(labels);
      pop.w = std::move(cov.w);
      for (auto& w : cov.warnings) pop.warnings.push_back(std::move(w));
      break;
    }
    case AdjustmentKind::kTwoWay: {
      if (cfg.kind != ScenarioKind::kMarketplace)
        throw std::invalid_argument("two-way adjustment needs the marketplace scenario");
      auto rows = marketplace_row_labels(cfg.marketplace);
      auto cols = marketplace_col_labels(cfg.marketplace);
      CovariateMatrix cov = two_way_covariates(rows, cols);
      pop.w = std::move(cov.w);
      for (auto& w : cov.warnings) pop.warnings.push_back(std::move(w));
      break;
    }
  }
  return pop;
}

double cluster_randomization_estimate(const HateParameters& p,
                                      std::span<const int> cluster_labels,
                                      const Assignment& cluster_assignment, const Design& d,
                                      double* var_hat) {
  const int n = p.n();
  if (static_cast<int>(cluster_labels.size()) != n)
    throw std::invalid_argument("cluster labels must cover all units");
  int clusters = cluster_assignment.n();

  Assignment unit_z;
  unit_z.z.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    int c = cluster_labels[static_cast<std::size_t>(i)];
    if (c < 0 || c >= clusters) throw std::invalid_argument("cluster label out of range");
    unit_z.z[static_cast<std::size_t>(i)] = cluster_assignment.z[static_cast<std::size_t>(c)];
  }
  std::vector<double> y = realize_outcomes(p, unit_z);

  double point = ht_direct(y, unit_z, d);
  if (var_hat != nullptr) {
    // Neyman-type estimator on cluster-aggregated outcomes.
    std::vector<double> cluster_mean(static_cast<std::size_t>(clusters), 0.0);
    std::vector<int> cluster_size(static_cast<std::size_t>(clusters), 0);
    for (int i = 0; i < n; ++i) {
      cluster_mean[static_cast<std::size_t>(cluster_labels[static_cast<std::size_t>(i)])] +=
          y[static_cast<std::size_t>(i)];
      ++cluster_size[static_cast<std::size_t>(cluster_labels[static_cast<std::size_t>(i)])];
    }
    for (int c = 0; c < clusters; ++c) {
      if (cluster_size[static_cast<std::size_t>(c)] == 0)
        throw std::invalid_argument("cluster " + std::to_string(c) + " has no units");
      cluster_mean[static_cast<std::size_t>(c)] /= cluster_size[static_cast<std::size_t>(c)];
    }
    *var_hat = var_dir_hat(cluster_mean, cluster_assignment, d);
  }
  return point;
}

ClusterDraw cluster_randomization_baseline(const HateParameters& p,
                                           std::span<const int> cluster_labels, const Design& d,
                                           Pcg32& stream) {
  int clusters = 0;
  for (int c : cluster_labels) clusters = std::max(clusters, c + 1);
  Assignment cluster_z = draw_assignment(d, clusters, stream);
  ClusterDraw out;
  out.point = cluster_randomization_estimate(p, cluster_labels, cluster_z, d, &out.var_hat);
  return out;
}

namespace {

struct ReplicationRecord {
  std::vector<double> points;
  std::vector<double> var_hats;
  bool ok = false;
};

void run_one(const Population& pop, const Design& d, std::uint64_t master_seed, int rep,
             bool adjusted, bool cluster_baseline, ReplicationRecord& rec) {
  Pcg32 stream = replication_stream(master_seed, static_cast<std::uint64_t>(rep));
  const int n = pop.graph.n();
  Assignment z = draw_assignment(d, n, stream);
  std::vector<double> y = realize_outcomes(pop.params, z);

  double dir = ht_direct(y, z, d);
  double ind = ht_indirect(y, z, pop.graph, d);
  rec.points.push_back(dir);
  rec.var_hats.push_back(var_dir_hat(y, z, d));
  rec.points.push_back(ind);
  rec.var_hats.push_back(var_ind_hat(y, z, pop.graph, d));
  rec.points.push_back(dir + ind);
  rec.var_hats.push_back(var_tot_hat(y, z, pop.graph, d));

  if (adjusted) {
    EvEstimate ev = ev_adjusted_indirect(y, z, pop.graph, pop.w, d);
    rec.points.push_back(ev.value);
    rec.var_hats.push_back(
        var_ev_hat(y, ev.regression.residuals, z, pop.graph, d, EstimandKind::kEvInd));
    rec.points.push_back(dir + ev.value);
    rec.var_hats.push_back(
        var_ev_hat(y, ev.regression.residuals, z, pop.graph, d, EstimandKind::kEvTot));
  }

  if (cluster_baseline) {
    ClusterDraw cl = cluster_randomization_baseline(pop.params, pop.cluster_labels, d, stream);
    rec.points.push_back(cl.point);
    rec.var_hats.push_back(cl.var_hat);
  }
  rec.ok = true;
}

}  // namespace

SimulationResult run_replications(const ScenarioConfig& cfg, int replications,
                                  std::uint64_t master_seed, int threads) {
  if (replications < 2) throw std::invalid_argument("need at least 2 replications");
  Population pop = build_population(cfg, master_seed);
  const Design d(cfg.r1);
  const bool adjusted = pop.w.cols() > 0;
  const bool cluster_baseline = cfg.kind == ScenarioKind::kPartial;

  SimulationResult result;
  result.estimator_names = {"DIR", "IND", "TOT"};
  std::vector<double> truths = {pop.truth.tau_dir, pop.truth.tau_ind, pop.truth.tau_tot};
  if (adjusted) {
    result.estimator_names.insert(result.estimator_names.end(), {"EV_IND", "EV_TOT"});
    truths.insert(truths.end(), {pop.truth.tau_ind, pop.truth.tau_tot});
  }
  if (cluster_baseline) {
    result.estimator_names.push_back("CL_TOT");
    truths.push_back(pop.truth.tau_tot);
  }
  // Table ordering: DIR, IND, EV_IND, TOT, EV_TOT, CL_TOT.
  std::vector<std::size_t> order;
  if (adjusted) {
    order = {0, 1, 3, 2, 4};
  } else {
    order = {0, 1, 2};
  }
  if (cluster_baseline) order.push_back(result.estimator_names.size() - 1);

  std::vector<ReplicationRecord> records(static_cast<std::size_t>(replications));
  threads = std::max(1, threads);
  auto worker = [&](int begin, int end) {
    for (int r = begin; r < end; ++r) {
      try {
        run_one(pop, d, master_seed, r, adjusted, cluster_baseline,
                records[static_cast<std::size_t>(r)]);
      } catch (const std::exception&) {
        records[static_cast<std::size_t>(r)].ok = false;
      }
    }
  };
  if (threads == 1) {
    worker(0, replications);
  } else {
    std::vector<std::thread> pool;
    int chunk = (replications + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      int begin = t * chunk;
      int end = std::min(replications, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(worker, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  const std::size_t estimators = result.estimator_names.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  result.points.assign(static_cast<std::size_t>(replications),
                       std::vector<double>(estimators, nan));
  result.var_hats = result.points;
  result.failed.assign(static_cast<std::size_t>(replications), 0);
  for (int r = 0; r < replications; ++r) {
    const auto& rec = records[static_cast<std::size_t>(r)];
    if (!rec.ok) {
      result.failed[static_cast<std::size_t>(r)] = 1;
      ++result.failures;
      continue;
    }
    for (std::size_t e = 0; e < estimators; ++e) {
      result.points[static_cast<std::size_t>(r)][e] = rec.points[e];
      result.var_hats[static_cast<std::size_t>(r)][e] = rec.var_hats[e];
    }
  }
  if (result.failures * 100 > replications)
    throw std::runtime_error(std::to_string(result.failures) + " of " +
                             std::to_string(replications) + " replications failed (>1%)");

  for (std::size_t e : order) {
    MonteCarloSummary row;
    row.estimator = result.estimator_names[e];
    row.truth = truths[e];
    row.failures = result.failures;

    double sum = 0.0;
    int count = 0;
    for (int r = 0; r < replications; ++r) {
      if (result.failed[static_cast<std::size_t>(r)]) continue;
      sum += result.points[static_cast<std::size_t>(r)][e];
      ++count;
    }
    row.replications = count;
    double mean = sum / count;
    row.bias = mean - row.truth;

    double ss = 0.0, mse = 0.0, cover = 0.0, length = 0.0;
    for (int r = 0; r < replications; ++r) {
      if (result.failed[static_cast<std::size_t>(r)]) continue;
      double point = result.points[static_cast<std::size_t>(r)][e];
      double dev = point - mean;
      ss += dev * dev;
      double err = point - row.truth;
      mse += err * err;
      EstimateReport ci = wald_ci(EstimandKind::kTot, point,
                                  result.var_hats[static_cast<std::size_t>(r)][e], kCiLevel,
                                  /*doubled=*/false);
      if (ci.covers(row.truth)) cover += 1.0;
      length += ci.ci_length();
    }
    row.sd = count > 1 ? std::sqrt(ss / (count - 1)) : 0.0;
    row.rmse = std::sqrt(mse / count);
    row.cp = cover / count;
    row.mean_ci_length = length / count;
    result.rows.push_back(std::move(row));
  }
  return result;
}

void write_summary_csv(std::ostream& out, const std::vector<MonteCarloSummary>& rows) {
  out << "estimator,true,bias,sd,rmse,cp,length,R,failures\n";
  for (const auto& r : rows) {
    out << r.estimator << ',' << format_double(r.truth) << ',' << format_double(r.bias) << ','
        << format_double(r.sd) << ',' << format_double(r.rmse) << ',' << format_double(r.cp)
        << ',' << format_double(r.mean_ci_length) << ',' << r.replications << ',' << r.failures
        << '\n';
  }
}

std::vector<MonteCarloSummary> parse_summary_csv(std::istream& in) {
  std::vector<MonteCarloSummary> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      continue;  // header
    }
    std::istringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 9) throw std::invalid_argument("summary CSV: expected 9 columns");
    MonteCarloSummary r;
    r.estimator = fields[0];
    r.truth = std::stod(fields[1]);
    r.bias = std::stod(fields[2]);
    r.sd = std::stod(fields[3]);
    r.rmse = std::stod(fields[4]);
    r.cp = std::stod(fields[5]);
    r.mean_ci_length = std::stod(fields[6]);
    r.replications = std::stoi(fields[7]);
    r.failures = std::stoi(fields[8]);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_replication_matrix(std::ostream& out, const SimulationResult& result) {
  out << "rep";
  for (const auto& name : result.estimator_names) out << ',' << name;
  out << ",failed\n";
  for (std::size_t r = 0; r < result.points.size(); ++r) {
    out << r;
    for (double v : result.points[r]) out << ',' << format_double(v);
    out << ',' << static_cast<int>(result.failed[r]) << '\n';
  }
}

}  // namespace netate
