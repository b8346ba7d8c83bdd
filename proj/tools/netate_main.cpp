// Command-line front end: estimate / simulate / spectrum / oracle-check.
// Exit codes: 0 success, 2 input error, 3 numerical failure, 4 oracle or
// acceptance failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>

#include "netate/adjustment.hpp"
#include "netate/estimators.hpp"
#include "netate/generators.hpp"
#include "netate/graph.hpp"
#include "netate/hate_model.hpp"
#include "netate/montecarlo.hpp"
#include "netate/oracle.hpp"
#include "netate/rng.hpp"
#include "netate/variance.hpp"

namespace {

using json = nlohmann::json;
using namespace netate;

constexpr const char* kVersion = "0.1.0";

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// The primary outputs stay byte-deterministic; the timestamp lives only in
// the sibling manifest file.
void write_manifest(const std::string& output_path, const std::string& command,
                    std::uint64_t seed, const std::string& config_text) {
  if (output_path.empty()) return;
  json m;
  m["command"] = command;
  m["seed"] = seed;
  m["rng"] = std::string(kRngId);
  m["version"] = kVersion;
  m["config_digest"] = hex64(fnv1a(config_text));
  auto now = std::chrono::system_clock::now().time_since_epoch();
  m["timestamp_unix_ms"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
  std::ofstream out(output_path + ".manifest.json");
  if (out) out << m.dump(2) << '\n';
}

void emit(const std::string& output_path, const std::string& text) {
  if (output_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(output_path);
  if (!out) throw std::invalid_argument("cannot write " + output_path);
  out << text;
}

std::vector<std::vector<std::string>> read_csv_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::istringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      field.erase(0, field.find_first_not_of(" \t\r"));
      field.erase(field.find_last_not_of(" \t\r") + 1);
      fields.push_back(field);
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

bool numeric_start(const std::string& s) {
  return !s.empty() && (std::isdigit(static_cast<unsigned char>(s[0])) || s[0] == '-' ||
                        s[0] == '+' || s[0] == '.');
}

// CSV `i,value` with mandatory full coverage of 0..n-1. Pass n = -1 to
// infer the unit count from the largest index.
std::vector<double> load_indexed_column(const std::string& path, int n, const char* what) {
  auto rows = read_csv_rows(path);
  std::vector<std::pair<int, double>> entries;
  int max_index = -1;
  std::size_t row_no = 0;
  for (const auto& fields : rows) {
    ++row_no;
    if (row_no == 1 && !fields.empty() && !numeric_start(fields[0])) continue;  // header
    if (fields.size() != 2)
      throw std::invalid_argument(std::string(path) + " row " + std::to_string(row_no) +
                                  ": expected i," + what);
    int i = std::stoi(fields[0]);
    entries.emplace_back(i, std::stod(fields[1]));
    max_index = std::max(max_index, i);
  }
  if (n < 0) n = max_index + 1;
  std::vector<double> values(static_cast<std::size_t>(n));
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (auto [i, v] : entries) {
    if (i < 0 || i >= n)
      throw std::invalid_argument(std::string(path) + ": index " + std::to_string(i) +
                                  " out of range for n=" + std::to_string(n));
    if (seen[static_cast<std::size_t>(i)])
      throw std::invalid_argument(std::string(path) + ": duplicate index " + std::to_string(i));
    seen[static_cast<std::size_t>(i)] = true;
    values[static_cast<std::size_t>(i)] = v;
  }
  for (int i = 0; i < n; ++i)
    if (!seen[static_cast<std::size_t>(i)])
      throw std::invalid_argument(std::string(path) + ": missing unit " + std::to_string(i));
  return values;
}

struct StrataFile {
  std::vector<int> primary;
  std::vector<int> secondary;  // empty for merged-groups files
};

StrataFile load_strata(const std::string& path, int n) {
  auto rows = read_csv_rows(path);
  StrataFile out;
  out.primary.assign(static_cast<std::size_t>(n), -1);
  bool two_way = false;
  std::size_t row_no = 0;
  for (const auto& fields : rows) {
    ++row_no;
    if (row_no == 1 && !fields.empty() && !numeric_start(fields[0])) continue;
    if (fields.size() != 2 && fields.size() != 3)
      throw std::invalid_argument(path + " row " + std::to_string(row_no) +
                                  ": expected i,stratum or i,row_stratum,col_stratum");
    if (fields.size() == 3 && out.secondary.empty() && !two_way) {
      two_way = true;
      out.secondary.assign(static_cast<std::size_t>(n), -1);
    }
    int i = std::stoi(fields[0]);
    if (i < 0 || i >= n)
      throw std::invalid_argument(path + ": index " + std::to_string(i) + " out of range");
    out.primary[static_cast<std::size_t>(i)] = std::stoi(fields[1]);
    if (two_way) {
      if (fields.size() != 3)
        throw std::invalid_argument(path + ": mixed two-way and merged rows");
      out.secondary[static_cast<std::size_t>(i)] = std::stoi(fields[2]);
    }
  }
  for (int i = 0; i < n; ++i)
    if (out.primary[static_cast<std::size_t>(i)] < 0)
      throw std::invalid_argument(path + ": missing unit " + std::to_string(i));
  return out;
}

json report_to_json(const EstimateReport& r) {
  json ci;
  ci["level"] = r.level;
  ci["low"] = r.ci_low;
  ci["high"] = r.ci_high;
  ci["doubled"] = r.doubled;
  json out;
  out["estimand"] = estimand_label(r.estimand);
  out["point"] = r.point;
  out["var_hat"] = r.variance_hat;
  out["ci"] = ci;
  return out;
}

int cmd_estimate(const std::string& network_path, const std::string& outcomes_path,
                 const std::string& assignment_path, double r1, int k,
                 const std::string& strata_path, double level, bool doubled,
                 const std::string& truth_params, const std::string& truth_gamma,
                 std::uint64_t seed, const std::string& output_path) {
  Design d(r1);
  // The outcomes file fixes the unit count, so isolated trailing units and
  // fully edgeless networks are representable.
  std::vector<double> y = load_indexed_column(outcomes_path, -1, "y");
  const int n = static_cast<int>(y.size());
  EdgeListSummary load_summary;
  DirectedGraph g = load_edge_list(network_path, n, &load_summary);
  std::vector<double> z_raw = load_indexed_column(assignment_path, n, "z");
  Assignment z;
  z.z.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double v = z_raw[static_cast<std::size_t>(i)];
    if (v != 0.0 && v != 1.0)
      throw std::invalid_argument("assignment entries must be 0 or 1");
    z.z[static_cast<std::size_t>(i)] = v == 1.0 ? 1 : 0;
  }

  json result;
  result["seed"] = seed;
  result["rng"] = std::string(kRngId);
  result["n"] = n;
  result["edges"] = g.edge_count();
  result["density"] = density(g);
  if (load_summary.duplicates_collapsed > 0)
    result["duplicate_edges_collapsed"] = load_summary.duplicates_collapsed;

  std::vector<std::string> warnings;
  Eigen::MatrixXd w;
  if (!strata_path.empty()) {
    StrataFile strata = load_strata(strata_path, n);
    CovariateMatrix cov =
        strata.secondary.empty()
            ? merged_group_covariates(strata.primary)
            : two_way_covariates(strata.primary, strata.secondary);
    w = std::move(cov.w);
    warnings = std::move(cov.warnings);
  } else if (k == 0) {
    w = Eigen::MatrixXd::Ones(n, 1);
  } else {
    Pcg32 stream(seed, 0);
    SpectralBasis basis = top_k_spectrum(g, k, 1e-10, 0, &stream);
    w = basis.w;
    warnings = basis.warnings;
    json spec;
    spec["lambda"] = basis.eigenvalues;
    spec["next_bound"] = basis.next_eigenvalue_bound;
    result["spectrum"] = spec;
  }

  double dir = ht_direct(y, z, d);
  double ind = ht_indirect(y, z, g, d);
  EvEstimate ev = ev_adjusted_indirect(y, z, g, w, d);
  for (const auto& warning : ev.regression.warnings) warnings.push_back(warning);

  struct Row {
    EstimandKind kind;
    double point;
    double var_hat;
  };
  Row rows[5] = {
      {EstimandKind::kDir, dir, var_dir_hat(y, z, d)},
      {EstimandKind::kInd, ind, var_ind_hat(y, z, g, d)},
      {EstimandKind::kTot, dir + ind, var_tot_hat(y, z, g, d)},
      {EstimandKind::kEvInd, ev.value,
       var_ev_hat(y, ev.regression.residuals, z, g, d, EstimandKind::kEvInd)},
      {EstimandKind::kEvTot, dir + ev.value,
       var_ev_hat(y, ev.regression.residuals, z, g, d, EstimandKind::kEvTot)},
  };
  json reports = json::array();
  for (const Row& row : rows) {
    json entry = report_to_json(wald_ci(row.kind, row.point, row.var_hat, level, doubled));
    if (!doubled) {
      EstimateReport alt = wald_ci(row.kind, row.point, row.var_hat, level, true);
      entry["ci_doubled"] = {{"level", alt.level}, {"low", alt.ci_low}, {"high", alt.ci_high}};
    }
    reports.push_back(std::move(entry));
  }
  result["reports"] = std::move(reports);
  if (!warnings.empty()) result["warnings"] = warnings;

  if (!truth_params.empty() || !truth_gamma.empty()) {
    if (truth_params.empty() || truth_gamma.empty())
      throw std::invalid_argument("--truth-params and --truth-gamma must be given together");
    HateParameters p = load_parameters(truth_params, truth_gamma);
    if (p.n() != n) throw std::invalid_argument("truth parameter files do not match n");
    Estimands truth = true_estimands(p);
    result["truth"] = {{"dir", truth.tau_dir}, {"ind", truth.tau_ind}, {"tot", truth.tau_tot}};
    BoundDiagnostics b = bound_diagnostics(p);
    result["bound_diagnostics"] = {{"max_abs_alpha", b.max_abs_alpha},
                                   {"max_abs_theta", b.max_abs_theta},
                                   {"max_scaled_gamma", b.max_scaled_gamma}};
  }

  emit(output_path, result.dump(2) + "\n");
  write_manifest(output_path, "estimate", seed, network_path);
  return 0;
}

int cmd_simulate(const std::string& config_path, int replications, std::uint64_t seed,
                 int threads, const std::string& output_path, const std::string& dump_reps) {
  ScenarioConfig cfg = ScenarioConfig::load(config_path);
  SimulationResult result = run_replications(cfg, replications, seed, threads);
  std::ostringstream csv;
  write_summary_csv(csv, result.rows);
  emit(output_path, csv.str());
  write_manifest(output_path, "simulate", seed, cfg.to_string());
  if (!dump_reps.empty()) {
    std::ofstream out(dump_reps);
    if (!out) throw std::invalid_argument("cannot write " + dump_reps);
    write_replication_matrix(out, result);
  }
  return 0;
}

int cmd_spectrum(const std::string& network_path, int k, double tol, int max_iter,
                 std::uint64_t seed, const std::string& output_path,
                 const std::string& w_csv_path) {
  DirectedGraph g = load_edge_list(network_path);
  Pcg32 stream(seed, 0);
  SpectralBasis basis = top_k_spectrum(g, k, tol, max_iter, &stream);
  json out;
  out["lambda"] = basis.eigenvalues;
  out["next_bound"] = basis.next_eigenvalue_bound;
  out["seed"] = seed;
  out["rng"] = std::string(kRngId);
  if (!basis.warnings.empty()) out["warnings"] = basis.warnings;
  emit(output_path, out.dump(2) + "\n");
  write_manifest(output_path, "spectrum", seed, network_path);
  if (!w_csv_path.empty()) {
    std::ofstream w_out(w_csv_path);
    if (!w_out) throw std::invalid_argument("cannot write " + w_csv_path);
    w_out << "i";
    for (int c = 0; c < basis.w.cols(); ++c) w_out << ",w" << c;
    w_out << '\n';
    w_out.precision(17);
    for (int i = 0; i < basis.w.rows(); ++i) {
      w_out << i;
      for (int c = 0; c < basis.w.cols(); ++c) w_out << ',' << basis.w(i, c);
      w_out << '\n';
    }
  }
  return 0;
}

int cmd_oracle_check(std::uint64_t seed, int n, double r1, bool tamper) {
  auto checks = oracle_check(seed, n, r1, tamper);
  bool all_pass = true;
  std::printf("%-52s %-6s %22s %22s\n", "identity", "status", "lhs", "rhs");
  for (const auto& c : checks) {
    all_pass = all_pass && c.pass;
    std::printf("%-52s %-6s %22.15g %22.15g\n", c.name.c_str(), c.pass ? "PASS" : "FAIL", c.lhs,
                c.rhs);
  }
  std::printf("%s\n", all_pass ? "all identities hold" : "IDENTITY FAILURE");
  return all_pass ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Design-based treatment effect estimation under network interference"};
  app.require_subcommand(1);

  std::uint64_t seed = 20240501;
  int threads = 1;
  app.add_option("--seed", seed, "master seed")->capture_default_str();
  app.add_option("--threads", threads, "worker threads")->capture_default_str();

  std::string network, outcomes, assignment, strata, truth_params, truth_gamma, output;
  double r1 = 0.5, level = 0.95;
  int k = 0;
  bool doubled = false;
  auto* est = app.add_subcommand("estimate", "estimate all five effects from data files");
  est->add_option("--network", network, "edge list CSV")->required();
  est->add_option("--outcomes", outcomes, "CSV i,y")->required();
  est->add_option("--assignment", assignment, "CSV i,z")->required();
  est->add_option("--r1", r1, "treatment probability")->required();
  est->add_option("--k", k, "eigenvectors for adjustment (0 = intercept only)")
      ->capture_default_str();
  est->add_option("--strata", strata, "strata CSV (i,stratum or i,row,col) instead of --k");
  est->add_option("--level", level, "confidence level")->capture_default_str();
  est->add_flag("--doubled", doubled, "double the variance estimate in the primary interval");
  est->add_option("--truth-params", truth_params, "CSV i,alpha,theta for truth diagnostics");
  est->add_option("--truth-gamma", truth_gamma, "CSV i,j,gamma for truth diagnostics");
  est->add_option("--output", output, "output path (default stdout)");

  std::string sim_config, dump_reps, sim_output;
  int replications = 2000;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo scenario replication");
  sim->add_option("--config", sim_config, "scenario config file")->required();
  sim->add_option("-R,--replications", replications, "replication count")->capture_default_str();
  sim->add_option("--output", sim_output, "summary CSV path (default stdout)");
  sim->add_option("--dump-reps", dump_reps, "write the per-replication matrix here");

  std::string spec_network, spec_output, w_csv;
  int spec_k = 1;
  double spec_tol = 1e-10;
  int spec_max_iter = 0;
  auto* spec = app.add_subcommand("spectrum", "top-K spectrum of E E^T");
  spec->add_option("--network", spec_network, "edge list CSV")->required();
  spec->add_option("--k", spec_k, "number of eigenpairs")->required();
  spec->add_option("--tol", spec_tol, "Ritz residual tolerance")->capture_default_str();
  spec->add_option("--max-iter", spec_max_iter, "Lanczos iteration cap (0 = automatic)");
  spec->add_option("--output", spec_output, "output path (default stdout)");
  spec->add_option("--w-csv", w_csv, "also write the whitened covariates here");

  int oracle_n = 10;
  double oracle_r1 = 0.5;
  bool tamper = false;
  auto* ora = app.add_subcommand("oracle-check",
                                 "verify the finite-sample identities on a seeded instance");
  ora->add_option("--n", oracle_n, "instance size (enumeration over 2^n)")->capture_default_str();
  ora->add_option("--r1", oracle_r1, "treatment probability")->capture_default_str();
  ora->add_flag("--tamper", tamper, "negative control: perturb one variance formula");

  CLI11_PARSE(app, argc, argv);

  try {
    if (est->parsed())
      return cmd_estimate(network, outcomes, assignment, r1, k, strata, level, doubled,
                          truth_params, truth_gamma, seed, output);
    if (sim->parsed())
      return cmd_simulate(sim_config, replications, seed, threads, sim_output, dump_reps);
    if (spec->parsed())
      return cmd_spectrum(spec_network, spec_k, spec_tol, spec_max_iter, seed, spec_output,
                          w_csv);
    if (ora->parsed()) return cmd_oracle_check(seed, oracle_n, oracle_r1, tamper);
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
