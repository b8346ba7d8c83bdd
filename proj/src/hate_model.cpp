#include "netate/hate_model.hpp"

#include <cmath>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace netate {

double HateParameters::gamma_entry(int i, int j) const {
  std::ptrdiff_t k = support.entry_index(i, j);
  return k >= 0 ? gamma[static_cast<std::size_t>(k)] : 0.0;
}

std::span<const double> HateParameters::gamma_row(int i) const {
  auto targets = support.out_neighbors(i);
  if (targets.empty()) return {};
  std::ptrdiff_t first = support.entry_index(i, targets.front());
  return {gamma.data() + first, targets.size()};
}

std::vector<double> HateParameters::spillover_totals() const {
  std::vector<double> h(static_cast<std::size_t>(n()), 0.0);
  for (int i = 0; i < n(); ++i) {
    double s = 0.0;
    for (double g : gamma_row(i)) s += g;
    h[i] = s;
  }
  return h;
}

void HateParameters::validate() const {
  auto units = static_cast<std::size_t>(support.n());
  if (alpha.size() != units || theta.size() != units)
    throw std::invalid_argument("parameter vectors must have length n");
  if (gamma.size() != support.edge_count())
    throw std::invalid_argument("gamma values must align with the hidden network edges");
}

BoundDiagnostics bound_diagnostics(const HateParameters& p) {
  BoundDiagnostics d;
  for (double a : p.alpha) d.max_abs_alpha = std::max(d.max_abs_alpha, std::abs(a));
  for (double t : p.theta) d.max_abs_theta = std::max(d.max_abs_theta, std::abs(t));
  for (int i = 0; i < p.n(); ++i) {
    double deg = p.support.out_degree(i);
    for (double g : p.gamma_row(i))
      d.max_scaled_gamma = std::max(d.max_scaled_gamma, deg * std::abs(g));
  }
  return d;
}

std::vector<double> realize_outcomes(const HateParameters& p, const Assignment& z) {
  p.validate();
  if (z.n() != p.n()) throw std::invalid_argument("assignment length does not match n");
  std::vector<double> y(p.alpha.begin(), p.alpha.end());
  for (int i = 0; i < p.n(); ++i) {
    if (z.treated(i)) y[i] += p.theta[i];
    auto targets = p.support.out_neighbors(i);
    auto values = p.gamma_row(i);
    for (std::size_t k = 0; k < targets.size(); ++k)
      if (z.treated(targets[k])) y[i] += values[k];
  }
  return y;
}

Estimands true_estimands(const HateParameters& p) {
  p.validate();
  Estimands e;
  double sum_theta = 0.0;
  for (double t : p.theta) sum_theta += t;
  double sum_gamma = 0.0;
  for (double g : p.gamma) sum_gamma += g;
  e.tau_dir = sum_theta / p.n();
  e.tau_ind = sum_gamma / p.n();
  e.tau_tot = e.tau_dir + e.tau_ind;
  return e;
}

namespace {

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

void save_parameters(const HateParameters& p, const std::string& alpha_theta_path,
                     const std::string& gamma_path) {
  p.validate();
  std::ofstream at(alpha_theta_path);
  if (!at) throw std::invalid_argument("cannot write " + alpha_theta_path);
  at << "i,alpha,theta\n";
  for (int i = 0; i < p.n(); ++i)
    at << i << ',' << format_double(p.alpha[i]) << ',' << format_double(p.theta[i]) << '\n';

  std::ofstream gm(gamma_path);
  if (!gm) throw std::invalid_argument("cannot write " + gamma_path);
  gm << "i,j,gamma\n";
  for (int i = 0; i < p.n(); ++i) {
    auto targets = p.support.out_neighbors(i);
    auto values = p.gamma_row(i);
    for (std::size_t k = 0; k < targets.size(); ++k)
      gm << i << ',' << targets[k] << ',' << format_double(values[k]) << '\n';
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    field.erase(0, field.find_first_not_of(" \t\r"));
    field.erase(field.find_last_not_of(" \t\r") + 1);
    out.push_back(field);
  }
  return out;
}

bool looks_like_header(const std::vector<std::string>& fields) {
  if (fields.empty()) return false;
  char* end = nullptr;
  std::strtod(fields[0].c_str(), &end);
  return end == fields[0].c_str() || *end != '\0';
}

}  // namespace

HateParameters load_parameters(const std::string& alpha_theta_path,
                               const std::string& gamma_path) {
  std::ifstream at(alpha_theta_path);
  if (!at) throw std::invalid_argument("cannot open " + alpha_theta_path);
  std::vector<double> alpha, theta;
  std::vector<int> seen_index;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(at, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    auto fields = split_csv_line(line);
    if (first && looks_like_header(fields)) {
      first = false;
      continue;
    }
    first = false;
    if (fields.size() != 3)
      throw std::invalid_argument(alpha_theta_path + " line " + std::to_string(line_no) +
                                  ": expected i,alpha,theta");
    seen_index.push_back(std::stoi(fields[0]));
    alpha.push_back(std::stod(fields[1]));
    theta.push_back(std::stod(fields[2]));
  }
  int n = static_cast<int>(alpha.size());
  std::vector<double> alpha_ord(alpha.size()), theta_ord(theta.size());
  std::vector<bool> covered(alpha.size(), false);
  for (std::size_t k = 0; k < seen_index.size(); ++k) {
    int i = seen_index[k];
    if (i < 0 || i >= n || covered[static_cast<std::size_t>(i)])
      throw std::invalid_argument(alpha_theta_path + ": indices must cover 0.." +
                                  std::to_string(n - 1) + " exactly once");
    covered[static_cast<std::size_t>(i)] = true;
    alpha_ord[static_cast<std::size_t>(i)] = alpha[k];
    theta_ord[static_cast<std::size_t>(i)] = theta[k];
  }

  std::ifstream gm(gamma_path);
  if (!gm) throw std::invalid_argument("cannot open " + gamma_path);
  std::vector<Edge> edges;
  std::vector<double> values;
  line_no = 0;
  first = true;
  while (std::getline(gm, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    auto fields = split_csv_line(line);
    if (first && looks_like_header(fields)) {
      first = false;
      continue;
    }
    first = false;
    if (fields.size() != 3)
      throw std::invalid_argument(gamma_path + " line " + std::to_string(line_no) +
                                  ": expected i,j,gamma");
    edges.emplace_back(std::stoi(fields[0]), std::stoi(fields[1]));
    values.push_back(std::stod(fields[2]));
  }

  HateParameters p;
  p.alpha = std::move(alpha_ord);
  p.theta = std::move(theta_ord);
  p.support = HiddenNetwork::from_edge_list(edges, n);
  p.gamma.assign(p.support.edge_count(), 0.0);
  for (std::size_t k = 0; k < edges.size(); ++k) {
    std::ptrdiff_t idx = p.support.entry_index(edges[k].first, edges[k].second);
    p.gamma[static_cast<std::size_t>(idx)] = values[k];
  }
  p.validate();
  return p;
}

}  // namespace netate
