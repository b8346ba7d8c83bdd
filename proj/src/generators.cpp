#include "netate/generators.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace netate {

double StepFunction::operator()(double u) const {
  if (values.empty()) throw std::invalid_argument("step function needs at least one value");
  auto bins = static_cast<int>(values.size());
  int idx = std::min(static_cast<int>(u * bins), bins - 1);
  idx = std::max(idx, 0);
  return values[static_cast<std::size_t>(idx)];
}

bool StepFunction::constant() const {
  return std::all_of(values.begin(), values.end(),
                     [&](double v) { return v == values.front(); });
}

double PsiSpec::operator()(double u) const {
  switch (kind) {
    case Kind::kConst: return 1.0;
    case Kind::kStep: return step(u);
    case Kind::kCos: return std::numbers::sqrt2 * std::cos(frequency * std::numbers::pi * u);
  }
  return 0.0;
}

namespace {

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::istringstream ss(text);
  std::string field;
  while (std::getline(ss, field, ',')) {
    if (field.find_first_not_of(" \t") == std::string::npos) continue;
    out.push_back(std::stod(field));
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_double_list(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    out += format_double(values[i]);
  }
  return out;
}

}  // namespace

PsiSpec PsiSpec::parse(const std::string& text) {
  PsiSpec spec;
  if (text == "const") {
    spec.kind = Kind::kConst;
  } else if (text.rfind("step:", 0) == 0) {
    spec.kind = Kind::kStep;
    spec.step.values = parse_double_list(text.substr(5));
    if (spec.step.values.empty())
      throw std::invalid_argument("step eigenfunction needs values: " + text);
  } else if (text.rfind("cos:", 0) == 0) {
    spec.kind = Kind::kCos;
    spec.frequency = std::stoi(text.substr(4));
    if (spec.frequency < 1) throw std::invalid_argument("cos frequency must be >= 1");
  } else {
    throw std::invalid_argument("unknown eigenfunction spec: " + text);
  }
  return spec;
}

std::string PsiSpec::to_string() const {
  switch (kind) {
    case Kind::kConst: return "const";
    case Kind::kStep: return "step:" + format_double_list(step.values);
    case Kind::kCos: return "cos:" + std::to_string(frequency);
  }
  return "const";
}

double GraphonSpec::evaluate(double u, double v) const {
  if (lambda.size() != psi.size())
    throw std::invalid_argument("graphon spec: one eigenfunction per eigenvalue");
  double sum = 0.0;
  for (std::size_t k = 0; k < lambda.size(); ++k) sum += lambda[k] * psi[k](u) * psi[k](v);
  return sum;
}

DirectedGraph partial_interference_graph(int group_size, int groups) {
  if (group_size < 1 || groups < 1)
    throw std::invalid_argument("partial interference graph needs positive dimensions");
  const int n = group_size * groups;
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n) * (group_size - 1));
  for (int m = 0; m < groups; ++m) {
    int base = m * group_size;
    for (int a = 0; a < group_size; ++a)
      for (int b = 0; b < group_size; ++b)
        if (a != b) edges.emplace_back(base + a, base + b);
  }
  return DirectedGraph::from_edge_list(std::move(edges), n);
}

DirectedGraph marketplace_graph(int rows, int cols) {
  if (rows < 1 || cols < 1)
    throw std::invalid_argument("marketplace graph needs positive dimensions");
  const int n = rows * cols;
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    int r = i / cols;
    int c = i % cols;
    for (int c2 = 0; c2 < cols; ++c2)
      if (c2 != c) edges.emplace_back(i, r * cols + c2);
    for (int r2 = 0; r2 < rows; ++r2)
      if (r2 != r) edges.emplace_back(i, r2 * cols + c);
  }
  return DirectedGraph::from_edge_list(std::move(edges), n);
}

GraphonDraw graphon_graph(int n, double rho_star, const GraphonSpec& spec, Pcg32& stream) {
  if (n < 1) throw std::invalid_argument("graphon graph needs n >= 1");
  if (!(rho_star >= 0.0) || !(rho_star <= 1.0))
    throw std::invalid_argument("rho_star must lie in [0,1]");
  GraphonDraw out;
  out.u.resize(static_cast<std::size_t>(n));
  for (double& u : out.u) u = stream.next_double();

  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double g = spec.evaluate(out.u[static_cast<std::size_t>(i)],
                               out.u[static_cast<std::size_t>(j)]);
      if (g < 0.0) {
        ++out.clamped_negative;
        g = 0.0;
      }
      double prob = std::min(1.0, rho_star * g);
      if (stream.next_bernoulli(prob)) {
        edges.emplace_back(i, j);
        edges.emplace_back(j, i);
      }
    }
  }
  out.graph = DirectedGraph::from_edge_list(std::move(edges), n);
  return out;
}

HiddenNetwork thin_to_hidden(const DirectedGraph& g, double keep_prob, Pcg32& stream) {
  if (!(keep_prob >= 0.0) || !(keep_prob <= 1.0))
    throw std::invalid_argument("keep probability must lie in [0,1]");
  std::vector<Edge> kept;
  for (auto e : g.edges())
    if (stream.next_bernoulli(keep_prob)) kept.push_back(e);
  return HiddenNetwork::from_edge_list(std::move(kept), g.n());
}

namespace {

int partial_clusters_per_stratum(const PartialConfig& cfg) {
  if (cfg.strata < 1) throw std::invalid_argument("partial scenario needs >= 1 stratum");
  if (cfg.groups % cfg.strata != 0)
    throw std::invalid_argument("cluster count " + std::to_string(cfg.groups) +
                                " is not divisible into " + std::to_string(cfg.strata) +
                                " equal strata");
  if (static_cast<int>(cfg.stratum_mu.size()) != cfg.strata)
    throw std::invalid_argument("partial scenario needs one mu per stratum");
  return cfg.groups / cfg.strata;
}

void check_marketplace_strata(const MarketplaceConfig& cfg) {
  if (cfg.row_strata < 1 || cfg.col_strata < 1)
    throw std::invalid_argument("marketplace scenario needs >= 1 stratum per side");
  if (cfg.rows % cfg.row_strata != 0 || cfg.cols % cfg.col_strata != 0)
    throw std::invalid_argument("marketplace rows/cols must divide into equal strata");
  if (static_cast<int>(cfg.row_delta.size()) != cfg.row_strata ||
      static_cast<int>(cfg.col_delta.size()) != cfg.col_strata)
    throw std::invalid_argument("marketplace scenario needs one delta per stratum");
}

}  // namespace

std::vector<int> partial_cluster_labels(const PartialConfig& cfg) {
  std::vector<int> labels(static_cast<std::size_t>(cfg.group_size) * cfg.groups);
  for (std::size_t i = 0; i < labels.size(); ++i)
    labels[i] = static_cast<int>(i) / cfg.group_size;
  return labels;
}

std::vector<int> partial_stratum_labels(const PartialConfig& cfg) {
  int per = partial_clusters_per_stratum(cfg);
  std::vector<int> labels(static_cast<std::size_t>(cfg.group_size) * cfg.groups);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    int cluster = static_cast<int>(i) / cfg.group_size;
    labels[i] = cluster / per;
  }
  return labels;
}

std::vector<int> marketplace_row_labels(const MarketplaceConfig& cfg) {
  check_marketplace_strata(cfg);
  int per = cfg.rows / cfg.row_strata;
  std::vector<int> labels(static_cast<std::size_t>(cfg.rows) * cfg.cols);
  for (std::size_t i = 0; i < labels.size(); ++i)
    labels[i] = (static_cast<int>(i) / cfg.cols) / per;
  return labels;
}

std::vector<int> marketplace_col_labels(const MarketplaceConfig& cfg) {
  check_marketplace_strata(cfg);
  int per = cfg.cols / cfg.col_strata;
  std::vector<int> labels(static_cast<std::size_t>(cfg.rows) * cfg.cols);
  for (std::size_t i = 0; i < labels.size(); ++i)
    labels[i] = (static_cast<int>(i) % cfg.cols) / per;
  return labels;
}

std::vector<double> scenario_mu(const ScenarioConfig& cfg, int n, const std::vector<double>* u) {
  std::vector<double> mu(static_cast<std::size_t>(n), 1.0);
  switch (cfg.kind) {
    case ScenarioKind::kPartial: {
      auto labels = partial_stratum_labels(cfg.partial);
      if (static_cast<int>(labels.size()) != n)
        throw std::invalid_argument("partial scenario dimensions do not match n");
      for (int i = 0; i < n; ++i)
        mu[static_cast<std::size_t>(i)] =
            cfg.partial.stratum_mu[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
      return mu;
    }
    case ScenarioKind::kMarketplace: {
      auto rows = marketplace_row_labels(cfg.marketplace);
      auto cols = marketplace_col_labels(cfg.marketplace);
      if (static_cast<int>(rows.size()) != n)
        throw std::invalid_argument("marketplace scenario dimensions do not match n");
      for (int i = 0; i < n; ++i)
        mu[static_cast<std::size_t>(i)] =
            cfg.marketplace.base_mu +
            cfg.marketplace.row_delta[static_cast<std::size_t>(rows[static_cast<std::size_t>(i)])] +
            cfg.marketplace.col_delta[static_cast<std::size_t>(cols[static_cast<std::size_t>(i)])];
      return mu;
    }
    case ScenarioKind::kGraphon: {
      if (cfg.graphon.mu.constant()) {
        std::fill(mu.begin(), mu.end(), cfg.graphon.mu.values.front());
        return mu;
      }
      if (u == nullptr || static_cast<int>(u->size()) != n)
        throw std::invalid_argument("graphon scenario with varying mu needs the latent draws");
      for (int i = 0; i < n; ++i)
        mu[static_cast<std::size_t>(i)] = cfg.graphon.mu((*u)[static_cast<std::size_t>(i)]);
      return mu;
    }
    case ScenarioKind::kExternal:
      return mu;  // mu == 1 throughout
  }
  return mu;
}

HateParameters draw_parameters(const ScenarioConfig& cfg, const std::vector<double>& mu,
                               const HiddenNetwork& h, Pcg32& stream) {
  const int n = h.n();
  if (static_cast<int>(mu.size()) != n)
    throw std::invalid_argument("mu length does not match the hidden network");
  HateParameters p;
  p.support = h;
  p.alpha.resize(static_cast<std::size_t>(n));
  p.theta.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    p.alpha[static_cast<std::size_t>(i)] =
        stream.next_normal(mu[static_cast<std::size_t>(i)], cfg.alpha_sigma);
  for (int i = 0; i < n; ++i)
    p.theta[static_cast<std::size_t>(i)] = stream.next_scaled_t3(
        cfg.theta_multiplier, mu[static_cast<std::size_t>(i)], cfg.theta_sigma);

  p.gamma.resize(h.edge_count());
  std::size_t entry = 0;
  for (int i = 0; i < n; ++i) {
    double degree = h.out_degree(i);
    for (int j : h.out_neighbors(i)) {
      double location =
          0.5 * (mu[static_cast<std::size_t>(i)] + mu[static_cast<std::size_t>(j)]);
      double raw = stream.next_scaled_t3(cfg.gamma_multiplier, location, cfg.gamma_sigma);
      p.gamma[entry++] = raw / degree;
    }
  }
  return p;
}

namespace {

using Section = std::map<std::string, std::string>;
using ConfigMap = std::map<std::string, Section>;

ConfigMap parse_sections(const std::string& text) {
  ConfigMap out;
  std::istringstream in(text);
  std::string line;
  std::string section = "";
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    auto end = line.find_last_not_of(" \t\r");
    std::string trimmed = line.substr(start, end - start + 1);
    if (trimmed.front() == '[') {
      if (trimmed.back() != ']')
        throw std::invalid_argument("config line " + std::to_string(line_no) +
                                    ": malformed section header");
      section = trimmed.substr(1, trimmed.size() - 2);
      out[section];
      continue;
    }
    auto eq = trimmed.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key = value");
    std::string key = trimmed.substr(0, eq);
    std::string value = trimmed.substr(eq + 1);
    auto strip = [](std::string& s) {
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t") + 1);
    };
    strip(key);
    strip(value);
    out[section][key] = value;
  }
  return out;
}

const std::string& require(const ConfigMap& cfg, const std::string& section,
                           const std::string& key) {
  auto sec = cfg.find(section);
  if (sec == cfg.end())
    throw std::invalid_argument("config missing section [" + section + "]");
  auto it = sec->second.find(key);
  if (it == sec->second.end())
    throw std::invalid_argument("config missing key " + key + " in [" + section + "]");
  return it->second;
}

std::optional<std::string> lookup(const ConfigMap& cfg, const std::string& section,
                                  const std::string& key) {
  auto sec = cfg.find(section);
  if (sec == cfg.end()) return std::nullopt;
  auto it = sec->second.find(key);
  if (it == sec->second.end()) return std::nullopt;
  return it->second;
}

double get_double(const ConfigMap& cfg, const std::string& section, const std::string& key,
                  double fallback) {
  auto v = lookup(cfg, section, key);
  return v ? std::stod(*v) : fallback;
}

int get_int(const ConfigMap& cfg, const std::string& section, const std::string& key,
            int fallback) {
  auto v = lookup(cfg, section, key);
  return v ? std::stoi(*v) : fallback;
}

std::string adjustment_name(AdjustmentKind kind) {
  switch (kind) {
    case AdjustmentKind::kSpectral: return "spectral";
    case AdjustmentKind::kMergedGroups: return "merged-groups";
    case AdjustmentKind::kTwoWay: return "two-way";
    case AdjustmentKind::kNone: return "none";
  }
  return "none";
}

AdjustmentKind parse_adjustment(const std::string& name) {
  if (name == "spectral") return AdjustmentKind::kSpectral;
  if (name == "merged-groups") return AdjustmentKind::kMergedGroups;
  if (name == "two-way") return AdjustmentKind::kTwoWay;
  if (name == "none") return AdjustmentKind::kNone;
  throw std::invalid_argument("unknown adjustment kind: " + name);
}

std::string scenario_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kPartial: return "partial";
    case ScenarioKind::kMarketplace: return "marketplace";
    case ScenarioKind::kGraphon: return "graphon";
    case ScenarioKind::kExternal: return "external";
  }
  return "partial";
}

ScenarioKind parse_scenario(const std::string& name) {
  if (name == "partial") return ScenarioKind::kPartial;
  if (name == "marketplace") return ScenarioKind::kMarketplace;
  if (name == "graphon") return ScenarioKind::kGraphon;
  if (name == "external") return ScenarioKind::kExternal;
  throw std::invalid_argument("unknown scenario kind: " + name);
}

}  // namespace

std::string ScenarioConfig::to_string() const {
  std::ostringstream out;
  out << "[scenario]\n";
  out << "kind = " << scenario_name(kind) << "\n";
  out << "keep_prob = " << format_double(keep_prob) << "\n";
  out << "\n[design]\n";
  out << "r1 = " << format_double(r1) << "\n";
  out << "\n[parameters]\n";
  out << "alpha_sigma = " << format_double(alpha_sigma) << "\n";
  out << "theta_multiplier = " << format_double(theta_multiplier) << "\n";
  out << "theta_sigma = " << format_double(theta_sigma) << "\n";
  out << "gamma_multiplier = " << format_double(gamma_multiplier) << "\n";
  out << "gamma_sigma = " << format_double(gamma_sigma) << "\n";
  out << "\n[adjustment]\n";
  out << "kind = " << adjustment_name(adjustment) << "\n";
  out << "k = " << k << "\n";
  switch (kind) {
    case ScenarioKind::kPartial:
      out << "\n[partial]\n";
      out << "group_size = " << partial.group_size << "\n";
      out << "groups = " << partial.groups << "\n";
      out << "strata = " << partial.strata << "\n";
      out << "stratum_mu = " << format_double_list(partial.stratum_mu) << "\n";
      break;
    case ScenarioKind::kMarketplace:
      out << "\n[marketplace]\n";
      out << "rows = " << marketplace.rows << "\n";
      out << "cols = " << marketplace.cols << "\n";
      out << "row_strata = " << marketplace.row_strata << "\n";
      out << "col_strata = " << marketplace.col_strata << "\n";
      out << "base_mu = " << format_double(marketplace.base_mu) << "\n";
      out << "row_delta = " << format_double_list(marketplace.row_delta) << "\n";
      out << "col_delta = " << format_double_list(marketplace.col_delta) << "\n";
      break;
    case ScenarioKind::kGraphon: {
      out << "\n[graphon]\n";
      out << "n = " << graphon.n << "\n";
      out << "rho_star = " << format_double(graphon.rho_star) << "\n";
      out << "lambda = " << format_double_list(graphon.spec.lambda) << "\n";
      std::string psis;
      for (std::size_t i = 0; i < graphon.spec.psi.size(); ++i) {
        if (i > 0) psis += "; ";
        psis += graphon.spec.psi[i].to_string();
      }
      out << "psi = " << psis << "\n";
      out << "mu = " << format_double_list(graphon.mu.values) << "\n";
      break;
    }
    case ScenarioKind::kExternal:
      out << "\n[external]\n";
      out << "edge_list = " << external_edge_list << "\n";
      break;
  }
  return out.str();
}

ScenarioConfig ScenarioConfig::from_string(const std::string& text) {
  ConfigMap sections = parse_sections(text);
  ScenarioConfig cfg;
  cfg.kind = parse_scenario(require(sections, "scenario", "kind"));
  cfg.keep_prob = get_double(sections, "scenario", "keep_prob", cfg.keep_prob);
  cfg.r1 = get_double(sections, "design", "r1", cfg.r1);
  cfg.alpha_sigma = get_double(sections, "parameters", "alpha_sigma", cfg.alpha_sigma);
  cfg.theta_multiplier =
      get_double(sections, "parameters", "theta_multiplier", cfg.theta_multiplier);
  cfg.theta_sigma = get_double(sections, "parameters", "theta_sigma", cfg.theta_sigma);
  cfg.gamma_multiplier =
      get_double(sections, "parameters", "gamma_multiplier", cfg.gamma_multiplier);
  cfg.gamma_sigma = get_double(sections, "parameters", "gamma_sigma", cfg.gamma_sigma);
  if (auto v = lookup(sections, "adjustment", "kind")) cfg.adjustment = parse_adjustment(*v);
  cfg.k = get_int(sections, "adjustment", "k", cfg.k);

  switch (cfg.kind) {
    case ScenarioKind::kPartial:
      cfg.partial.group_size = get_int(sections, "partial", "group_size", cfg.partial.group_size);
      cfg.partial.groups = get_int(sections, "partial", "groups", cfg.partial.groups);
      cfg.partial.strata = get_int(sections, "partial", "strata", cfg.partial.strata);
      if (auto v = lookup(sections, "partial", "stratum_mu"))
        cfg.partial.stratum_mu = parse_double_list(*v);
      break;
    case ScenarioKind::kMarketplace:
      cfg.marketplace.rows = get_int(sections, "marketplace", "rows", cfg.marketplace.rows);
      cfg.marketplace.cols = get_int(sections, "marketplace", "cols", cfg.marketplace.cols);
      cfg.marketplace.row_strata =
          get_int(sections, "marketplace", "row_strata", cfg.marketplace.row_strata);
      cfg.marketplace.col_strata =
          get_int(sections, "marketplace", "col_strata", cfg.marketplace.col_strata);
      cfg.marketplace.base_mu =
          get_double(sections, "marketplace", "base_mu", cfg.marketplace.base_mu);
      if (auto v = lookup(sections, "marketplace", "row_delta"))
        cfg.marketplace.row_delta = parse_double_list(*v);
      if (auto v = lookup(sections, "marketplace", "col_delta"))
        cfg.marketplace.col_delta = parse_double_list(*v);
      break;
    case ScenarioKind::kGraphon: {
      cfg.graphon.n = get_int(sections, "graphon", "n", cfg.graphon.n);
      cfg.graphon.rho_star = get_double(sections, "graphon", "rho_star", cfg.graphon.rho_star);
      if (auto v = lookup(sections, "graphon", "lambda"))
        cfg.graphon.spec.lambda = parse_double_list(*v);
      if (auto v = lookup(sections, "graphon", "psi")) {
        cfg.graphon.spec.psi.clear();
        std::istringstream ss(*v);
        std::string item;
        while (std::getline(ss, item, ';')) {
          item.erase(0, item.find_first_not_of(" \t"));
          item.erase(item.find_last_not_of(" \t") + 1);
          if (!item.empty()) cfg.graphon.spec.psi.push_back(PsiSpec::parse(item));
        }
      }
      if (auto v = lookup(sections, "graphon", "mu")) cfg.graphon.mu.values = parse_double_list(*v);
      break;
    }
    case ScenarioKind::kExternal:
      cfg.external_edge_list = require(sections, "external", "edge_list");
      break;
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig ScenarioConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_string(buffer.str());
}

void ScenarioConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write config: " + path);
  out << to_string();
}

void ScenarioConfig::validate() const {
  if (!(r1 > 0.0) || !(r1 < 1.0)) throw std::invalid_argument("r1 must lie in (0,1)");
  if (!(keep_prob >= 0.0) || !(keep_prob <= 1.0))
    throw std::invalid_argument("keep_prob must lie in [0,1]");
  switch (kind) {
    case ScenarioKind::kPartial:
      partial_stratum_labels(partial);
      break;
    case ScenarioKind::kMarketplace:
      check_marketplace_strata(marketplace);
      break;
    case ScenarioKind::kGraphon:
      if (graphon.spec.lambda.size() != graphon.spec.psi.size())
        throw std::invalid_argument("graphon lambda/psi length mismatch");
      if (!(graphon.rho_star >= 0.0) || graphon.rho_star > 1.0)
        throw std::invalid_argument("rho_star must lie in [0,1]");
      if (graphon.mu.values.empty())
        throw std::invalid_argument("graphon mu spec needs at least one value");
      break;
    case ScenarioKind::kExternal:
      if (external_edge_list.empty())
        throw std::invalid_argument("external scenario needs an edge list path");
      break;
  }
  if (adjustment == AdjustmentKind::kSpectral && k < 0)
    throw std::invalid_argument("spectral adjustment needs k >= 0");
}

}  // namespace netate
