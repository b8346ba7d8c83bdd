#include "netate/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "netate/rng.hpp"

namespace netate {

SparseRows::SparseRows(int n, std::vector<Edge> edges, EdgeListSummary* summary) : n_(n) {
  std::sort(edges.begin(), edges.end());
  std::size_t before = edges.size();
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  if (summary != nullptr) {
    summary->duplicates_collapsed += before - edges.size();
    summary->edges_kept = edges.size();
  }
  offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  targets_.reserve(edges.size());
  std::size_t pos = 0;
  for (int i = 0; i < n; ++i) {
    while (pos < edges.size() && edges[pos].first == i) {
      targets_.push_back(edges[pos].second);
      ++pos;
    }
    offsets_[static_cast<std::size_t>(i) + 1] = targets_.size();
  }
}

bool SparseRows::has(int i, int j) const { return entry_index(i, j) >= 0; }

std::ptrdiff_t SparseRows::entry_index(int i, int j) const {
  auto r = row(i);
  auto it = std::lower_bound(r.begin(), r.end(), j);
  if (it == r.end() || *it != j) return -1;
  return static_cast<std::ptrdiff_t>(offsets_[i] + static_cast<std::size_t>(it - r.begin()));
}

std::vector<Edge> SparseRows::edges() const {
  std::vector<Edge> out;
  out.reserve(targets_.size());
  for (int i = 0; i < n_; ++i)
    for (int j : row(i)) out.emplace_back(i, j);
  return out;
}

namespace {

void validate_edges(const std::vector<Edge>& edges, int n) {
  if (n < 0) throw std::invalid_argument("unit count must be nonnegative");
  for (std::size_t k = 0; k < edges.size(); ++k) {
    auto [s, t] = edges[k];
    if (s == t)
      throw std::invalid_argument("self-loop edge (" + std::to_string(s) + "," +
                                  std::to_string(t) + ") at position " + std::to_string(k));
    if (s < 0 || t < 0 || s >= n || t >= n)
      throw std::invalid_argument("edge (" + std::to_string(s) + "," + std::to_string(t) +
                                  ") out of range for n=" + std::to_string(n));
  }
}

std::vector<Edge> transposed(const std::vector<Edge>& edges) {
  std::vector<Edge> out;
  out.reserve(edges.size());
  for (auto [s, t] : edges) out.emplace_back(t, s);
  return out;
}

}  // namespace

DirectedGraph DirectedGraph::from_edge_list(std::vector<Edge> edges, int n,
                                            EdgeListSummary* summary) {
  validate_edges(edges, n);
  DirectedGraph g;
  g.rows_ = SparseRows(n, edges, summary);
  g.transpose_ = SparseRows(n, transposed(g.rows_.edges()), nullptr);
  return g;
}

bool DirectedGraph::is_symmetric() const {
  for (int i = 0; i < n(); ++i)
    for (int j : out_neighbors(i))
      if (!has_edge(j, i)) return false;
  return true;
}

void DirectedGraph::multiply(std::span<const double> v, std::span<double> out) const {
  for (int i = 0; i < n(); ++i) {
    double s = 0.0;
    for (int j : out_neighbors(i)) s += v[j];
    out[i] = s;
  }
}

void DirectedGraph::multiply_transpose(std::span<const double> v, std::span<double> out) const {
  for (int i = 0; i < n(); ++i) {
    double s = 0.0;
    for (int j : in_neighbors(i)) s += v[j];
    out[i] = s;
  }
}

double density(const DirectedGraph& g) {
  if (g.n() < 1) throw std::invalid_argument("density requires n >= 1");
  return static_cast<double>(g.edge_count()) / (static_cast<double>(g.n()) * g.n());
}

HiddenNetwork HiddenNetwork::from_edge_list(std::vector<Edge> edges, int n,
                                            EdgeListSummary* summary) {
  validate_edges(edges, n);
  HiddenNetwork h;
  h.rows_ = SparseRows(n, std::move(edges), summary);
  return h;
}

bool HiddenNetwork::is_subgraph_of(const DirectedGraph& g) const {
  if (g.n() != n()) return false;
  for (int i = 0; i < n(); ++i)
    for (int j : out_neighbors(i))
      if (!g.has_edge(i, j)) return false;
  return true;
}

NormalizedLatent normalized_latent(const HiddenNetwork& h) {
  NormalizedLatent q;
  q.n = h.n();
  q.offsets.assign(static_cast<std::size_t>(h.n()) + 1, 0);
  q.targets.reserve(h.edge_count());
  q.values.reserve(h.edge_count());
  for (int i = 0; i < h.n(); ++i) {
    int deg = h.out_degree(i);
    if (deg > 0) {
      double w = 1.0 / deg;
      for (int j : h.out_neighbors(i)) {
        q.targets.push_back(j);
        q.values.push_back(w);
      }
    }
    q.offsets[static_cast<std::size_t>(i) + 1] = q.targets.size();
  }
  return q;
}

OperatorNormEstimate operator_norm_estimate(const DirectedGraph& g, double tol, int max_iter) {
  const int n = g.n();
  if (n < 1) throw std::invalid_argument("operator_norm_estimate requires n >= 1");
  if (g.edge_count() == 0) return {0.0, true, 0};

  Pcg32 rng(0x9e3779b97f4a7c15ULL, 0);
  std::vector<double> v(n), u(n), w(n);
  for (double& x : v) x = rng.next_double() - 0.5;
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;

  double lambda = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    g.multiply_transpose(v, u);
    g.multiply(u, w);
    double next = 0.0;
    for (int i = 0; i < n; ++i) next += v[i] * w[i];  // Rayleigh quotient for E E^T
    double wn = 0.0;
    for (double x : w) wn += x * x;
    wn = std::sqrt(wn);
    if (wn == 0.0) return {0.0, true, it};  // v fell in the null space
    for (int i = 0; i < n; ++i) v[i] = w[i] / wn;
    if (it > 1 && std::abs(next - lambda) <= tol * std::max(std::abs(next), 1.0))
      return {std::sqrt(std::max(next, 0.0)), true, it};
    lambda = next;
  }
  return {std::sqrt(std::max(lambda, 0.0)), false, max_iter};
}

namespace {

bool numeric_field(const std::string& s) {
  if (s.empty()) return false;
  char* end = nullptr;
  std::strtol(s.c_str(), &end, 10);
  return end != s.c_str() && *end == '\0';
}

}  // namespace

std::vector<Edge> parse_edge_list(std::istream& in, int* max_index) {
  std::vector<Edge> edges;
  int max_idx = -1;
  std::string line;
  std::size_t line_no = 0;
  bool first_data_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    auto start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    std::istringstream fields(line);
    std::string a, b;
    if (!std::getline(fields, a, ',') || !std::getline(fields, b, ',')) {
      throw std::invalid_argument("edge list line " + std::to_string(line_no) +
                                  ": expected `source,target`");
    }
    auto trim = [](std::string& s) {
      s.erase(0, s.find_first_not_of(" \t\r"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
    };
    trim(a);
    trim(b);
    if (first_data_line && (!numeric_field(a) || !numeric_field(b))) {
      first_data_line = false;  // header
      continue;
    }
    first_data_line = false;
    if (!numeric_field(a) || !numeric_field(b))
      throw std::invalid_argument("edge list line " + std::to_string(line_no) +
                                  ": non-numeric field");
    int s = std::stoi(a);
    int t = std::stoi(b);
    edges.emplace_back(s, t);
    max_idx = std::max({max_idx, s, t});
  }
  if (max_index != nullptr) *max_index = max_idx;
  return edges;
}

DirectedGraph load_edge_list(const std::string& path, int n, EdgeListSummary* summary) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open edge list: " + path);
  int max_idx = -1;
  auto edges = parse_edge_list(in, &max_idx);
  int units = n >= 0 ? n : max_idx + 1;
  return DirectedGraph::from_edge_list(std::move(edges), units, summary);
}

}  // namespace netate
