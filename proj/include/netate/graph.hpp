#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace netate {

using Edge = std::pair<int, int>;

struct EdgeListSummary {
  std::size_t edges_kept = 0;
  std::size_t duplicates_collapsed = 0;
};

// Compressed sparse rows: row i holds the sorted target indices of edges
// leaving i. Shared by the observed and hidden networks.
class SparseRows {
 public:
  SparseRows() = default;
  SparseRows(int n, std::vector<Edge> edges, EdgeListSummary* summary);

  int n() const { return n_; }
  std::size_t edge_count() const { return targets_.size(); }
  std::span<const int> row(int i) const {
    return {targets_.data() + offsets_[i], targets_.data() + offsets_[i + 1]};
  }
  int row_degree(int i) const { return static_cast<int>(offsets_[i + 1] - offsets_[i]); }
  bool has(int i, int j) const;
  // Index of edge (i, j) in the flat entry order, or -1.
  std::ptrdiff_t entry_index(int i, int j) const;
  std::vector<Edge> edges() const;

 private:
  int n_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<int> targets_;
};

// Observed interference network E: binary, directed, no self-loops. Both
// the row-major adjacency and its transpose are built at construction so
// concurrent readers never race on a lazily built index.
class DirectedGraph {
 public:
  DirectedGraph() = default;

  // Rejects self-loops and out-of-range indices; duplicates are collapsed
  // silently with a count reported through `summary`.
  static DirectedGraph from_edge_list(std::vector<Edge> edges, int n,
                                      EdgeListSummary* summary = nullptr);

  int n() const { return rows_.n(); }
  std::size_t edge_count() const { return rows_.edge_count(); }
  std::span<const int> out_neighbors(int i) const { return rows_.row(i); }
  std::span<const int> in_neighbors(int i) const { return transpose_.row(i); }
  int out_degree(int i) const { return rows_.row_degree(i); }
  int in_degree(int i) const { return transpose_.row_degree(i); }
  bool has_edge(int i, int j) const { return rows_.has(i, j); }
  std::vector<Edge> edges() const { return rows_.edges(); }
  bool is_symmetric() const;

  // w = E v (out-neighbor sums) and w = E^T v (in-neighbor sums).
  void multiply(std::span<const double> v, std::span<double> out) const;
  void multiply_transpose(std::span<const double> v, std::span<double> out) const;

 private:
  SparseRows rows_;
  SparseRows transpose_;
};

// rho_N = sum_i N_i / N^2.
double density(const DirectedGraph& g);

// Hidden sub-network that actually carries interference.
class HiddenNetwork {
 public:
  HiddenNetwork() = default;
  static HiddenNetwork from_edge_list(std::vector<Edge> edges, int n,
                                      EdgeListSummary* summary = nullptr);

  int n() const { return rows_.n(); }
  std::size_t edge_count() const { return rows_.edge_count(); }
  std::span<const int> out_neighbors(int i) const { return rows_.row(i); }
  int out_degree(int i) const { return rows_.row_degree(i); }
  bool has_edge(int i, int j) const { return rows_.has(i, j); }
  std::ptrdiff_t entry_index(int i, int j) const { return rows_.entry_index(i, j); }
  std::vector<Edge> edges() const { return rows_.edges(); }
  bool is_subgraph_of(const DirectedGraph& g) const;

 private:
  SparseRows rows_;
};

// Row-normalized latent adjacency Q. Rows with zero hidden out-degree are
// all zeros, matching the convention that such units receive no spillover.
struct NormalizedLatent {
  int n = 0;
  std::vector<std::size_t> offsets{0};
  std::vector<int> targets;
  std::vector<double> values;

  std::span<const int> row_targets(int i) const {
    return {targets.data() + offsets[i], targets.data() + offsets[i + 1]};
  }
  std::span<const double> row_values(int i) const {
    return {values.data() + offsets[i], values.data() + offsets[i + 1]};
  }
};

NormalizedLatent normalized_latent(const HiddenNetwork& h);

struct OperatorNormEstimate {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Largest singular value of E via power iteration on E E^T. Deterministic
// (fixed internal start vector); diagnostic use only.
OperatorNormEstimate operator_norm_estimate(const DirectedGraph& g, double tol = 1e-10,
                                            int max_iter = 1000);

// Edge-list text format: one `source,target` pair per line, `#` comments
// ignored, optional header detected when the first field is non-numeric.
// Unit count is max index + 1 unless a larger n is forced.
std::vector<Edge> parse_edge_list(std::istream& in, int* max_index);
DirectedGraph load_edge_list(const std::string& path, int n = -1,
                             EdgeListSummary* summary = nullptr);

}  // namespace netate
