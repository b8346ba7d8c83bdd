#include "netate/adjustment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace netate {

namespace {

constexpr double kRankCutoff = 1e-12;
constexpr double kSmallStratumFraction = 0.05;

Eigen::VectorXd random_unit_vector(int n, Pcg32& stream) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = stream.next_double() - 0.5;
  double norm = v.norm();
  if (norm == 0.0) v[0] = 1.0; else v /= norm;
  return v;
}

// Orthogonalize v against the first `cols` columns of q, twice.
double orthogonalize(Eigen::VectorXd& v, const Eigen::MatrixXd& q, int cols) {
  for (int pass = 0; pass < 2; ++pass)
    for (int c = 0; c < cols; ++c) v -= q.col(c).dot(v) * q.col(c);
  return v.norm();
}

struct RitzState {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;
};

RitzState solve_tridiagonal(const std::vector<double>& alpha, const std::vector<double>& beta) {
  const int m = static_cast<int>(alpha.size());
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) t(i, i) = alpha[static_cast<std::size_t>(i)];
  for (int i = 0; i + 1 < m; ++i)
    t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
  return {es.eigenvalues(), es.eigenvectors()};
}

}  // namespace

SpectralBasis top_k_spectrum(const DirectedGraph& g, int k, double tol, int max_iter,
                             Pcg32* stream) {
  const int n = g.n();
  if (k < 1 || k >= n)
    throw std::invalid_argument("top_k_spectrum requires 1 <= K < n, got K=" + std::to_string(k) +
                                ", n=" + std::to_string(n));
  const int want = k + 1;  // K eigenpairs plus the (K+1)-th Ritz value
  if (max_iter <= 0) max_iter = std::max(8 * want, 200);
  max_iter = std::min(max_iter, n);
  if (max_iter < want)
    throw std::invalid_argument("max_iter must allow at least K+1 Lanczos steps");

  Pcg32 local_stream(0x2545f4914f6cdd1dULL, 0);
  Pcg32& rng = stream != nullptr ? *stream : local_stream;

  Eigen::MatrixXd basis(n, max_iter);
  std::vector<double> alpha, beta;  // beta[j] couples columns j and j+1
  std::vector<double> scratch(static_cast<std::size_t>(n));
  Eigen::VectorXd w(n);

  auto apply_eet = [&](const Eigen::VectorXd& v, Eigen::VectorXd& out) {
    g.multiply_transpose({v.data(), static_cast<std::size_t>(n)}, scratch);
    g.multiply(scratch, {out.data(), static_cast<std::size_t>(n)});
  };

  basis.col(0) = random_unit_vector(n, rng);
  int m = 0;
  bool converged = false;
  bool exhausted = false;
  double worst_residual = 0.0;

  while (m < max_iter) {
    apply_eet(basis.col(m), w);
    alpha.push_back(basis.col(m).dot(w));
    ++m;
    if (m == max_iter) break;

    double b = orthogonalize(w, basis, m);
    double scale = std::max({std::abs(alpha.back()), b, 1.0});
    bool deflated = false;
    if (b <= 1e-14 * scale) {
      // Krylov space exhausted an invariant subspace. Restart with a fresh
      // direction so repeated eigenvalues surface with full multiplicity.
      Eigen::VectorXd v = random_unit_vector(n, rng);
      double norm = orthogonalize(v, basis, m);
      int tries = 0;
      while (norm <= 1e-8 && ++tries < 16) {
        v = random_unit_vector(n, rng);
        norm = orthogonalize(v, basis, m);
      }
      if (norm <= 1e-8) {
        exhausted = true;
        break;
      }
      beta.push_back(0.0);
      basis.col(m) = v / norm;
      deflated = true;
    } else {
      beta.push_back(b);
      basis.col(m) = w / b;
    }

    // A zero coupling right after a deflation makes all residuals vanish
    // before the new block has been explored, so skip the check then.
    if (m < want || deflated) continue;

    RitzState ritz = solve_tridiagonal(alpha, beta);
    double top = std::max(std::abs(ritz.values[m - 1]), 1.0);
    double beta_last = beta.back();
    worst_residual = 0.0;
    for (int r = 0; r < want; ++r)
      worst_residual =
          std::max(worst_residual, std::abs(beta_last * ritz.vectors(m - 1, m - 1 - r)));
    if (worst_residual <= tol * top) {
      converged = true;
      break;
    }
  }

  if (m < want)
    throw std::runtime_error("Lanczos could not build K+1 independent directions");
  if (!converged && !exhausted && m < n)
    throw std::runtime_error("top_k_spectrum did not converge after " + std::to_string(m) +
                             " iterations; worst Ritz residual " + std::to_string(worst_residual));

  RitzState ritz = solve_tridiagonal(alpha, beta);

  SpectralBasis out;
  out.k = k;
  out.eigenvalues.resize(static_cast<std::size_t>(k));
  Eigen::MatrixXd raw(n, k + 1);
  raw.col(0).setOnes();
  for (int r = 0; r < k; ++r) {
    int col = m - 1 - r;
    out.eigenvalues[static_cast<std::size_t>(r)] = std::max(ritz.values[col], 0.0);
    raw.col(r + 1) = basis.leftCols(m) * ritz.vectors.col(col);
  }
  out.next_eigenvalue_bound = std::max(ritz.values[m - 1 - k], 0.0);

  double lambda_scale = std::max(out.eigenvalues.front(), 1.0);
  for (int r = 0; r < k; ++r) {
    if (out.eigenvalues[static_cast<std::size_t>(r)] <= 1e-12 * lambda_scale) {
      out.warnings.push_back("eigenvalue " + std::to_string(r + 1) +
                             " is numerically zero; its eigenvector direction is arbitrary");
      break;
    }
  }

  out.w = whiten_columns(raw, WhitenPolicy::kCompleteBasis, &out.warnings);
  return out;
}

Eigen::MatrixXd whiten_columns(const Eigen::MatrixXd& raw, WhitenPolicy policy,
                               std::vector<std::string>* warnings) {
  const auto n = static_cast<double>(raw.rows());
  const int m = static_cast<int>(raw.cols());
  if (m == 0) return raw;
  Eigen::MatrixXd gram = raw.transpose() * raw / n;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  const auto& d = es.eigenvalues();
  double cutoff = kRankCutoff * std::max(d[m - 1], 0.0);

  int rank = 0;
  for (int i = 0; i < m; ++i)
    if (d[i] > cutoff && d[i] > 0.0) ++rank;

  if (rank == m) {
    Eigen::VectorXd inv_sqrt = d.array().rsqrt();
    return raw * (es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose());
  }

  // Orthonormal basis of the span under the (1/n) inner product.
  Eigen::MatrixXd b(raw.rows(), m);
  int col = 0;
  for (int i = m - 1; i >= 0; --i) {
    if (d[i] <= cutoff || d[i] <= 0.0) continue;
    b.col(col++) = raw * es.eigenvectors().col(i) / std::sqrt(n * d[i]);
  }

  if (policy == WhitenPolicy::kReduceToBasis) {
    if (warnings != nullptr)
      warnings->push_back("covariate matrix rank " + std::to_string(rank) + " < " +
                          std::to_string(m) + "; dependent columns dropped");
    Eigen::MatrixXd reduced = b.leftCols(rank);
    return reduced;
  }

  if (warnings != nullptr)
    warnings->push_back("covariate matrix rank " + std::to_string(rank) + " < " +
                        std::to_string(m) +
                        "; basis completed with arbitrary orthonormal directions");
  Pcg32 fill_rng(0x6a09e667f3bcc909ULL, 0);
  while (col < m) {
    Eigen::VectorXd v = random_unit_vector(static_cast<int>(raw.rows()), fill_rng);
    for (int pass = 0; pass < 2; ++pass)
      for (int c = 0; c < col; ++c) v -= (b.col(c).dot(v) / n) * b.col(c);
    double norm = std::sqrt(v.dot(v) / n);
    if (norm <= 1e-10) continue;
    b.col(col++) = v / norm;
  }
  return b;
}

ArmRegression within_arm_ols(std::span<const double> y, const Assignment& z,
                             const Eigen::MatrixXd& w) {
  const int n = static_cast<int>(y.size());
  if (z.n() != n || (w.cols() > 0 && w.rows() != n))
    throw std::invalid_argument("within_arm_ols: dimension mismatch");

  ArmRegression out;
  if (w.cols() == 0) {
    // Forced zero fit: the degenerate K = -1 mode.
    out.residuals.assign(y.begin(), y.end());
    return out;
  }

  const int m = static_cast<int>(w.cols());
  for (int arm = 0; arm < 2; ++arm) {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
      if (static_cast<int>(z.treated(i)) == arm) idx.push_back(i);
    if (idx.empty()) throw std::invalid_argument("arm has no units");

    Eigen::MatrixXd x(static_cast<Eigen::Index>(idx.size()), m);
    Eigen::VectorXd yv(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t r = 0; r < idx.size(); ++r) {
      x.row(static_cast<Eigen::Index>(r)) = w.row(idx[r]);
      yv[static_cast<Eigen::Index>(r)] = y[static_cast<std::size_t>(idx[r])];
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);
    Eigen::VectorXd beta = svd.solve(yv);
    if (svd.rank() < m) {
      out.rank_deficient = true;
      out.warnings.push_back(std::string("arm ") + (arm == 1 ? "1" : "0") + " Gram matrix rank " +
                             std::to_string(svd.rank()) + " < " + std::to_string(m) +
                             "; minimum-norm fit used");
    }
    (arm == 1 ? out.beta1 : out.beta0) = beta;
  }

  out.residuals.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd& beta = z.treated(i) ? out.beta1 : out.beta0;
    out.residuals[static_cast<std::size_t>(i)] =
        y[static_cast<std::size_t>(i)] - w.row(i).dot(beta);
  }
  return out;
}

namespace {

int validate_strata(std::span<const int> labels, const char* what) {
  if (labels.empty()) throw std::invalid_argument("empty stratum label sequence");
  int count = 0;
  for (int s : labels) {
    if (s < 0) throw std::invalid_argument(std::string(what) + ": negative stratum label");
    count = std::max(count, s + 1);
  }
  std::vector<int> sizes(static_cast<std::size_t>(count), 0);
  for (int s : labels) ++sizes[static_cast<std::size_t>(s)];
  for (int s = 0; s < count; ++s)
    if (sizes[static_cast<std::size_t>(s)] == 0)
      throw std::invalid_argument(std::string(what) + ": stratum " + std::to_string(s) +
                                  " has no units");
  return count;
}

void warn_small_strata(std::span<const int> labels, int count, const char* what,
                       std::vector<std::string>& warnings) {
  std::vector<int> sizes(static_cast<std::size_t>(count), 0);
  for (int s : labels) ++sizes[static_cast<std::size_t>(s)];
  auto n = static_cast<double>(labels.size());
  for (int s = 0; s < count; ++s) {
    if (sizes[static_cast<std::size_t>(s)] < kSmallStratumFraction * n)
      warnings.push_back(std::string(what) + " stratum " + std::to_string(s) + " has " +
                         std::to_string(sizes[static_cast<std::size_t>(s)]) +
                         " units; adjustment assumes strata comparable to the population size");
  }
}

}  // namespace

CovariateMatrix merged_group_covariates(std::span<const int> strata) {
  int count = validate_strata(strata, "merged-groups");
  CovariateMatrix out;
  warn_small_strata(strata, count, "merged-groups", out.warnings);
  const auto n = static_cast<Eigen::Index>(strata.size());
  Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(n, count);
  raw.col(0).setOnes();
  for (Eigen::Index i = 0; i < n; ++i) {
    int s = strata[static_cast<std::size_t>(i)];
    if (s < count - 1) raw(i, s + 1) = 1.0;
  }
  out.w = whiten_columns(raw, WhitenPolicy::kReduceToBasis, &out.warnings);
  return out;
}

CovariateMatrix two_way_covariates(std::span<const int> row_strata,
                                   std::span<const int> col_strata) {
  if (row_strata.size() != col_strata.size())
    throw std::invalid_argument("two-way: row and column label sequences must align");
  int rows = validate_strata(row_strata, "two-way rows");
  int cols = validate_strata(col_strata, "two-way columns");
  CovariateMatrix out;
  warn_small_strata(row_strata, rows, "two-way row", out.warnings);
  warn_small_strata(col_strata, cols, "two-way column", out.warnings);
  const auto n = static_cast<Eigen::Index>(row_strata.size());
  Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(n, 1 + (rows - 1) + (cols - 1));
  raw.col(0).setOnes();
  for (Eigen::Index i = 0; i < n; ++i) {
    int r = row_strata[static_cast<std::size_t>(i)];
    int c = col_strata[static_cast<std::size_t>(i)];
    if (r < rows - 1) raw(i, 1 + r) = 1.0;
    if (c < cols - 1) raw(i, rows + c) = 1.0;
  }
  out.w = whiten_columns(raw, WhitenPolicy::kReduceToBasis, &out.warnings);
  return out;
}

}  // namespace netate
