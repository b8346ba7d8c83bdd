#include "netate/oracle.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "netate/estimators.hpp"

namespace netate {

namespace {

struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    double y = x - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

ConditionalMeans::ConditionalMeans(const HateParameters& p, const Design& d)
    : params_(&p), h_(p.spillover_totals()), r1_(d.r1) {
  p.validate();
}

double ConditionalMeans::given_own(int i, int z) const {
  return params_->alpha[static_cast<std::size_t>(i)] +
         params_->theta[static_cast<std::size_t>(i)] * z + r1_ * h_[static_cast<std::size_t>(i)];
}

double ConditionalMeans::given_own_and_other(int i, int z_i, int j, int z_j) const {
  double g = params_->gamma_entry(i, j);
  return params_->alpha[static_cast<std::size_t>(i)] +
         params_->theta[static_cast<std::size_t>(i)] * z_i + g * z_j +
         r1_ * (h_[static_cast<std::size_t>(i)] - g);
}

ConditionalMeans conditional_means(const HateParameters& p, const Design& d) {
  return ConditionalMeans(p, d);
}

namespace {

// A_ij = E_ij theta_i + sum_k E_kj gamma~_ki, the quadratic kernel of the
// indirect estimator. Dense; oracle scale only.
Eigen::MatrixXd indirect_quadratic_kernel(const HateParameters& p, const DirectedGraph& g) {
  const int n = g.n();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j : g.out_neighbors(i)) a(i, j) += p.theta[static_cast<std::size_t>(i)];
  for (int k = 0; k < n; ++k) {
    auto hidden_targets = p.support.out_neighbors(k);
    auto hidden_values = p.gamma_row(k);
    for (int j : g.out_neighbors(k))
      for (std::size_t t = 0; t < hidden_targets.size(); ++t)
        a(hidden_targets[t], j) += hidden_values[t];
  }
  a.diagonal().setZero();
  return a;
}

double quadratic_variance(const Eigen::MatrixXd& d) {
  const int n = static_cast<int>(d.rows());
  KahanSum squares, cross;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      squares.add(d(i, j) * d(i, j));
      cross.add(d(i, j) * d(j, i));
    }
  double n2 = static_cast<double>(n) * n;
  return (squares.sum + cross.sum) / n2;
}

Eigen::MatrixXd gamma_dense(const HateParameters& p) {
  const int n = p.n();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    auto targets = p.support.out_neighbors(i);
    auto values = p.gamma_row(i);
    for (std::size_t t = 0; t < targets.size(); ++t) g(i, targets[t]) = values[t];
  }
  return g;
}

}  // namespace

VarianceDecomposition closed_form_variance_mixed(EstimandKind kind, const HateParameters& ego,
                                                 const HateParameters& neighbor,
                                                 const DirectedGraph& g, const Design& d) {
  const int n = g.n();
  if (ego.n() != n || neighbor.n() != n)
    throw std::invalid_argument("parameter/graph dimension mismatch");
  const double r1 = d.r1;
  const double r0 = d.r0();
  const double n2 = static_cast<double>(n) * n;
  ConditionalMeans cm_ego(ego, d);
  ConditionalMeans cm_nb(neighbor, d);

  VarianceDecomposition out;
  switch (kind) {
    case EstimandKind::kDir: {
      KahanSum linear;
      for (int i = 0; i < n; ++i) {
        double c = r0 * cm_ego.given_own(i, 1) + r1 * cm_ego.given_own(i, 0);
        linear.add(c * c);
      }
      out.component1 = linear.sum / (n2 * r1 * r0);
      out.component2 = quadratic_variance(gamma_dense(ego));
      return out;
    }
    case EstimandKind::kInd: {
      KahanSum linear;
      for (int j = 0; j < n; ++j) {
        KahanSum col;
        for (int i : g.in_neighbors(j)) {
          col.add(r1 * r0 * cm_nb.given_own_and_other(i, 1, j, 1) +
                  r0 * r0 * cm_nb.given_own_and_other(i, 0, j, 1) +
                  r1 * r1 * cm_nb.given_own_and_other(i, 1, j, 0) +
                  r1 * r0 * cm_nb.given_own_and_other(i, 0, j, 0));
        }
        linear.add(col.sum * col.sum);
      }
      out.component1 = linear.sum / (n2 * r1 * r0);
      out.component2 = quadratic_variance(indirect_quadratic_kernel(neighbor, g));
      return out;
    }
    case EstimandKind::kTot: {
      KahanSum linear;
      for (int i = 0; i < n; ++i) {
        double c = r0 * cm_ego.given_own(i, 1) + r1 * cm_ego.given_own(i, 0);
        KahanSum nb;
        for (int j : g.in_neighbors(i)) {
          nb.add(r1 * r0 * cm_nb.given_own_and_other(j, 1, i, 1) +
                 r0 * r0 * cm_nb.given_own_and_other(j, 0, i, 1) +
                 r1 * r1 * cm_nb.given_own_and_other(j, 1, i, 0) +
                 r1 * r0 * cm_nb.given_own_and_other(j, 0, i, 0));
        }
        double t = c + nb.sum;
        linear.add(t * t);
      }
      out.component1 = linear.sum / (n2 * r1 * r0);
      Eigen::MatrixXd kernel = gamma_dense(ego) + indirect_quadratic_kernel(neighbor, g);
      out.component2 = quadratic_variance(kernel);
      return out;
    }
    default:
      throw std::invalid_argument("closed_form_variance expects DIR, IND, or TOT");
  }
}

VarianceDecomposition closed_form_variance(EstimandKind kind, const HateParameters& p,
                                           const DirectedGraph& g, const Design& d) {
  return closed_form_variance_mixed(kind, p, p, g, d);
}

std::vector<Moments> enumerate_joint_moments(const HateParameters& p, const Design& d,
                                             std::span<const Statistic> statistics,
                                             int max_n) {
  p.validate();
  const int n = p.n();
  if (n < 1) throw std::invalid_argument("enumeration requires n >= 1");
  if (n > 20)
    throw std::invalid_argument("enumeration is hard-capped at n = 20 (2^" + std::to_string(n) +
                                " assignments)");
  if (n > max_n)
    throw std::invalid_argument("n = " + std::to_string(n) + " exceeds max_n = " +
                                std::to_string(max_n) + "; would evaluate " +
                                std::to_string(std::uint64_t{1} << n) + " assignments");

  // Hidden in-edges with their gamma values, for incremental outcome updates.
  std::vector<std::vector<std::pair<int, double>>> in_gamma(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto targets = p.support.out_neighbors(i);
    auto values = p.gamma_row(i);
    for (std::size_t t = 0; t < targets.size(); ++t)
      in_gamma[static_cast<std::size_t>(targets[t])].emplace_back(i, values[t]);
  }

  const std::uint64_t total = std::uint64_t{1} << n;
  auto sweep = [&](auto&& visit) {
    Assignment z;
    z.z.assign(static_cast<std::size_t>(n), 0);
    std::vector<double> y(p.alpha.begin(), p.alpha.end());
    int treated = 0;
    visit(z, y, std::pow(d.r0(), n));
    for (std::uint64_t counter = 1; counter < total; ++counter) {
      int b = std::countr_zero(counter);
      bool now = !z.treated(b);
      z.z[static_cast<std::size_t>(b)] = now ? 1 : 0;
      double sign = now ? 1.0 : -1.0;
      y[static_cast<std::size_t>(b)] += sign * p.theta[static_cast<std::size_t>(b)];
      for (auto [i, gv] : in_gamma[static_cast<std::size_t>(b)])
        y[static_cast<std::size_t>(i)] += sign * gv;
      treated += now ? 1 : -1;
      visit(z, y, std::pow(d.r1, treated) * std::pow(d.r0(), n - treated));
    }
  };

  std::vector<KahanSum> means(statistics.size());
  sweep([&](const Assignment& z, const std::vector<double>& y, double weight) {
    for (std::size_t s = 0; s < statistics.size(); ++s)
      means[s].add(weight * statistics[s](z, y));
  });

  std::vector<KahanSum> centered(statistics.size());
  sweep([&](const Assignment& z, const std::vector<double>& y, double weight) {
    for (std::size_t s = 0; s < statistics.size(); ++s) {
      double dev = statistics[s](z, y) - means[s].sum;
      centered[s].add(weight * dev * dev);
    }
  });

  std::vector<Moments> out(statistics.size());
  for (std::size_t s = 0; s < statistics.size(); ++s)
    out[s] = {means[s].sum, centered[s].sum};
  return out;
}

Statistic make_statistic(StatisticId id, const DirectedGraph& g, const Design& d) {
  switch (id) {
    case StatisticId::kTauDir:
      return [d](const Assignment& z, std::span<const double> y) { return ht_direct(y, z, d); };
    case StatisticId::kTauInd:
      return [&g, d](const Assignment& z, std::span<const double> y) {
        return ht_indirect(y, z, g, d);
      };
    case StatisticId::kTauTot:
      return [&g, d](const Assignment& z, std::span<const double> y) {
        return ht_total(y, z, g, d);
      };
    case StatisticId::kVhatDir:
      return [d](const Assignment& z, std::span<const double> y) { return var_dir_hat(y, z, d); };
    case StatisticId::kVhatInd:
      return [&g, d](const Assignment& z, std::span<const double> y) {
        return var_ind_hat(y, z, g, d);
      };
    case StatisticId::kVhatTot:
      return [&g, d](const Assignment& z, std::span<const double> y) {
        return var_tot_hat(y, z, g, d);
      };
  }
  throw std::invalid_argument("unknown statistic");
}

Moments enumerate_moments(const HateParameters& p, const DirectedGraph& g, const Design& d,
                          StatisticId statistic, int max_n) {
  Statistic s = make_statistic(statistic, g, d);
  return enumerate_joint_moments(p, d, {&s, 1}, max_n)[0];
}

OracleResiduals oracle_adjustment(const HateParameters& p, const DirectedGraph& g,
                                  const Eigen::MatrixXd& w, const Design& d) {
  p.validate();
  const int n = p.n();
  if (g.n() != n || w.rows() != n) throw std::invalid_argument("dimension mismatch");
  const auto cols = w.cols();
  Eigen::MatrixXd gram = w.transpose() * w / static_cast<double>(n);
  if ((gram - Eigen::MatrixXd::Identity(cols, cols)).cwiseAbs().maxCoeff() > 1e-8)
    throw std::invalid_argument("oracle_adjustment requires whitened covariates");

  ConditionalMeans cm(p, d);
  Eigen::VectorXd y1(n), y0(n);
  for (int i = 0; i < n; ++i) {
    y1[i] = cm.given_own(i, 1);
    y0[i] = cm.given_own(i, 0);
  }

  OracleResiduals out;
  out.beta1_ora = w.transpose() * y1 / static_cast<double>(n);
  out.beta0_ora = w.transpose() * y0 / static_cast<double>(n);

  out.residual_params.support = p.support;
  out.residual_params.gamma = p.gamma;
  out.residual_params.alpha.resize(static_cast<std::size_t>(n));
  out.residual_params.theta.resize(static_cast<std::size_t>(n));
  Eigen::VectorXd beta_diff = out.beta1_ora - out.beta0_ora;
  for (int i = 0; i < n; ++i) {
    out.residual_params.alpha[static_cast<std::size_t>(i)] =
        p.alpha[static_cast<std::size_t>(i)] - w.row(i).dot(out.beta0_ora);
    out.residual_params.theta[static_cast<std::size_t>(i)] =
        p.theta[static_cast<std::size_t>(i)] - w.row(i).dot(beta_diff);
  }

  ConditionalMeans cm_res(out.residual_params, d);
  out.e_treated.resize(static_cast<std::size_t>(n));
  out.e_control.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out.e_treated[static_cast<std::size_t>(i)] = cm_res.given_own(i, 1);
    out.e_control[static_cast<std::size_t>(i)] = cm_res.given_own(i, 0);
  }

  KahanSum treated_sq, control_sq;
  for (int i = 0; i < n; ++i) {
    KahanSum t, c;
    for (int j : g.in_neighbors(i)) {
      t.add(out.e_treated[static_cast<std::size_t>(j)]);
      c.add(out.e_control[static_cast<std::size_t>(j)]);
    }
    treated_sq.add(t.sum * t.sum);
    control_sq.add(c.sum * c.sum);
  }
  out.delta_n = std::max(treated_sq.sum, control_sq.sum) / n;

  out.ev_ind = closed_form_variance_mixed(EstimandKind::kInd, out.residual_params,
                                          out.residual_params, g, d);
  out.ev_tot = closed_form_variance_mixed(EstimandKind::kTot, p, out.residual_params, g, d);
  return out;
}

RandomInstance make_random_instance(int n, Pcg32& stream) {
  if (n < 2) throw std::invalid_argument("instance requires n >= 2");
  std::vector<Edge> observed;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && stream.next_bernoulli(0.35)) observed.emplace_back(i, j);
  RandomInstance out;
  out.graph = DirectedGraph::from_edge_list(observed, n);

  std::vector<Edge> hidden;
  for (auto e : out.graph.edges())
    if (stream.next_bernoulli(0.6)) hidden.push_back(e);

  out.params.support = HiddenNetwork::from_edge_list(hidden, n);
  out.params.alpha.resize(static_cast<std::size_t>(n));
  out.params.theta.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out.params.alpha[static_cast<std::size_t>(i)] = stream.next_normal(0.5, 1.0);
    out.params.theta[static_cast<std::size_t>(i)] = stream.next_normal(0.8, 1.0);
  }
  out.params.gamma.resize(out.params.support.edge_count());
  for (double& gv : out.params.gamma) gv = stream.next_normal(0.4, 1.0);
  return out;
}

std::vector<IdentityCheck> oracle_check(std::uint64_t seed, int n, double r1,
                                        bool tamper_variance) {
  Pcg32 stream(seed, 0);
  RandomInstance inst = make_random_instance(n, stream);
  const Design d(r1);
  const DirectedGraph& g = inst.graph;
  const HateParameters& p = inst.params;
  Estimands truth = true_estimands(p);

  const double tamper = tamper_variance ? 1.05 : 1.0;
  Statistic stats[6] = {
      make_statistic(StatisticId::kTauDir, g, d),
      make_statistic(StatisticId::kTauInd, g, d),
      make_statistic(StatisticId::kTauTot, g, d),
      [&g, d, tamper](const Assignment& z, std::span<const double> y) {
        return tamper * var_dir_hat(y, z, d);
      },
      make_statistic(StatisticId::kVhatInd, g, d),
      make_statistic(StatisticId::kVhatTot, g, d),
  };
  auto moments = enumerate_joint_moments(p, d, stats, 16);

  const double tol = 1e-10;
  std::vector<IdentityCheck> checks;
  auto two_sided = [&](std::string name, double lhs, double rhs) {
    IdentityCheck c{std::move(name), lhs, rhs, tol, false, false};
    c.pass = std::abs(lhs - rhs) <= tol;
    checks.push_back(std::move(c));
  };
  auto one_sided = [&](std::string name, double lhs, double rhs) {
    IdentityCheck c{std::move(name), lhs, rhs, tol, true, false};
    c.pass = lhs >= rhs - tol;
    checks.push_back(std::move(c));
  };

  two_sided("unbiasedness DIR: E[est] = estimand", moments[0].mean, truth.tau_dir);
  two_sided("unbiasedness IND: E[est] = estimand", moments[1].mean, truth.tau_ind);
  two_sided("unbiasedness TOT: E[est] = estimand", moments[2].mean, truth.tau_tot);

  auto var_dir = closed_form_variance(EstimandKind::kDir, p, g, d);
  auto var_ind = closed_form_variance(EstimandKind::kInd, p, g, d);
  auto var_tot = closed_form_variance(EstimandKind::kTot, p, g, d);
  two_sided("variance decomposition DIR", moments[0].variance, var_dir.total());
  two_sided("variance decomposition IND", moments[1].variance, var_ind.total());
  two_sided("variance decomposition TOT", moments[2].variance, var_tot.total());

  double theta_sq = 0.0, gamma_cross = 0.0;
  for (double t : p.theta) theta_sq += t * t;
  for (int i = 0; i < n; ++i) {
    auto targets = p.support.out_neighbors(i);
    auto values = p.gamma_row(i);
    for (std::size_t k = 0; k < targets.size(); ++k)
      gamma_cross += values[k] * p.gamma_entry(targets[k], i);
  }
  const double n2 = static_cast<double>(n) * n;
  two_sided("variance estimator DIR bias identity", moments[3].mean - moments[0].variance,
            theta_sq / n2 - gamma_cross / n2);
  one_sided("doubled variance estimator conservative, IND", 2.0 * moments[4].mean,
            moments[1].variance);
  one_sided("doubled variance estimator conservative, TOT", 2.0 * moments[5].mean,
            moments[2].variance);

  // Adjusted-estimator identities with intercept-only covariates.
  Eigen::MatrixXd w = Eigen::MatrixXd::Ones(n, 1);
  OracleResiduals ora = oracle_adjustment(p, g, w, d);
  double mean_theta = 0.0;
  for (double t : p.theta) mean_theta += t;
  mean_theta /= n;
  two_sided("oracle coefficient gap = W-projection of direct effects",
            ora.beta1_ora[0] - ora.beta0_ora[0], mean_theta);

  // Oracle residuals are a linear function of (z, y), so the adjusted
  // statistics can be evaluated inside the raw enumeration.
  auto residualize = [&](const Assignment& z, std::span<const double> y) {
    std::vector<double> e(y.size());
    for (int i = 0; i < n; ++i)
      e[static_cast<std::size_t>(i)] =
          y[static_cast<std::size_t>(i)] -
          w.row(i).dot(z.treated(i) ? ora.beta1_ora : ora.beta0_ora);
    return e;
  };
  Statistic ev_stats[2] = {
      [&](const Assignment& z, std::span<const double> y) {
        return ht_indirect(residualize(z, y), z, g, d);
      },
      [&](const Assignment& z, std::span<const double> y) {
        return ht_direct(y, z, d) + ht_indirect(residualize(z, y), z, g, d);
      },
  };
  auto ev_moments = enumerate_joint_moments(p, d, ev_stats, 16);
  two_sided("adjusted estimator unbiased, IND", ev_moments[0].mean, truth.tau_ind);
  two_sided("adjusted estimator unbiased, TOT", ev_moments[1].mean, truth.tau_tot);
  two_sided("adjusted variance decomposition IND", ev_moments[0].variance, ora.ev_ind.total());
  two_sided("adjusted variance decomposition TOT", ev_moments[1].variance, ora.ev_tot.total());

  return checks;
}

}  // namespace netate
