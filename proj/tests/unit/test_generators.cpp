#include <doctest.h>

#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "netate/generators.hpp"
#include "test_util.hpp"

using namespace netate;

TEST_CASE("partial interference graph") {
  SUBCASE("degrees and density at the first scenario size") {
    auto g = partial_interference_graph(10, 45);
    REQUIRE(g.n() == 450);
    for (int i = 0; i < g.n(); ++i) CHECK(g.out_degree(i) == 9);
    CHECK(density(g) == doctest::Approx(0.02).epsilon(1e-14));
  }
  SUBCASE("singleton groups are edgeless") {
    auto g = partial_interference_graph(1, 7);
    CHECK(g.edge_count() == 0);
  }
  SUBCASE("adjacency spectrum of the two-block graph") {
    auto g = partial_interference_graph(3, 2);
    Eigen::EigenSolver<Eigen::MatrixXd> es(test_util::dense_adjacency(g));
    std::vector<double> real_parts;
    for (int i = 0; i < 6; ++i) real_parts.push_back(es.eigenvalues()[i].real());
    std::sort(real_parts.begin(), real_parts.end());
    CHECK(real_parts[0] == doctest::Approx(-1.0));
    CHECK(real_parts[3] == doctest::Approx(-1.0));
    CHECK(real_parts[4] == doctest::Approx(2.0));
    CHECK(real_parts[5] == doctest::Approx(2.0));
  }
}

TEST_CASE("marketplace graph") {
  SUBCASE("degrees at the paper sizes") {
    auto g = marketplace_graph(20, 20);
    REQUIRE(g.n() == 400);
    for (int i = 0; i < g.n(); ++i) CHECK(g.out_degree(i) == 38);
    CHECK(density(g) == doctest::Approx(0.095).epsilon(1e-14));
  }
  SUBCASE("single pair") {
    auto g = marketplace_graph(1, 1);
    CHECK(g.n() == 1);
    CHECK(g.edge_count() == 0);
  }
  SUBCASE("larger marketplace density") {
    auto g = marketplace_graph(60, 60);
    CHECK(density(g) == doctest::Approx(59.0 / 1800.0).epsilon(1e-14));
    CHECK(density(g) == doctest::Approx(0.0328).epsilon(0.01));
  }
  SUBCASE("symmetry") {
    auto g = marketplace_graph(3, 5);
    CHECK(g.is_symmetric());
  }
}

TEST_CASE("graphon graphs") {
  SUBCASE("constant graphon is Erdos-Renyi") {
    GraphonSpec spec;  // lambda = {1}, psi = {const}
    Pcg32 stream(211, 0);
    auto draw = graphon_graph(400, 0.3, spec, stream);
    CHECK(draw.graph.is_symmetric());
    CHECK(draw.u.size() == 400);
    double possible = 400.0 * 399.0;
    double density_hat = static_cast<double>(draw.graph.edge_count()) / possible;
    // ~79800 pair draws at p = 0.3: 5 sigma is about 0.008.
    CHECK(std::abs(density_hat - 0.3) < 0.01);
  }
  SUBCASE("zero density gives the edgeless graph") {
    GraphonSpec spec;
    Pcg32 stream(223, 0);
    auto draw = graphon_graph(50, 0.0, spec, stream);
    CHECK(draw.graph.edge_count() == 0);
  }
  SUBCASE("two-block step graphon hits its block densities") {
    GraphonSpec spec;
    spec.lambda = {1.0, 0.6};
    spec.psi = {PsiSpec::parse("const"), PsiSpec::parse("step:1,-1")};
    const double rho = 0.25;
    Pcg32 stream(227, 0);
    auto draw = graphon_graph(500, rho, spec, stream);
    // Within blocks G = 1.6, across G = 0.4.
    double within_expected = rho * 1.6;
    double between_expected = rho * 0.4;
    std::size_t within_pairs = 0, within_edges = 0, between_pairs = 0, between_edges = 0;
    for (int i = 0; i < 500; ++i) {
      for (int j = i + 1; j < 500; ++j) {
        bool same = (draw.u[static_cast<std::size_t>(i)] < 0.5) ==
                    (draw.u[static_cast<std::size_t>(j)] < 0.5);
        bool edge = draw.graph.has_edge(i, j);
        (same ? within_pairs : between_pairs) += 1;
        if (edge) (same ? within_edges : between_edges) += 1;
      }
    }
    auto band = [](double p, std::size_t m) { return 3.0 * std::sqrt(p * (1 - p) / m); };
    double within_hat = static_cast<double>(within_edges) / within_pairs;
    double between_hat = static_cast<double>(between_edges) / between_pairs;
    CHECK(std::abs(within_hat - within_expected) < band(within_expected, within_pairs));
    CHECK(std::abs(between_hat - between_expected) < band(between_expected, between_pairs));
  }
  SUBCASE("negative graphon values are clamped and counted") {
    GraphonSpec spec;
    spec.lambda = {1.0};
    spec.psi = {PsiSpec::parse("step:1,-1")};  // G < 0 across blocks
    Pcg32 stream(229, 0);
    auto draw = graphon_graph(60, 0.5, spec, stream);
    CHECK(draw.clamped_negative > 0);
  }
  SUBCASE("identical streams reproduce the draw") {
    GraphonSpec spec;
    spec.lambda = {1.0, 0.5};
    spec.psi = {PsiSpec::parse("const"), PsiSpec::parse("cos:1")};
    Pcg32 a(233, 4), b(233, 4);
    auto d1 = graphon_graph(80, 0.2, spec, a);
    auto d2 = graphon_graph(80, 0.2, spec, b);
    CHECK(d1.u == d2.u);
    CHECK(d1.graph.edges() == d2.graph.edges());
  }
}

TEST_CASE("hidden-network thinning") {
  auto g = partial_interference_graph(10, 45);
  SUBCASE("keep everything") {
    Pcg32 stream(239, 0);
    auto h = thin_to_hidden(g, 1.0, stream);
    CHECK(h.edge_count() == g.edge_count());
    CHECK(h.is_subgraph_of(g));
  }
  SUBCASE("keep nothing") {
    Pcg32 stream(241, 0);
    auto h = thin_to_hidden(g, 0.0, stream);
    CHECK(h.edge_count() == 0);
  }
  SUBCASE("quarter retention hits the scenario's mean hidden degree") {
    Pcg32 stream(251, 0);
    auto h = thin_to_hidden(g, 0.25, stream);
    CHECK(h.is_subgraph_of(g));
    double mean_degree = static_cast<double>(h.edge_count()) / g.n();
    // Binomial(4050, 0.25): 3 sigma of the mean degree is about 0.06.
    CHECK(std::abs(mean_degree - 2.25) < 0.12);
  }
}

TEST_CASE("scenario locations") {
  SUBCASE("partial strata carry 0/1/2") {
    ScenarioConfig cfg;
    cfg.kind = ScenarioKind::kPartial;
    cfg.partial = {10, 45, 3, {0.0, 1.0, 2.0}};
    auto mu = scenario_mu(cfg, 450);
    CHECK(mu[0] == 0.0);
    CHECK(mu[150 * 1] == 1.0);
    CHECK(mu[449] == 2.0);
  }
  SUBCASE("marketplace combines the two deltas") {
    ScenarioConfig cfg;
    cfg.kind = ScenarioKind::kMarketplace;
    cfg.marketplace.rows = 4;
    cfg.marketplace.cols = 4;
    auto mu = scenario_mu(cfg, 16);
    CHECK(mu[0] == doctest::Approx(1.0 - 1.0 - 1.0));
    CHECK(mu[15] == doctest::Approx(1.0 + 1.0 + 1.0));
  }
  SUBCASE("graphon mu evaluated at the latent draws") {
    ScenarioConfig cfg;
    cfg.kind = ScenarioKind::kGraphon;
    cfg.graphon.mu.values = {0.0, 2.0};
    std::vector<double> u = {0.1, 0.9, 0.4};
    auto mu = scenario_mu(cfg, 3, &u);
    CHECK(mu[0] == 0.0);
    CHECK(mu[1] == 2.0);
    CHECK(mu[2] == 0.0);
    CHECK_THROWS_AS(scenario_mu(cfg, 3), std::invalid_argument);
  }
  SUBCASE("non-divisible cluster strata are rejected") {
    ScenarioConfig cfg;
    cfg.kind = ScenarioKind::kPartial;
    cfg.partial = {10, 44, 3, {0.0, 1.0, 2.0}};
    CHECK_THROWS_WITH_AS(scenario_mu(cfg, 440), doctest::Contains("divisible"),
                         std::invalid_argument);
  }
}

TEST_CASE("parameter draws") {
  ScenarioConfig cfg;
  cfg.kind = ScenarioKind::kPartial;
  cfg.partial = {4, 3, 1, {1.0}};
  auto g = partial_interference_graph(4, 3);
  Pcg32 stream(257, 0);
  auto h = thin_to_hidden(g, 0.8, stream);
  SUBCASE("gamma is normalized by the hidden out-degree") {
    ScenarioConfig det = cfg;
    det.theta_sigma = 0.0;
    det.gamma_sigma = 0.0;
    auto mu = scenario_mu(det, 12);
    auto p = draw_parameters(det, mu, h, stream);
    for (int i = 0; i < 12; ++i) {
      double deg = h.out_degree(i);
      CHECK(p.theta[static_cast<std::size_t>(i)] == doctest::Approx(0.8).epsilon(1e-12));
      for (double gv : p.gamma_row(i))
        CHECK(gv == doctest::Approx(1.8 * 1.0 / deg).epsilon(1e-12));
    }
    // Assumption-style diagnostic: the degree scaling cancels exactly.
    auto diag = bound_diagnostics(p);
    if (h.edge_count() > 0) CHECK(diag.max_scaled_gamma == doctest::Approx(1.8).epsilon(1e-12));
  }
  SUBCASE("support matches the hidden network exactly") {
    auto mu = scenario_mu(cfg, 12);
    auto p = draw_parameters(cfg, mu, h, stream);
    CHECK(p.gamma.size() == h.edge_count());
    for (int i = 0; i < 12; ++i)
      for (int j = 0; j < 12; ++j)
        if (p.gamma_entry(i, j) != 0.0) CHECK(h.has_edge(i, j));
  }
}

TEST_CASE("scenario config round trips") {
  SUBCASE("partial") {
    ScenarioConfig cfg;
    cfg.kind = ScenarioKind::kPartial;
    cfg.partial = {20, 180, 3, {0.0, 1.0, 2.0}};
    cfg.keep_prob = 0.25;
    cfg.adjustment = AdjustmentKind::kMergedGroups;
    auto text = cfg.to_string();
    auto back = ScenarioConfig::from_string(text);
    CHECK(back.to_string() == text);
    CHECK(back.partial.groups == 180);
  }
  SUBCASE("marketplace") {
    ScenarioConfig cfg;
    cfg.kind = ScenarioKind::kMarketplace;
    cfg.marketplace.rows = 60;
    cfg.marketplace.cols = 60;
    cfg.keep_prob = 0.05;
    cfg.adjustment = AdjustmentKind::kTwoWay;
    auto back = ScenarioConfig::from_string(cfg.to_string());
    CHECK(back.to_string() == cfg.to_string());
    CHECK(back.marketplace.cols == 60);
    CHECK(back.adjustment == AdjustmentKind::kTwoWay);
  }
  SUBCASE("graphon with step and cosine eigenfunctions") {
    ScenarioConfig cfg;
    cfg.kind = ScenarioKind::kGraphon;
    cfg.graphon.n = 500;
    cfg.graphon.rho_star = 0.08;
    cfg.graphon.spec.lambda = {1.0, 0.6};
    cfg.graphon.spec.psi = {PsiSpec::parse("const"), PsiSpec::parse("step:1.3,-0.7")};
    cfg.graphon.mu.values = {0.0, 2.0};
    cfg.adjustment = AdjustmentKind::kSpectral;
    cfg.k = 5;
    auto back = ScenarioConfig::from_string(cfg.to_string());
    CHECK(back.to_string() == cfg.to_string());
    CHECK(back.graphon.spec.psi[1].step.values[1] == doctest::Approx(-0.7));
    CHECK(back.k == 5);
  }
  SUBCASE("external") {
    ScenarioConfig cfg;
    cfg.kind = ScenarioKind::kExternal;
    cfg.external_edge_list = "/tmp/some_network.csv";
    cfg.adjustment = AdjustmentKind::kSpectral;
    cfg.k = 3;
    auto back = ScenarioConfig::from_string(cfg.to_string());
    CHECK(back.external_edge_list == "/tmp/some_network.csv");
  }
  SUBCASE("invalid configs are rejected") {
    CHECK_THROWS_AS(ScenarioConfig::from_string("[scenario]\nkind = nonsense\n"),
                    std::invalid_argument);
    ScenarioConfig cfg;
    cfg.r1 = 1.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }
}
