#include <doctest.h>

#include <stdexcept>

#include <Eigen/SVD>
#include <cmath>
#include <fstream>
#include <sstream>

#include "netate/graph.hpp"
#include "test_util.hpp"

using namespace netate;

TEST_CASE("two-cycle degrees") {
  auto g = DirectedGraph::from_edge_list({{0, 1}, {1, 0}}, 2);
  CHECK(g.out_degree(0) == 1);
  CHECK(g.out_degree(1) == 1);
  CHECK(g.in_degree(0) == 1);
  CHECK(g.in_degree(1) == 1);
  CHECK(g.edge_count() == 2);
}

TEST_CASE("edgeless graph") {
  auto g = DirectedGraph::from_edge_list({}, 5);
  for (int i = 0; i < 5; ++i) {
    CHECK(g.out_degree(i) == 0);
    CHECK(g.in_degree(i) == 0);
  }
  CHECK(density(g) == 0.0);
}

TEST_CASE("invalid edges are rejected") {
  CHECK_THROWS_WITH_AS(DirectedGraph::from_edge_list({{0, 0}}, 1),
                       doctest::Contains("self-loop"), std::invalid_argument);
  CHECK_THROWS_AS(DirectedGraph::from_edge_list({{0, 3}}, 3), std::invalid_argument);
  CHECK_THROWS_AS(DirectedGraph::from_edge_list({{-1, 0}}, 3), std::invalid_argument);
}

TEST_CASE("duplicate edges collapse with a reported count") {
  EdgeListSummary summary;
  auto g = DirectedGraph::from_edge_list({{0, 1}, {0, 1}, {1, 2}, {0, 1}}, 3, &summary);
  CHECK(g.edge_count() == 2);
  CHECK(summary.duplicates_collapsed == 2);
}

TEST_CASE("density times n^2 counts deduplicated edges") {
  Pcg32 stream(3, 1);
  for (int trial = 0; trial < 5; ++trial) {
    auto g = test_util::random_graph(12, 0.3, stream);
    CHECK(density(g) * 12 * 12 == doctest::Approx(static_cast<double>(g.edge_count())));
  }
}

TEST_CASE("density of a 1005-node graph with 25571 edges") {
  std::vector<Edge> edges;
  int n = 1005;
  for (int i = 0; edges.size() < 25571; ++i) {
    int s = i % n;
    int t = (s + 1 + i / n) % n;
    if (s != t) edges.emplace_back(s, t);
  }
  auto g = DirectedGraph::from_edge_list(std::move(edges), n);
  REQUIRE(g.edge_count() == 25571);
  CHECK(density(g) == doctest::Approx(25571.0 / (1005.0 * 1005.0)).epsilon(1e-12));
  CHECK(density(g) == doctest::Approx(0.02532).epsilon(1e-3));
}

TEST_CASE("normalized latent rows") {
  SUBCASE("single edge") {
    auto h = HiddenNetwork::from_edge_list({{0, 1}}, 3);
    auto q = normalized_latent(h);
    CHECK(q.row_values(0).size() == 1);
    CHECK(q.row_values(0)[0] == 1.0);
    CHECK(q.row_values(1).empty());
  }
  SUBCASE("uniform split at out-degree two") {
    auto h = HiddenNetwork::from_edge_list({{0, 1}, {0, 2}}, 3);
    auto q = normalized_latent(h);
    CHECK(q.row_values(0)[0] == 0.5);
    CHECK(q.row_values(0)[1] == 0.5);
  }
  SUBCASE("every row sums to one or zero") {
    Pcg32 stream(17, 0);
    auto g = test_util::random_graph(15, 0.25, stream);
    std::vector<Edge> hidden;
    for (auto e : g.edges())
      if (stream.next_bernoulli(0.5)) hidden.push_back(e);
    auto q = normalized_latent(HiddenNetwork::from_edge_list(hidden, 15));
    for (int i = 0; i < 15; ++i) {
      double sum = 0.0;
      for (double v : q.row_values(i)) sum += v;
      CHECK((sum == 0.0 || std::abs(sum - 1.0) < 1e-12));
    }
  }
}

TEST_CASE("hidden network is validated as a subgraph") {
  auto g = DirectedGraph::from_edge_list({{0, 1}, {1, 2}}, 3);
  auto h = HiddenNetwork::from_edge_list({{0, 1}}, 3);
  CHECK(h.is_subgraph_of(g));
  auto not_sub = HiddenNetwork::from_edge_list({{2, 0}}, 3);
  CHECK_FALSE(not_sub.is_subgraph_of(g));
}

TEST_CASE("operator norm estimates") {
  SUBCASE("edgeless graph") {
    auto g = DirectedGraph::from_edge_list({}, 4);
    auto est = operator_norm_estimate(g);
    CHECK(est.value == 0.0);
    CHECK(est.converged);
  }
  SUBCASE("two-cycle is a permutation matrix") {
    auto g = DirectedGraph::from_edge_list({{0, 1}, {1, 0}}, 2);
    CHECK(operator_norm_estimate(g).value == doctest::Approx(1.0).epsilon(1e-8));
  }
  SUBCASE("block complete graph against dense singular values") {
    std::vector<Edge> edges;
    for (int b = 0; b < 2; ++b)
      for (int a = 0; a < 3; ++a)
        for (int c = 0; c < 3; ++c)
          if (a != c) edges.emplace_back(3 * b + a, 3 * b + c);
    auto g = DirectedGraph::from_edge_list(std::move(edges), 6);
    CHECK(operator_norm_estimate(g).value == doctest::Approx(2.0).epsilon(1e-8));
  }
  SUBCASE("random graph against dense SVD and the degree bound") {
    Pcg32 stream(23, 0);
    auto g = test_util::random_graph(15, 0.3, stream);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(test_util::dense_adjacency(g));
    double reference = svd.singularValues()[0];
    auto est = operator_norm_estimate(g, 1e-12, 5000);
    CHECK(est.value == doctest::Approx(reference).epsilon(1e-8));
    int max_out = 0, max_in = 0;
    for (int i = 0; i < g.n(); ++i) {
      max_out = std::max(max_out, g.out_degree(i));
      max_in = std::max(max_in, g.in_degree(i));
    }
    CHECK(est.value <= std::sqrt(static_cast<double>(max_out) * max_in) + 1e-8);
  }
}

TEST_CASE("sparse products match the dense adjacency") {
  Pcg32 stream(29, 0);
  auto g = test_util::random_graph(14, 0.3, stream);
  Eigen::MatrixXd e = test_util::dense_adjacency(g);
  Eigen::VectorXd v(14);
  for (int i = 0; i < 14; ++i) v[i] = stream.next_normal();
  std::vector<double> out(14), out_t(14);
  g.multiply({v.data(), 14}, out);
  g.multiply_transpose({v.data(), 14}, out_t);
  Eigen::VectorXd ev = e * v;
  Eigen::VectorXd etv = e.transpose() * v;
  for (int i = 0; i < 14; ++i) {
    CHECK(out[static_cast<std::size_t>(i)] == doctest::Approx(ev[i]).epsilon(1e-12));
    CHECK(out_t[static_cast<std::size_t>(i)] == doctest::Approx(etv[i]).epsilon(1e-12));
  }
}

TEST_CASE("edge list parsing") {
  SUBCASE("comments and header detection") {
    std::istringstream in("# comment\nsource,target\n0,1\n2 , 0\n");
    int max_idx = -1;
    auto edges = parse_edge_list(in, &max_idx);
    REQUIRE(edges.size() == 2);
    CHECK(edges[0] == Edge{0, 1});
    CHECK(edges[1] == Edge{2, 0});
    CHECK(max_idx == 2);
  }
  SUBCASE("malformed line reports its number") {
    std::istringstream in("0,1\nbroken\n");
    CHECK_THROWS_WITH_AS(parse_edge_list(in, nullptr), doctest::Contains("line 2"),
                         std::invalid_argument);
  }
  SUBCASE("file round trip") {
    std::string path = "/tmp/netate_test_edges.csv";
    {
      std::ofstream out(path);
      out << "source,target\n0,1\n1,2\n2,0\n";
    }
    auto g = load_edge_list(path);
    CHECK(g.n() == 3);
    CHECK(g.edge_count() == 3);
  }
}
