#include <cmath>
#include <queue>

#include <doctest.h>

#include "mirror/spaces.hpp"
#include "test_util.hpp"

using namespace mirror;

namespace {

// Hop counts by breadth-first search on the level-n edge graph.
std::vector<std::vector<int>> bfs_all(const GasketLevelGraph& g) {
  const int n = static_cast<int>(g.vertices.size());
  std::vector<std::vector<int>> adj(n);
  for (auto [a, b] : g.edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<std::vector<int>> out(n, std::vector<int>(n, -1));
  for (int s = 0; s < n; ++s) {
    std::queue<int> q;
    q.push(s);
    out[s][s] = 0;
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v : adj[u])
        if (out[s][v] < 0) {
          out[s][v] = out[s][u] + 1;
          q.push(v);
        }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("metric axioms on random triples") {
  std::vector<Space> spaces = testutil::continuous_spaces();
  spaces.push_back(graph_space(eight_topology()));
  spaces.push_back(graph_space(star_tree_topology()));
  spaces.push_back(Gasket{});
  for (const Space& s : spaces) {
    CAPTURE(space_name(s));
    CounterRng rng(11);
    for (int k = 0; k < 10000; ++k) {
      const Point x = testutil::random_point(s, rng);
      const Point y = testutil::random_point(s, rng);
      const Point z = testutil::random_point(s, rng);
      const double dxy = distance(s, x, y);
      REQUIRE(distance(s, x, x) <= 1e-12);
      REQUIRE(dxy >= 0.0);
      REQUIRE(std::abs(dxy - distance(s, y, x)) <= 1e-12);
      REQUIRE(distance(s, x, z) <= dxy + distance(s, y, z) + 1e-12);
    }
  }
}

TEST_CASE("distance examples") {
  CHECK(distance(FlatTorus{}, torus_point(0, 0), torus_point(2.0 / 3.0, 0)) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(distance(Circle{}, circle_point(0.9), circle_point(0.1)) == doctest::Approx(0.2));
  CHECK(distance(Sphere2{}, sphere_point({1, 0, 0}), sphere_point({0, 1, 0})) ==
        doctest::Approx(M_PI / 2));
  CHECK(distance(Sphere2{}, sphere_point({1, 0, 0}), sphere_point({-1, 0, 0})) ==
        doctest::Approx(M_PI));
  CHECK(distance(Hyperbolic2{}, hyperbolic_point(0, 0), hyperbolic_point(std::sinh(1.5), 0)) ==
        doctest::Approx(1.5).epsilon(1e-14));
  CHECK(distance(Euclidean{2}, euclidean_point({0, 0}), euclidean_point({3, 4})) == 5.0);
  CHECK_THROWS_AS(distance(Euclidean{2}, euclidean_point({0, 0}), circle_point(0)), DomainError);
  CHECK_THROWS_AS(distance(Euclidean{2}, euclidean_point({0, 0}), euclidean_point({0, 0, 0})),
                  DomainError);
}

TEST_CASE("validate rejects points off the space") {
  SpherePoint bad;
  bad.z = Eigen::Vector3d(2, 0, 0);
  CHECK_THROWS_AS(validate(Sphere2{}, bad), DomainError);
  HyperbolicPoint low;
  low.z = Eigen::Vector3d(0.5, 0, 0);
  CHECK_THROWS_AS(validate(Hyperbolic2{}, low), DomainError);
  CHECK_THROWS_AS(validate(Circle{}, CirclePoint{1.5}), DomainError);
  CHECK_NOTHROW(validate(Circle{}, circle_point(1.5)));
  CHECK_THROWS_AS(validate(Gasket{}, gasket_point(3, 3, 3)), DomainError);
  CHECK_NOTHROW(validate(Gasket{}, gasket_point(1, 1, 2)));
}

TEST_CASE("exp and log examples") {
  const Sphere2 s;
  const Point x = sphere_point({1, 0, 0});
  const Point y = exp_map(s, x, {x, Eigen::Vector3d(0, M_PI / 2, 0)});
  CHECK((std::get<SpherePoint>(y).z - Eigen::Vector3d(0, 1, 0)).norm() < 1e-15);
  const TangentVector l = log_map(s, x, sphere_point({0, 1, 0}));
  CHECK((l.v - Eigen::Vector3d(0, M_PI / 2, 0)).norm() < 1e-15);
  CHECK(log_map(s, x, x).v.norm() == 0.0);
  CHECK_THROWS_AS(log_map(s, x, sphere_point({-1, 0, 0})), NonUniqueGeodesicError);

  const Euclidean e{2};
  const Point a = euclidean_point({1, 2});
  const Point b = exp_map(e, a, {a, Eigen::Vector2d(0.5, -1)});
  CHECK((std::get<EuclideanPoint>(b).x - Eigen::Vector2d(1.5, 1)).norm() == 0.0);
  CHECK(distance(e, exp_map(e, a, {a, Eigen::Vector2d::Zero()}), a) == 0.0);
  CHECK(distance(s, exp_map(s, x, {x, Eigen::Vector3d::Zero()}), x) == 0.0);
  CHECK_THROWS_AS(exp_map(Circle{}, circle_point(0), {circle_point(0), Eigen::VectorXd::Zero(1)}),
                  UnsupportedError);
}

TEST_CASE("exp inverts log") {
  for (const Space& s : testutil::manifolds()) {
    CAPTURE(space_name(s));
    CounterRng rng(3);
    for (int k = 0; k < 10000; ++k) {
      const Point x = testutil::random_point(s, rng);
      const Point y = testutil::random_point(s, rng);
      if (std::holds_alternative<Sphere2>(s) && distance(s, x, y) > M_PI - 1e-3) continue;
      const TangentVector v = log_map(s, x, y);
      REQUIRE(std::abs(tangent_norm(s, v) - distance(s, x, y)) < 1e-10);
      REQUIRE(distance(s, exp_map(s, x, v), y) < 1e-10);
    }
  }
}

TEST_CASE("parallel transport is an isometry") {
  for (const Space& s : testutil::manifolds()) {
    CAPTURE(space_name(s));
    CounterRng rng(5);
    for (int k = 0; k < 10000; ++k) {
      const Point x = testutil::random_point(s, rng);
      const Point y = testutil::random_point(s, rng);
      if (std::holds_alternative<Sphere2>(s) && distance(s, x, y) > M_PI - 1e-3) continue;
      const TangentVector u = testutil::random_tangent(s, x, rng);
      const TangentVector v = testutil::random_tangent(s, x, rng);
      const TangentVector pu = parallel_transport(s, x, y, u);
      const TangentVector pv = parallel_transport(s, x, y, v);
      REQUIRE(std::abs(tangent_dot(s, pu, pv) - tangent_dot(s, u, v)) < 1e-10);
    }
  }
}

TEST_CASE("sphere transport along the equator fixes the pole direction") {
  const Sphere2 s;
  const Point x = sphere_point({1, 0, 0});
  const Point y = sphere_point({0, 1, 0});
  const TangentVector v = parallel_transport(s, x, y, {x, Eigen::Vector3d(0, 0, 1)});
  CHECK((v.v - Eigen::Vector3d(0, 0, 1)).norm() < 1e-15);
  const TangentVector w = parallel_transport(s, x, y, {x, Eigen::Vector3d(0, 1, 0)});
  CHECK((w.v - Eigen::Vector3d(-1, 0, 0)).norm() < 1e-15);
  CHECK((parallel_transport(s, x, x, v).v - v.v).norm() == 0.0);
  CHECK_THROWS_AS(parallel_transport(s, x, sphere_point({-1, 0, 0}), v), NonUniqueGeodesicError);
}

TEST_CASE("reference frames are orthonormal") {
  for (const Space& s : testutil::manifolds()) {
    CounterRng rng(8);
    for (int k = 0; k < 200; ++k) {
      const Point x = testutil::random_point(s, rng);
      const Eigen::MatrixXd f = reference_frame(s, x);
      REQUIRE(f.cols() == manifold_dim(s));
      for (int a = 0; a < f.cols(); ++a)
        for (int b = 0; b < f.cols(); ++b) {
          const double d = tangent_dot(s, {x, f.col(a)}, {x, f.col(b)});
          REQUIRE(std::abs(d - (a == b ? 1.0 : 0.0)) < 1e-12);
        }
    }
  }
}

TEST_CASE("gasket vertex sets") {
  CHECK(gasket_vertices(0).vertices.size() == 3);
  CHECK(gasket_vertices(0).edges.size() == 3);
  CHECK(gasket_vertices(1).vertices.size() == 6);
  CHECK(gasket_vertices(1).edges.size() == 9);
  CHECK(gasket_vertices(2).vertices.size() == 15);
  for (int n = 0; n <= 7; ++n) {
    const GasketLevelGraph g = gasket_vertices(n);
    const std::size_t p = static_cast<std::size_t>(std::pow(3, n));
    CHECK(g.vertices.size() == 3 * (p + 1) / 2);
    CHECK(g.edges.size() == 3 * p);
    for (auto [a, b] : g.edges)
      REQUIRE(gasket_distance(g.vertices[a], g.vertices[b]) == make_dyadic(1, n));
  }
  CHECK_THROWS_AS(gasket_vertices(kMaxGasketLevel + 1), LimitError);
  CHECK_THROWS_AS(gasket_vertices(-1), LimitError);
}

TEST_CASE("gasket distance examples") {
  const GasketPoint p1 = gasket_corner(1), p2 = gasket_corner(2), p3 = gasket_corner(3);
  CHECK(gasket_distance(p1, p2) == make_dyadic(1, 0));
  CHECK(gasket_distance(gasket_contract(2, p1), gasket_contract(2, p2)) == make_dyadic(1, 1));
  CHECK(gasket_distance(p3, gasket_contract(2, p1)) == make_dyadic(1, 0));
  CHECK(gasket_distance(p1, p1) == make_dyadic(0, 0));
  CHECK_THROWS_AS(gasket_distance(p1, gasket_point(3, 3, 3)), UnsupportedError);
  CHECK(is_gasket_vertex(gasket_point(1, 1, 2)));
  CHECK_FALSE(is_gasket_vertex(gasket_point(3, 3, 3)));
  CHECK(gasket_point(2, 2, 2) == gasket_point(1, 1, 1));
}

TEST_CASE("gasket distance equals breadth-first search") {
  for (int n = 0; n <= 4; ++n) {
    CAPTURE(n);
    const GasketLevelGraph g = gasket_vertices(n);
    const auto hops = bfs_all(g);
    for (std::size_t a = 0; a < g.vertices.size(); ++a)
      for (std::size_t b = 0; b < g.vertices.size(); ++b)
        REQUIRE(gasket_distance(g.vertices[a], g.vertices[b]) == make_dyadic(hops[a][b], n));
  }
}

TEST_CASE("gasket distance scales under the contractions") {
  for (int n = 0; n <= 5; ++n) {
    const GasketLevelGraph g = gasket_vertices(n);
    for (int c = 1; c <= 3; ++c)
      for (const auto& x : g.vertices)
        for (const auto& y : g.vertices) {
          const Dyadic d = gasket_distance(x, y);
          REQUIRE(gasket_distance(gasket_contract(c, x), gasket_contract(c, y)) ==
                  make_dyadic(d.num, d.exp + 1));
        }
  }
}

TEST_CASE("metric graphs") {
  const GraphSpace eight = graph_space(eight_topology());
  const MetricGraph& g = *eight.graph;
  CHECK(distance(eight, g.at_vertex("o1"), g.at_vertex("o2")) == doctest::Approx(1.0));
  CHECK(distance(eight, eight_point(1, 0.3), eight_point(2, 0.3)) == doctest::Approx(0.4));
  CHECK(distance(eight, eight_point(1, 0.5), g.at_vertex("g")) == 0.0);
  const auto [c, u] = eight_position(eight_point(2, 0.8));
  CHECK(c == 2);
  CHECK(u == doctest::Approx(0.8));

  const GraphSpace tree = graph_space(star_tree_topology());
  const MetricGraph& t = *tree.graph;
  CHECK(t.num_edges() == 9);
  CHECK(distance(tree, t.at_vertex("p11"), t.at_vertex("p22")) == doctest::Approx(4.0));
  CHECK(distance(tree, t.at_vertex("p11"), t.at_vertex("p12")) == doctest::Approx(2.0));
  CHECK(distance(tree, t.at_vertex("p0"), t.at_vertex("p0")) == 0.0);
  CHECK_THROWS_AS(t.topology().vertex("nope"), DomainError);
}
