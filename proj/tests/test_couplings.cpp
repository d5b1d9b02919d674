#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include "mirror/couplings.hpp"
#include "test_util.hpp"

using namespace mirror;

namespace {

int edge_between(const MetricGraph& g, const std::string& a, const std::string& b) {
  const int va = g.topology().vertex(a), vb = g.topology().vertex(b);
  for (int e = 0; e < g.num_edges(); ++e) {
    const auto& ed = g.topology().edges[e];
    if ((ed.from == va && ed.to == vb) || (ed.from == vb && ed.to == va)) return e;
  }
  throw std::logic_error("no such edge");
}

// Offset of a point measured from vertex `from` along the edge.
double offset_from(const MetricGraph& g, const GraphPoint& p, const std::string& from) {
  return g.topology().edges[p.edge].from == g.topology().vertex(from) ? p.offset : 1.0 - p.offset;
}

Trajectory chain_path(std::vector<Point> pts) {
  Trajectory t;
  t.kind = Trajectory::Kind::Chain;
  for (std::size_t k = 0; k < pts.size(); ++k) t.times.push_back(static_cast<double>(k));
  t.positions = std::move(pts);
  return t;
}

// Glue-hit survival of one walker on a cycle of m states started at 0:
// absorbing-chain recursion on the circle alone.
std::vector<double> cycle_hit_survival(int m, int t_max) {
  std::vector<double> mass(m, 0.0), out;
  mass[0] = 1.0;
  for (int t = 0; t <= t_max; ++t) {
    double alive = 0.0;
    for (int k = 0; k < m; ++k)
      if (k != m / 2) alive += mass[k];
    out.push_back(alive);
    std::vector<double> next(m, 0.0);
    for (int k = 0; k < m; ++k) {
      if (k == m / 2) continue;
      next[(k + 1) % m] += 0.5 * mass[k];
      next[(k + m - 1) % m] += 0.5 * mass[k];
    }
    mass = next;
  }
  return out;
}

}  // namespace

TEST_CASE("mirror map examples") {
  const Euclidean e{2};
  const Point x = euclidean_point({-1, 0});
  const Point y = euclidean_point({1, 0});
  CHECK((mirror_map(e, x, y, {x, Eigen::Vector2d(1, 0)}).v - Eigen::Vector2d(-1, 0)).norm() == 0.0);
  CHECK((mirror_map(e, x, y, {x, Eigen::Vector2d(0, 1)}).v - Eigen::Vector2d(0, 1)).norm() == 0.0);

  const Sphere2 s;
  const Point a = sphere_point({1, 0, 0});
  const Point b = sphere_point({0, 1, 0});
  CHECK((mirror_map(s, a, b, {a, Eigen::Vector3d(0, 0, 1)}).v - Eigen::Vector3d(0, 0, 1)).norm() <
        1e-15);
  CHECK_THROWS_AS(mirror_map(s, a, sphere_point({-1, 0, 0}), {a, Eigen::Vector3d(0, 0, 1)}),
                  NonUniqueGeodesicError);
  CHECK_THROWS_AS(mirror_map(s, a, a, {a, Eigen::Vector3d(0, 0, 1)}), DomainError);
  CHECK_THROWS_AS(mirror_map(Circle{}, circle_point(0), circle_point(0.2),
                             {circle_point(0), Eigen::VectorXd::Ones(1)}),
                  UnsupportedError);
}

TEST_CASE("mirror map is an isometry sending the initial velocity to minus the final one") {
  for (const Space& s : testutil::manifolds()) {
    CAPTURE(space_name(s));
    CounterRng rng(13);
    for (int k = 0; k < 2000; ++k) {
      const Point x = testutil::random_point(s, rng);
      const Point y = testutil::random_point(s, rng);
      if (std::holds_alternative<Sphere2>(s) && distance(s, x, y) > M_PI - 1e-3) continue;
      TangentVector u = log_map(s, x, y);
      u.v /= tangent_norm(s, u);
      TangentVector w = log_map(s, y, x);
      w.v /= -tangent_norm(s, w);  // velocity of x -> y on arrival at y
      REQUIRE((mirror_map(s, x, y, u).v + w.v).norm() < 1e-10);
      const TangentVector p = testutil::random_tangent(s, x, rng);
      const TangentVector q = testutil::random_tangent(s, x, rng);
      REQUIRE(std::abs(tangent_dot(s, mirror_map(s, x, y, p), mirror_map(s, x, y, q)) -
                       tangent_dot(s, p, q)) < 1e-10);
    }
  }
}

TEST_CASE("mirror frames") {
  for (const Space& s : testutil::manifolds()) {
    CounterRng rng(1);
    for (int k = 0; k < 200; ++k) {
      const Point x = testutil::random_point(s, rng);
      const Point y = testutil::random_point(s, rng);
      if (std::holds_alternative<Sphere2>(s) && distance(s, x, y) > M_PI - 1e-3) continue;
      const MirrorMapFrame f = mirror_frame(s, x, y);
      for (int a = 0; a < f.phi2.cols(); ++a) {
        REQUIRE((f.phi2.col(a) - mirror_map(s, x, y, {x, f.phi1.col(a)}).v).norm() < 1e-12);
        for (int b = 0; b < f.phi2.cols(); ++b)
          REQUIRE(std::abs(tangent_dot(s, {y, f.phi2.col(a)}, {y, f.phi2.col(b)}) - (a == b)) <
                  1e-10);
      }
    }
  }
}

TEST_CASE("mirror run on hand-made paths") {
  const auto rs = build_structure(Euclidean{1}, euclidean_point({-0.5}), euclidean_point({0.5}));
  Trajectory far;
  far.kind = Trajectory::Kind::Brownian;
  far.seed = 1;
  far.positions.push_back(euclidean_point({-0.5}));
  far.times.push_back(0.0);
  for (int k = 1; k <= 100; ++k) {
    far.times.push_back(0.01 * k);
    far.positions.push_back(euclidean_point({-5.0}));
  }
  SUBCASE("never leaves X1") {
    const CoupledTrajectory c = mirror_run(rs, far);
    CHECK(c.T == kNever);
    for (std::size_t k = 0; k < c.z1.size(); ++k) {
      REQUIRE(c.mirror_flag[k]);
      REQUIRE(distance(Euclidean{1}, c.z2[k], reflect(rs, c.z1[k])) == 0.0);
    }
    CHECK(c.max_mirror_deviation == 0.0);
  }
  SUBCASE("crossing H couples at the closing grid time") {
    far.positions[40] = euclidean_point({0.3});
    const CoupledTrajectory c = mirror_run(rs, far);
    CHECK(c.T <= far.times[40]);
    for (std::size_t k = 0; k < c.z1.size(); ++k) {
      if (c.times[k] >= c.T) {
        REQUIRE(distance(Euclidean{1}, c.z1[k], c.z2[k]) == 0.0);
        REQUIRE_FALSE(c.mirror_flag[k]);
      } else {
        REQUIRE(c.mirror_flag[k]);
      }
    }
  }
  CHECK_THROWS_AS(mirror_run(rs, chain_path({euclidean_point({0.2})})), DomainError);
}

TEST_CASE("mirror run on the lazy 4-cycle") {
  const FiniteChain c = build_chain(CycleSpec{4, 0.5});
  const auto rs = build_structure(c.space, c.states[c.x1], c.states[c.x2]);
  const MirrorKernel k = chain_mirror_kernel(c, 6);
  for (int t = 0; t <= 6; ++t) CHECK(k.survival(t) == std::ldexp(1.0, -t));

  const int n = 100000;
  int alive1 = 0, alive2 = 0;
  for (int i = 0; i < n; ++i) {
    const CoupledTrajectory p = mirror_run(rs, sample_chain(c, c.x1, 3, 99, i));
    alive1 += p.T > 1;
    alive2 += p.T > 2;
    for (std::size_t s = 0; s < p.z1.size(); ++s)
      if (p.times[s] >= p.T) REQUIRE(distance(c.space, p.z1[s], p.z2[s]) == 0.0);
  }
  const double se1 = std::sqrt(0.25 / n), se2 = std::sqrt(0.25 * 0.75 / n);
  CHECK(std::abs(alive1 / double(n) - 0.5) <= 3 * se1);
  CHECK(std::abs(alive2 / double(n) - 0.25) <= 3 * se2);
}

TEST_CASE("mirror kernel survival") {
  for (int m : {4, 6, 10}) {
    const FiniteChain c = build_chain(EightSpec{m});
    const MirrorKernel k = chain_mirror_kernel(c, 40);
    const std::vector<double> oracle = cycle_hit_survival(m, 40);
    for (int t = 0; t <= 40; ++t) REQUIRE(k.survival(t) == oracle[t]);
  }
  CHECK(chain_mirror_kernel(build_chain(GasketSpec{2, true}), 0).survival(0) == 1.0);
  CHECK_THROWS_AS(chain_mirror_kernel(build_chain(TreeSpec{2}), -1), DomainError);
}

TEST_CASE("eight counterexample on a hand-made path") {
  const MetricGraph g(eight_topology());
  const Trajectory z1 = chain_path({eight_point(1, 0.0), eight_point(1, 0.3), eight_point(1, 0.5),
                                    eight_point(2, 0.2)});
  const CoupledTrajectory c = counterexample_eight_run(z1);
  CHECK(c.T == 2.0);
  CHECK(g.same(std::get<GraphPoint>(c.z2[0]), eight_point(2, 0.0), 1e-15));
  CHECK(g.same(std::get<GraphPoint>(c.z2[1]), eight_point(2, 0.7), 1e-15));
  CHECK(g.same(std::get<GraphPoint>(c.z2[2]), g.at_vertex("g"), 1e-15));
  CHECK(g.same(std::get<GraphPoint>(c.z2[3]), eight_point(2, 0.2), 1e-15));
  CHECK(c.mirror_flag[0]);
  CHECK_FALSE(c.mirror_flag[1]);
  CHECK_THROWS_AS(counterexample_eight_run(chain_path({eight_point(1, 0.3)})), DomainError);
}

TEST_CASE("tree counterexample on a hand-made path") {
  const MetricGraph g(star_tree_topology());
  const int e11 = edge_between(g, "p1", "p11"), e12 = edge_between(g, "p1", "p12");
  const int e22 = edge_between(g, "p2", "p22");
  auto on = [&](int e, const std::string& from, double u) {
    const bool fwd = g.topology().edges[e].from == g.topology().vertex(from);
    return GraphPoint{e, fwd ? u : 1.0 - u};
  };
  const Trajectory z1 = chain_path({g.at_vertex("p11"), on(e11, "p1", 0.4), g.at_vertex("p1"),
                                    on(e12, "p1", 0.6), g.at_vertex("p1"), g.at_vertex("p0"),
                                    g.at_vertex("p3")});
  const CoupledTrajectory c = counterexample_tree_run(z1);
  const auto z2 = [&](int k) { return std::get<GraphPoint>(c.z2[k]); };
  CHECK(g.same(z2(0), g.at_vertex("p22")));
  CHECK(z2(1).edge == e22);
  CHECK(offset_from(g, z2(1), "p2") == doctest::Approx(0.4));
  CHECK(g.same(z2(2), g.at_vertex("p2")));
  CHECK(z2(3).edge == e22);
  CHECK(offset_from(g, z2(3), "p2") == doctest::Approx(0.6));
  CHECK(c.T == 5.0);
  CHECK(g.same(z2(6), g.at_vertex("p3")));
  CHECK(c.mirror_flag[1]);
  CHECK_FALSE(c.mirror_flag[3]);
}

TEST_CASE("counterexample coupling times agree with the mirror coupling path by path") {
  for (const FiniteChain& c : {build_chain(EightSpec{4}), build_chain(TreeSpec{2})}) {
    const auto rs = build_structure(c.space, c.states[c.x1], c.states[c.x2]);
    const bool eight = c.label.starts_with("Eight");
    for (int i = 0; i < 2000; ++i) {
      const Trajectory z1 = sample_chain(c, c.x1, 60, 5, i);
      const CoupledTrajectory m = mirror_run(rs, z1);
      const CoupledTrajectory x = eight ? counterexample_eight_run(z1) : counterexample_tree_run(z1);
      REQUIRE(m.T == x.T);
      const StagedCoupling st = eight ? eight_stages(c) : tree_stages(c);
      const CoupledTrajectory s = staged_run(c, st, z1);
      REQUIRE(s.T == x.T);
      for (std::size_t k = 0; k < z1.positions.size(); ++k)
        REQUIRE(distance(c.space, s.z2[k], x.z2[k]) == 0.0);
    }
  }
}

TEST_CASE("exact staged couplings") {
  const FiniteChain eight = build_chain(EightSpec{4});
  const FiniteChain tree = build_chain(TreeSpec{2});
  const FiniteChain gasket = build_chain(GasketSpec{2, true});
  const FiniteChain cyc = build_chain(CycleSpec{8, 0.5});
  for (const FiniteChain* c : {&eight, &tree, &gasket, &cyc}) {
    CAPTURE(c->label);
    const StagedCoupling m = mirror_stages(*c);
    const JointLaw law = staged_joint_law(*c, m, 20);
    CHECK(markovian_contract_residual(*c, m, 20) <= 1e-15);
    CHECK(marginal_residual(*c, law, c->x1, c->x2) <= 1e-14);
    const MirrorKernel k = chain_mirror_kernel(*c, 20);
    CHECK((law.survival - k.survival).cwiseAbs().maxCoeff() <= 1e-14);
  }
  for (const auto& [c, st] : {std::pair{&eight, eight_stages(eight)}, {&tree, tree_stages(tree)}}) {
    CAPTURE(c->label);
    CHECK(markovian_contract_residual(*c, st, 20) <= 1e-15);
    const JointLaw x = staged_joint_law(*c, st, 20);
    const JointLaw m = staged_joint_law(*c, mirror_stages(*c), 20);
    CHECK(marginal_residual(*c, x, c->x1, c->x2) <= 1e-14);
    CHECK((x.survival - m.survival).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(max_joint_gap(x, m) > 0.01);
  }
  CHECK_THROWS_AS(eight_stages(tree), UnsupportedError);
}

TEST_CASE("independent coupling") {
  const FiniteChain c = build_chain(CycleSpec{4, 0.5});
  const JointLaw law = independent_joint_law(c, c.x1, c.x2, 10);
  CHECK(law.survival(1) == doctest::Approx(7.0 / 8.0).epsilon(1e-15));
  CHECK(law.survival(1) > 0.5);
  CHECK(marginal_residual(c, law, c.x1, c.x2) <= 1e-15);
  const MirrorKernel k = chain_mirror_kernel(c, 10);
  for (int t = 1; t <= 10; ++t) CHECK(law.survival(t) > k.survival(t));

  const Trajectory a = sample_chain(c, c.x1, 10, 1, 0);
  CHECK_THROWS_AS(independent_run(c.space, a, a), DomainError);

  const int n = 100000;
  int alive = 0;
  for (int i = 0; i < n; ++i) {
    const CoupledTrajectory p =
        independent_run(c.space, sample_chain(c, c.x1, 2, 3, i), sample_chain(c, c.x2, 2, 4, i));
    alive += p.T > 1;
    if (p.T <= 2) REQUIRE(distance(c.space, p.z1[2], p.z2[2]) == 0.0);
  }
  CHECK(std::abs(alive / double(n) - 7.0 / 8.0) <= 3 * std::sqrt(7.0 / 64.0 / n));

  const Trajectory b1 = sample_brownian(Euclidean{1}, euclidean_point({0}), 0.1, 10, 1, 0);
  const Trajectory b2 = sample_brownian(Euclidean{1}, euclidean_point({0.01}), 0.1, 10, 1, 1);
  CHECK(independent_run(Euclidean{1}, b1, b2).T == kNever);
}

TEST_CASE("geodesic ball step densities integrate to one") {
  using boost::math::quadrature::gauss_kronrod;
  const double rho = 0.3;
  CHECK(geodesic_ball_step_density(Euclidean{2}, rho, 0.1) == doctest::Approx(1 / (M_PI * rho * rho)));
  CHECK(geodesic_ball_step_density(Euclidean{2}, rho, 0.31) == 0.0);
  const double sphere = gauss_kronrod<double, 31>::integrate(
      [&](double r) { return geodesic_ball_step_density(Sphere2{}, rho, r) * 2 * M_PI * std::sin(r); },
      0.0, rho);
  CHECK(sphere == doctest::Approx(1.0).epsilon(1e-12));
  const double hyp = gauss_kronrod<double, 31>::integrate(
      [&](double r) { return geodesic_ball_step_density(Hyperbolic2{}, rho, r) * 2 * M_PI * std::sinh(r); },
      0.0, rho);
  CHECK(hyp == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Kendall-Cranston coupled walks") {
  SUBCASE("euclidean: second walker is the exact mirror image") {
    CounterRng rng(3);
    const CoupledTrajectory c =
        kc_run(Euclidean{2}, euclidean_point({-0.5, 0.2}), euclidean_point({0.5, 0.2}), 0.01, 5000, rng);
    CHECK(c.max_mirror_deviation <= 1e-12);
    for (std::size_t k = 0; k < c.z1.size(); ++k)
      if (c.times[k] >= c.T) REQUIRE(distance(Euclidean{2}, c.z1[k], c.z2[k]) == 0.0);
  }
  SUBCASE("sphere: mirror image up to rounding") {
    CounterRng rng(4);
    const CoupledTrajectory c = kc_run(Sphere2{}, sphere_point({1, -1, 0}), sphere_point({1, 1, 0}),
                                       0.01, 10000, rng);
    CHECK(c.max_mirror_deviation <= 1e-9);
  }
  SUBCASE("hyperbolic") {
    CounterRng rng(5);
    const CoupledTrajectory c = kc_run(Hyperbolic2{}, hyperbolic_point(-0.3, 0.1),
                                       hyperbolic_point(0.3, 0.1), 0.01, 5000, rng);
    CHECK(c.max_mirror_deviation <= 1e-9);
  }
  SUBCASE("zero noise never moves") {
    CounterRng rng(6);
    KcOptions opt;
    opt.noise = [](std::int64_t, CounterRng&) { return Eigen::VectorXd::Zero(2); };
    const Point x1 = sphere_point({1, -1, 0}), x2 = sphere_point({1, 1, 0});
    const CoupledTrajectory c = kc_run(Sphere2{}, x1, x2, 0.05, 100, rng, opt);
    CHECK(c.T == kNever);
    CHECK(distance(Sphere2{}, c.z1.back(), x1) == 0.0);
    CHECK(distance(Sphere2{}, c.z2.back(), x2) == 0.0);
  }
  SUBCASE("Poisson clock") {
    CounterRng rng(7);
    KcOptions opt;
    opt.poisson_lambda = 2.0;
    const CoupledTrajectory c =
        kc_run(Euclidean{1}, euclidean_point({-1}), euclidean_point({1}), 0.1, 200, rng, opt);
    for (std::size_t k = 1; k < c.times.size(); ++k) REQUIRE(c.times[k] > c.times[k - 1]);
    CHECK(c.times.back() == doctest::Approx(100.0).epsilon(0.3));
  }
  SUBCASE("threshold merge") {
    CounterRng rng(8);
    KcOptions opt;
    opt.merge = MergeRule::Threshold;
    const CoupledTrajectory c =
        kc_run(Euclidean{1}, euclidean_point({-0.1}), euclidean_point({0.1}), 0.05, 20000, rng, opt);
    CHECK(c.T < kNever);
  }
  SUBCASE("errors") {
    CounterRng rng(9);
    try {
      kc_run(Sphere2{}, sphere_point({1, 0, 0}), sphere_point({-1, 0, 0}), 0.01, 10, rng);
      FAIL("expected CutLocusError");
    } catch (const CutLocusError& e) {
      CHECK(e.step() == 1);
    }
    CHECK_THROWS_AS(kc_run(Sphere2{}, sphere_point({1, 0, 0}), sphere_point({1, 0, 0}), 0.01, 10, rng),
                    DomainError);
    CHECK_THROWS_AS(kc_run(Circle{}, circle_point(0), circle_point(0.3), 0.01, 10, rng),
                    UnsupportedError);
  }
}
