// Acceptance suite: one PASS/FAIL line per criterion; exits non-zero if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <queue>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mirror/harness.hpp"

using namespace mirror;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::vector<ChainRequest> chains() {
  return {CycleSpec{4, 0.5}, EightSpec{4}, TreeSpec{2}, GasketSpec{2, true}};
}

int hardware_threads() {
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

std::string scratch_dir() {
  const auto p = std::filesystem::temp_directory_path() / "mirror_acceptance";
  std::filesystem::create_directories(p);
  return p.string();
}

// 1. Euclidean mirror coupling attains the exact total variation.
void euclidean_survival(Verdict& v) {
  ExperimentConfig c;
  c.space = "euclidean";
  c.coupling = "mirror";
  c.separation = 1.0;
  c.t_grid = {0.25, 1.0, 4.0};
  c.trials = 100000;
  c.seed = 20240101;
  c.threads = hardware_threads();
  const TVCurve curve = simulate_survival(c);
  const double expected[] = {0.6826895, 0.3829249, 0.1974127};
  for (std::size_t k = 0; k < 3; ++k) {
    const double z = (curve.value[k] - expected[k]) / curve.se[k];
    v.detail << " t=" << curve.t[k] << ":" << curve.value[k] << "(z=" << z << ")";
    v.require(std::abs(z) <= 3.0, "t=" + std::to_string(curve.t[k]));
  }
}

// 2. Exact maximality on the chains up to t = 50.
void chain_maximality(Verdict& v) {
  for (const auto& req : chains()) {
    const FiniteChain chain = build_chain(req);
    const double gap = maximality_gap(chain, 50);
    v.detail << ' ' << chain.label << ":" << gap;
    v.require(gap <= 1e-12, chain.label);
  }
}

// 3. Distinct Markovian maximal couplings on the eight and the tree.
void nonuniqueness(Verdict& v) {
  const std::vector<ChainRequest> reqs = {EightSpec{4}, TreeSpec{2}};
  for (const auto& req : reqs) {
    const FiniteChain chain = build_chain(req);
    const bool eight = std::holds_alternative<EightSpec>(req);
    const StagedCoupling other = eight ? eight_stages(chain) : tree_stages(chain);
    const JointLaw m = staged_joint_law(chain, mirror_stages(chain), 20);
    const JointLaw o = staged_joint_law(chain, other, 20);
    const double surv = (m.survival - o.survival).cwiseAbs().maxCoeff();
    const double joint = max_joint_gap(m, o);
    const double markov = markovian_contract_residual(chain, other, 20);
    const double marg = marginal_residual(chain, o, chain.x1, chain.x2);
    v.detail << ' ' << chain.label << ": survival_gap=" << surv << " joint_gap=" << joint;
    v.require(surv <= 1e-12, chain.label + " survival");
    v.require(joint > 0.01, chain.label + " joint");
    v.require(markov <= 1e-14 && marg <= 1e-12, chain.label + " contract");
  }
}

// 4. Mirror measure optimality for every s + t <= 20.
void wasser_optimality(Verdict& v) {
  for (const auto& req : chains()) {
    const FiniteChain chain = build_chain(req);
    double worst = 0.0, worst_random = INFINITY;
    bool ok = true;
    for (int s = 0; s <= 20; ++s)
      for (int t = 0; s + t <= 20; ++t) {
        const WasserResult r = wasser_check(chain, s, t, 100, 1000 + s * 21 + t);
        ok = ok && r.pass;
        worst = std::max(worst, std::abs(r.residual));
        worst_random = std::min(worst_random, r.worst_random_gap);
      }
    v.detail << ' ' << chain.label << ": |residual|<=" << worst << " min_random_gap=" << worst_random;
    v.require(ok, chain.label);
    v.require(worst <= 1e-12 && worst_random >= -1e-12, chain.label + " bounds");
  }
}

// 5. The coupled geodesic walk stays the mirror image before merging.
void kc_mirror(Verdict& v) {
  CounterRng rs = seed_stream(5, 0);
  const CoupledTrajectory s =
      kc_run(Sphere2{}, sphere_point({1, -1, 0}), sphere_point({1, 1, 0}), 1e-3, 10000, rs);
  CounterRng re = seed_stream(5, 1);
  const CoupledTrajectory e =
      kc_run(Euclidean{2}, euclidean_point({-0.05, 0}), euclidean_point({0.05, 0}), 1e-3, 10000, re);
  v.detail << " sphere=" << s.max_mirror_deviation << " euclidean=" << e.max_mirror_deviation;
  v.require(s.max_mirror_deviation <= 1e-9, "sphere");
  v.require(e.max_mirror_deviation <= 1e-12, "euclidean");
}

// 6. -2 t log p_t approaches d^2.
void short_time(Verdict& v) {
  std::vector<double> flat, sphere;
  for (int k = 1; k <= 6; ++k) flat.push_back(std::pow(10.0, -k));
  for (int k = 1; k <= 3; ++k) sphere.push_back(std::pow(10.0, -k));
  const VaradhanReport e = varadhan_check(Euclidean{1}, euclidean_point({0}), euclidean_point({1}), flat);
  const VaradhanReport c = varadhan_check(Circle{}, circle_point(0), circle_point(0.25), flat);
  const VaradhanReport s =
      varadhan_check(Sphere2{}, sphere_point({1, 0, 0}), sphere_point({0, 1, 0}), sphere);
  v.detail << " euclidean_last=" << e.rows.back().deviation << " circle_last=" << c.rows.back().deviation
           << " sphere_last=" << s.rows.back().deviation << " e(1e-3)=" << e.rows[2].value;
  v.require(e.pass && e.monotone, "euclidean");
  v.require(c.pass && c.monotone, "circle");
  v.require(s.pass && s.monotone, "sphere");
  v.require(std::abs(e.rows[2].value - 0.99493) < 1e-6, "euclidean value at t=1e-3");
}

// 7. Flat torus equidistant sets.
void torus_bisectors(Verdict& v) {
  struct Case {
    double a, b;
  };
  for (const Case cs : {Case{1.0 / 3.0, 0.2}, Case{0.2, 0.2}, Case{1.0 / 3.0, 0.0}}) {
    ExperimentConfig c;
    c.mode = "verify";
    c.check = "bisector-equidistance";
    c.space = "torus";
    c.coupling = "mirror";
    c.separation = cs.a;
    c.torus_b = cs.b;
    c.output_dir = scratch_dir();
    c.name = "bisector";
    const ResultManifest m = run_experiment(c);
    const auto& d = m.checks.at(0).detail;
    v.detail << " (" << cs.a << "," << cs.b << "):" << d["case"].get<std::string>()
             << " max=" << d["max_residual"].get<double>();
    v.require(m.pass, "equidistance");
    v.require(d["singular"].get<bool>() == (cs.b != 0.0), "singular flag");
  }
  const BisectorGeometry g = torus_bisector(1.0 / 3.0, 0.0);
  bool circles = g.kind == BisectorGeometry::Case::TwoCircles;
  std::vector<double> xs;
  for (const auto& p : g.points) xs.push_back(p(0));
  for (double want : {1.0 / 6.0, 2.0 / 3.0}) {
    bool found = false;
    for (double x : xs) found = found || std::abs(x - want) <= 1e-15;
    circles = circles && found;
  }
  v.require(circles, "b = 0 gives the circles x = 1/6 and x = 2/3");
}

// 8. Gasket geodesic distance.
void gasket_distances(Verdict& v) {
  for (int n = 0; n <= 4; ++n) {
    const GasketLevelGraph g = gasket_vertices(n);
    const int sz = static_cast<int>(g.vertices.size());
    std::vector<std::vector<int>> adj(sz);
    for (auto [a, b] : g.edges) {
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
    int mismatches = 0;
    for (int s = 0; s < sz; ++s) {
      std::vector<int> hop(sz, -1);
      std::queue<int> q;
      q.push(s);
      hop[s] = 0;
      while (!q.empty()) {
        const int u = q.front();
        q.pop();
        for (int w : adj[u])
          if (hop[w] < 0) {
            hop[w] = hop[u] + 1;
            q.push(w);
          }
      }
      for (int t = 0; t < sz; ++t)
        mismatches += gasket_distance(g.vertices[s], g.vertices[t]) == make_dyadic(hop[t], n) ? 0 : 1;
    }
    v.detail << " n=" << n << ":" << sz << "pts";
    v.require(mismatches == 0, "BFS at n=" + std::to_string(n));
  }
  const GasketPoint p1 = gasket_corner(1), p2 = gasket_corner(2);
  v.require(gasket_distance(p1, p2).value() == 1.0, "d(p1,p2) = 1");
  v.require(gasket_distance(gasket_contract(2, p1), gasket_contract(2, p2)).value() == 0.5,
            "d(Psi2 p1, Psi2 p2) = 1/2");
}

// 9. The second component of each coupling is a copy of the process from x2.
void coupling_marginals(Verdict& v) {
  double worst = 0.0;
  for (const auto& req : chains()) {
    const FiniteChain chain = build_chain(req);
    const JointLaw law = staged_joint_law(chain, mirror_stages(chain), 50);
    worst = std::max(worst, marginal_residual(chain, law, chain.x1, chain.x2));
  }
  const FiniteChain eight = build_chain(EightSpec{4}), tree = build_chain(TreeSpec{2});
  worst = std::max(worst, marginal_residual(eight, staged_joint_law(eight, eight_stages(eight), 50),
                                            eight.x1, eight.x2));
  worst = std::max(worst, marginal_residual(tree, staged_joint_law(tree, tree_stages(tree), 50),
                                            tree.x1, tree.x2));
  v.detail << " chains=" << worst;
  v.require(worst <= 1e-12, "exact chain marginals");

  // Continuous couplings: the second component against a free copy of the
  // process from x2, at three checkpoints, through two distance statistics.
  const int n = 100000;
  const std::vector<int> checkpoints = {5, 10, 20};
  using Paths = std::function<std::pair<std::vector<Point>, std::vector<Point>>(int)>;
  auto ks_at_checkpoints = [&](const std::string& label, const Space& space, const std::vector<int>& at,
                               const Point& ref1, const Point& ref2, const Paths& paths) {
    const std::size_t m = at.size();
    std::vector<std::vector<double>> c1(m, std::vector<double>(n)), d1 = c1, c2 = c1, d2 = c1;
    for (int i = 0; i < n; ++i) {
      const auto [coupled, free] = paths(i);
      for (std::size_t k = 0; k < m; ++k) {
        const auto idx = static_cast<std::size_t>(at[k]);
        c1[k][i] = distance(space, coupled[idx], ref1);
        d1[k][i] = distance(space, free[idx], ref1);
        c2[k][i] = distance(space, coupled[idx], ref2);
        d2[k][i] = distance(space, free[idx], ref2);
      }
    }
    double pmin = 1.0;
    for (std::size_t k = 0; k < m; ++k)
      pmin = std::min({pmin, ks_two_sample(c1[k], d1[k]).p_value, ks_two_sample(c2[k], d2[k]).p_value});
    v.detail << ' ' << label << "_min_ks_p=" << pmin;
    v.require(pmin > 0.01, label + " KS");
  };

  const Space line = Euclidean{1};
  const Point x1 = euclidean_point({-0.5}), x2 = euclidean_point({0.5});
  const ReflectionStructure rs = build_structure(line, x1, x2);
  ks_at_checkpoints("euclidean", line, checkpoints, x2, euclidean_point({2.0}), [&](int i) {
    return std::pair{mirror_run(rs, sample_brownian(line, x1, 0.05, 20, 91, i)).z2,
                     sample_brownian(line, x2, 0.05, 20, 92, i).positions};
  });

  const Space circle = Circle{};
  const Point c1 = circle_point(0.0), c2 = circle_point(0.3);
  const ReflectionStructure rc = build_structure(circle, c1, c2);
  ks_at_checkpoints("circle", circle, checkpoints, c2, circle_point(0.55), [&](int i) {
    return std::pair{mirror_run(rc, sample_brownian(circle, c1, 0.005, 20, 95, i)).z2,
                     sample_brownian(circle, c2, 0.005, 20, 96, i).positions};
  });

  const Space sphere = Sphere2{};
  const Point s1 = sphere_point({1, -1, 0}), s2 = sphere_point({1, 1, 0});
  ks_at_checkpoints("sphere_kc", sphere, {25, 50, 100}, s2, sphere_point({0, 0, 1}), [&](int i) {
    CounterRng rng = seed_stream(93, static_cast<std::uint64_t>(i));
    return std::pair{kc_run(sphere, s1, s2, 0.1, 100, rng).z2,
                     sample_geodesic_walk(sphere, s2, 0.1, 100, 94, i).positions};
  });
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Verdict&)>>> criteria = {
      {"euclidean mirror survival matches the exact TV", euclidean_survival},
      {"exact maximality on chains up to t=50", chain_maximality},
      {"non-unique maximal Markovian couplings", nonuniqueness},
      {"mirror measure optimality for s+t<=20", wasser_optimality},
      {"coupled geodesic walk is the mirror image", kc_mirror},
      {"heat kernel short-time asymptotics", short_time},
      {"flat torus equidistant sets", torus_bisectors},
      {"gasket geodesic distance", gasket_distances},
      {"coupling marginals", coupling_marginals},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[k].second(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %zu %s (%.1fs)%s\n", v.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(), secs,
                v.detail.str().c_str());
    std::fflush(stdout);
    failed += v.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
