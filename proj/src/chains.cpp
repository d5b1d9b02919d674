#include <algorithm>
#include <cmath>
#include <sstream>

#include "mirror/diffusion.hpp"

namespace mirror {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Nearest-neighbour chain on an undirected multigraph given by edge weights.
struct Builder {
  std::vector<Point> states;
  std::vector<std::vector<std::pair<int, double>>> out;

  int add(Point p) {
    states.push_back(std::move(p));
    out.emplace_back();
    return static_cast<int>(states.size()) - 1;
  }
  void link(int a, int b, double w) {
    out[static_cast<std::size_t>(a)].push_back({b, w});
    out[static_cast<std::size_t>(b)].push_back({a, w});
  }
  Eigen::MatrixXd simple_random_walk() const {
    const int n = static_cast<int>(states.size());
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      double total = 0.0;
      for (const auto& [j, w] : out[static_cast<std::size_t>(i)]) total += w;
      for (const auto& [j, w] : out[static_cast<std::size_t>(i)]) P(i, j) += w / total;
    }
    return P;
  }
};

FiniteChain cycle_chain(const CycleSpec& spec) {
  if (spec.m < 4 || spec.m % 4 != 0)
    throw ParityError("Cycle: m must be a positive multiple of 4 so that H lies on states");
  if (!(spec.laziness >= 0.0 && spec.laziness < 1.0))
    throw DomainError("Cycle: laziness must lie in [0, 1)");
  FiniteChain c;
  c.space = Circle{};
  const int m = spec.m;
  for (int k = 0; k < m; ++k) c.states.push_back(circle_point(static_cast<double>(k) / m));
  c.P = Eigen::MatrixXd::Zero(m, m);
  const double move = 0.5 * (1.0 - spec.laziness);
  for (int k = 0; k < m; ++k) {
    c.P(k, k) += spec.laziness;
    c.P(k, (k + 1) % m) += move;
    c.P(k, (k + m - 1) % m) += move;
  }
  c.x1 = 0;
  c.x2 = m / 2;
  return c;
}

FiniteChain eight_chain(const EightSpec& spec) {
  if (spec.m < 2 || spec.m % 2 != 0)
    throw ParityError("EightChain: m must be even so that the glue point is a state");
  const int m = spec.m;
  auto gs = graph_space(eight_topology());
  Builder b;
  // Circle 1 positions 0..m-1, then circle 2 positions except the glue m/2.
  std::vector<int> c1(static_cast<std::size_t>(m)), c2(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) c1[static_cast<std::size_t>(k)] = b.add(eight_point(1, static_cast<double>(k) / m));
  for (int k = 0; k < m; ++k)
    c2[static_cast<std::size_t>(k)] =
        k == m / 2 ? c1[static_cast<std::size_t>(k)]
                   : b.add(eight_point(2, static_cast<double>(k) / m));
  for (int k = 0; k < m; ++k) {
    b.link(c1[static_cast<std::size_t>(k)], c1[static_cast<std::size_t>((k + 1) % m)], 1.0);
    b.link(c2[static_cast<std::size_t>(k)], c2[static_cast<std::size_t>((k + 1) % m)], 1.0);
  }
  FiniteChain c;
  c.space = gs;
  c.states = b.states;
  c.P = b.simple_random_walk();
  c.x1 = c1[0];
  c.x2 = c2[0];
  return c;
}

FiniteChain tree_chain(const TreeSpec& spec) {
  if (spec.m < 1) throw DomainError("TreeChain: m must be >= 1");
  const int m = spec.m;
  auto gs = graph_space(star_tree_topology());
  const MetricGraph& g = *gs.graph;
  Builder b;
  std::vector<int> vstate(static_cast<std::size_t>(g.num_vertices()));
  for (int v = 0; v < g.num_vertices(); ++v)
    vstate[static_cast<std::size_t>(v)] = b.add(g.at_vertex(v));
  for (int e = 0; e < g.num_edges(); ++e) {
    const auto& edge = g.topology().edges[static_cast<std::size_t>(e)];
    int prev = vstate[static_cast<std::size_t>(edge.from)];
    for (int k = 1; k < m; ++k) {
      const int s = b.add(GraphPoint{e, static_cast<double>(k) / m});
      b.link(prev, s, 1.0);
      prev = s;
    }
    b.link(prev, vstate[static_cast<std::size_t>(edge.to)], 1.0);
  }
  FiniteChain c;
  c.space = gs;
  c.states = b.states;
  c.P = b.simple_random_walk();
  c.x1 = vstate[static_cast<std::size_t>(g.topology().vertex("p11"))];
  c.x2 = vstate[static_cast<std::size_t>(g.topology().vertex("p22"))];
  return c;
}

Side gasket_side(const GasketPoint& p) {
  const std::int64_t k = (std::int64_t{1} << p.level) - p.i - p.j;
  return k > p.i ? Side::X1 : (k == p.i ? Side::H : Side::X2);
}

FiniteChain gasket_chain(const GasketSpec& spec) {
  if (spec.n < 0 || spec.n >= kMaxGasketLevel)
    throw LimitError("GasketChain: level out of range");
  const GasketLevelGraph lg = gasket_vertices(spec.n);
  Builder b;
  for (const auto& v : lg.vertices) b.add(v);
  for (const auto& [u, v] : lg.edges) {
    const auto& pu = lg.vertices[static_cast<std::size_t>(u)];
    const auto& pv = lg.vertices[static_cast<std::size_t>(v)];
    const Side su = gasket_side(pu);
    const Side sv = gasket_side(pv);
    const bool crossing = (su == Side::X1 && sv == Side::X2) || (su == Side::X2 && sv == Side::X1);
    if (crossing && spec.axis_subdivision) {
      // Both endpoints at level n; the midpoint is a level n+1 dyadic.
      const int L = spec.n + 1;
      const auto lift = [&](const GasketPoint& p, std::int64_t& i, std::int64_t& j) {
        i = p.i << (L - p.level);
        j = p.j << (L - p.level);
      };
      std::int64_t iu, ju, iv, jv;
      lift(pu, iu, ju);
      lift(pv, iv, jv);
      const GasketPoint mid = gasket_point((iu + iv) / 2, (ju + jv) / 2, L);
      if (gasket_side(mid) != Side::H)
        throw ConsistencyError("GasketChain: crossing edge midpoint is off the axis");
      const int s = b.add(mid);
      b.link(u, s, 1.0);
      b.link(s, v, 1.0);
    } else {
      b.link(u, v, 1.0);
    }
  }
  FiniteChain c;
  c.space = Gasket{};
  c.states = b.states;
  c.P = b.simple_random_walk();
  c.x1 = *lg.find(gasket_corner(1));
  c.x2 = *lg.find(gasket_corner(2));
  c.crossing_free = spec.axis_subdivision;
  return c;
}

void finish(FiniteChain& c, bool assert_crossing_free) {
  const int n = c.size();
  for (int i = 0; i < n; ++i) {
    if (std::abs(c.P.row(i).sum() - 1.0) > 1e-14)
      throw ConsistencyError("chain row " + std::to_string(i) + " does not sum to 1");
  }
  const ReflectionStructure rs =
      build_structure(c.space, c.states[static_cast<std::size_t>(c.x1)],
                      c.states[static_cast<std::size_t>(c.x2)]);
  c.sym.resize(static_cast<std::size_t>(n));
  c.sides.resize(static_cast<std::size_t>(n));
  c.h_mask.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const auto j = c.find(reflect(rs, c.states[ui]));
    if (!j) throw ConsistencyError("chain state set is not closed under R");
    c.sym[ui] = *j;
    c.sides[ui] = side(rs, c.states[ui]);
    c.h_mask[ui] = c.sides[ui] == Side::H;
  }
  if (c.sym[static_cast<std::size_t>(c.x1)] != c.x2)
    throw ConsistencyError("chain symmetry does not map x1 to x2");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (c.P(c.sym[static_cast<std::size_t>(i)], c.sym[static_cast<std::size_t>(j)]) != c.P(i, j))
        throw ConsistencyError("chain transition matrix is not R-equivariant");
  bool crossing_free = true;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (c.P(i, j) > 0.0 && c.sides[static_cast<std::size_t>(i)] == Side::X1 &&
          c.sides[static_cast<std::size_t>(j)] == Side::X2)
        crossing_free = false;
  if (assert_crossing_free && !crossing_free)
    throw ConsistencyError("chain has a step from X1 straight into X2");
  c.crossing_free = crossing_free;
}

}  // namespace

std::optional<int> FiniteChain::find(const Point& p) const {
  for (int i = 0; i < size(); ++i) {
    const Point& s = states[static_cast<std::size_t>(i)];
    if (s.index() != p.index()) continue;
    const bool hit = std::visit(
        overloaded{
            [&](const GraphPoint& a) {
              return std::get<GraphSpace>(space).graph->same(a, std::get<GraphPoint>(p));
            },
            [&](const GasketPoint& a) { return a == std::get<GasketPoint>(p); },
            [&](const CirclePoint& a) {
              return std::abs(wrap_centered(a.angle - std::get<CirclePoint>(p).angle)) <= 1e-12;
            },
            [&](const auto&) { return distance(space, s, p) <= 1e-12; }},
        s);
    if (hit) return i;
  }
  return std::nullopt;
}

std::string describe(const ChainRequest& request) {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const CycleSpec& s) { os << "Cycle(" << s.m << "," << s.laziness << ")"; },
                 [&](const EightSpec& s) { os << "EightChain(" << s.m << ")"; },
                 [&](const TreeSpec& s) { os << "TreeChain(" << s.m << ")"; },
                 [&](const GasketSpec& s) {
                   os << "GasketChain(" << s.n << "," << (s.axis_subdivision ? "true" : "false")
                      << ")";
                 }},
             request);
  return os.str();
}

FiniteChain build_chain(const ChainRequest& request) {
  FiniteChain c = std::visit(overloaded{[](const CycleSpec& s) { return cycle_chain(s); },
                                        [](const EightSpec& s) { return eight_chain(s); },
                                        [](const TreeSpec& s) { return tree_chain(s); },
                                        [](const GasketSpec& s) { return gasket_chain(s); }},
                             request);
  c.label = describe(request);
  const bool unsubdivided_gasket =
      std::holds_alternative<GasketSpec>(request) && !std::get<GasketSpec>(request).axis_subdivision;
  finish(c, !unsubdivided_gasket);
  return c;
}

namespace {

// One step mu -> mu P. Each entry sums its terms in sorted order, so the
// result depends only on the multiset of terms: permuting states by the
// chain symmetry permutes the output exactly, with no rounding drift.
Eigen::RowVectorXd step_distribution(const Eigen::RowVectorXd& mu, const Eigen::MatrixXd& P) {
  const Eigen::Index n = mu.size();
  Eigen::RowVectorXd out(n);
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    terms.clear();
    for (Eigen::Index i = 0; i < n; ++i)
      if (mu(i) != 0.0 && P(i, j) != 0.0) terms.push_back(mu(i) * P(i, j));
    std::sort(terms.begin(), terms.end());
    double acc = 0.0;
    for (double v : terms) acc += v;
    out(j) = acc;
  }
  return out;
}

}  // namespace

Eigen::VectorXd chain_distribution(const FiniteChain& chain, int init, int t) {
  if (init < 0 || init >= chain.size()) throw DomainError("chain_distribution: bad state");
  if (t < 0) throw DomainError("chain_distribution: t must be >= 0");
  Eigen::RowVectorXd mu = Eigen::RowVectorXd::Zero(chain.size());
  mu(init) = 1.0;
  for (int s = 0; s < t; ++s) mu = step_distribution(mu, chain.P);
  return mu.transpose();
}

Eigen::MatrixXd chain_power(const FiniteChain& chain, int t) {
  if (t < 0) throw DomainError("chain_power: t must be >= 0");
  Eigen::MatrixXd M(chain.size(), chain.size());
  for (int i = 0; i < chain.size(); ++i) M.row(i) = chain_distribution(chain, i, t).transpose();
  return M;
}

int chain_step(const FiniteChain& chain, int state, CounterRng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  int last = state;
  for (int j = 0; j < chain.size(); ++j) {
    const double p = chain.P(state, j);
    if (p <= 0.0) continue;
    acc += p;
    last = j;
    if (u < acc) return j;
  }
  return last;
}

Trajectory sample_chain(const FiniteChain& chain, int init, int n_steps,
                        std::uint64_t seed, std::uint64_t stream) {
  if (init < 0 || init >= chain.size()) throw DomainError("sample_chain: bad state");
  Trajectory tr;
  tr.kind = Trajectory::Kind::Chain;
  tr.seed = seed;
  tr.stream = stream;
  CounterRng rng = seed_stream(seed, stream);
  int s = init;
  tr.times.push_back(0.0);
  tr.positions.push_back(chain.states[static_cast<std::size_t>(s)]);
  for (int k = 1; k <= n_steps; ++k) {
    s = chain_step(chain, s, rng);
    tr.times.push_back(k);
    tr.positions.push_back(chain.states[static_cast<std::size_t>(s)]);
  }
  return tr;
}

std::vector<int> chain_states(const FiniteChain& chain, const Trajectory& path) {
  std::vector<int> out;
  out.reserve(path.positions.size());
  for (const auto& p : path.positions) {
    const auto i = chain.find(p);
    if (!i) throw DomainError("chain_states: point is not a chain state");
    out.push_back(*i);
  }
  return out;
}

}  // namespace mirror
