#include <cmath>

#include "mirror/couplings.hpp"
#include "mirror/geometry.hpp"

namespace mirror {

namespace {

bool is_continuous(const Space& space) {
  return !std::holds_alternative<GraphSpace>(space) && !std::holds_alternative<Gasket>(space);
}

const MetricGraph& eight_graph() {
  static const MetricGraph g(eight_topology());
  return g;
}

const MetricGraph& tree_graph() {
  static const MetricGraph g(star_tree_topology());
  return g;
}

void require_start(const MetricGraph& g, const Trajectory& z1, const char* vertex,
                   const char* who) {
  if (z1.positions.empty()) throw DomainError(std::string(who) + ": empty path");
  if (!g.same(std::get<GraphPoint>(z1.positions.front()), g.at_vertex(vertex)))
    throw DomainError(std::string(who) + ": path must start at " + vertex);
}

bool at_vertex(const MetricGraph& g, const Point& p, const char* name) {
  const auto v = g.vertex_of(std::get<GraphPoint>(p));
  return v && *v == g.topology().vertex(name);
}

CoupledTrajectory start_pair(const Trajectory& z1) {
  CoupledTrajectory out;
  out.times = z1.times;
  out.z1 = z1.positions;
  out.z2.reserve(z1.positions.size());
  out.mirror_flag.reserve(z1.positions.size());
  return out;
}

// Index of the first stage whose trigger is not met by `state`, starting at s.
int advance(const StagedCoupling& c, int s, int state) {
  const int last = static_cast<int>(c.maps.size()) - 1;
  while (s < last && c.triggers[static_cast<std::size_t>(s)][static_cast<std::size_t>(state)]) ++s;
  return s;
}

std::vector<int> state_permutation(const FiniteChain& chain, const GraphIsometry& iso) {
  std::vector<int> perm(static_cast<std::size_t>(chain.size()));
  for (int i = 0; i < chain.size(); ++i) {
    const auto j = chain.find(iso.apply(std::get<GraphPoint>(chain.states[static_cast<std::size_t>(i)])));
    if (!j) throw ConsistencyError("graph isometry does not preserve the chain states");
    perm[static_cast<std::size_t>(i)] = *j;
  }
  return perm;
}

std::vector<int> identity_map(int n) {
  std::vector<int> id(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) id[static_cast<std::size_t>(i)] = i;
  return id;
}

const MetricGraph& chain_graph(const FiniteChain& chain, GraphKind kind, const char* who) {
  const auto* gs = std::get_if<GraphSpace>(&chain.space);
  if (!gs || gs->graph->topology().kind != kind)
    throw UnsupportedError(std::string(who) + ": wrong chain type " + chain.label);
  return *gs->graph;
}

}  // namespace

// ------------------------------------------------------------- mirror map --

TangentVector mirror_map(const Space& space, const Point& x, const Point& y,
                         const TangentVector& v) {
  if (std::holds_alternative<Euclidean>(space)) {
    return {y, geometry::euclidean_mirror(std::get<EuclideanPoint>(x).x,
                                          std::get<EuclideanPoint>(y).x, v.v)};
  }
  if (std::holds_alternative<Sphere2>(space)) {
    const Eigen::Vector3d w = v.v;
    return {y, geometry::sphere_mirror(std::get<SpherePoint>(x).z,
                                       std::get<SpherePoint>(y).z, w)};
  }
  if (std::holds_alternative<Hyperbolic2>(space)) {
    const Eigen::Vector3d w = v.v;
    return {y, geometry::hyperbolic_mirror(std::get<HyperbolicPoint>(x).z,
                                           std::get<HyperbolicPoint>(y).z, w)};
  }
  throw UnsupportedError("mirror_map: not offered on " + space_name(space));
}

MirrorMapFrame mirror_frame(const Space& space, const Point& x, const Point& y) {
  MirrorMapFrame f{x, y, reference_frame(space, x), {}};
  f.phi2.resize(f.phi1.rows(), f.phi1.cols());
  for (Eigen::Index c = 0; c < f.phi1.cols(); ++c)
    f.phi2.col(c) = mirror_map(space, x, y, TangentVector{x, f.phi1.col(c)}).v;
  return f;
}

// ----------------------------------------------------- pathwise couplings --

CoupledTrajectory mirror_run(const ReflectionStructure& s, const Trajectory& z1) {
  if (z1.positions.empty()) throw DomainError("mirror_run: empty path");
  if (distance(s.space, z1.positions.front(), s.x1) > 1e-12)
    throw DomainError("mirror_run: path must start at x1");
  const bool bridge = z1.kind == Trajectory::Kind::Brownian && is_continuous(s.space);
  CounterRng thin = seed_stream(z1.seed, z1.stream, 1);
  CoupledTrajectory out = start_pair(z1);
  out.max_mirror_deviation = 0.0;
  for (std::size_t k = 0; k < z1.positions.size(); ++k) {
    const Point& p = z1.positions[k];
    if (out.T == kNever) {
      bool hit = false;
      const Side sd = side(s, p);
      if (z1.kind == Trajectory::Kind::Chain) {
        hit = sd == Side::H;
      } else {
        hit = sd != Side::X1;
        if (!hit && bridge && k > 0) {
          const double d1 = std::abs(signed_distance_to_h(s, z1.positions[k - 1]));
          const double d2 = std::abs(signed_distance_to_h(s, p));
          hit = thin.uniform() < bridge_crossing_prob(d1, d2, z1.times[k] - z1.times[k - 1]);
        }
      }
      if (hit) out.T = z1.times[k];
    }
    if (out.T == kNever) {
      out.z2.push_back(reflect(s, p));
      out.mirror_flag.push_back(true);
    } else {
      out.z2.push_back(p);
      out.mirror_flag.push_back(false);
    }
  }
  return out;
}

CoupledTrajectory counterexample_eight_run(const Trajectory& z1) {
  const MetricGraph& g = eight_graph();
  require_start(g, z1, "o1", "counterexample_eight_run");
  const GraphIsometry r = eight_reflection(g);
  const GraphIsometry eta_r = compose(eight_eta(g), r);
  CoupledTrajectory out = start_pair(z1);
  for (std::size_t k = 0; k < z1.positions.size(); ++k) {
    const auto& p = std::get<GraphPoint>(z1.positions[k]);
    if (out.T == kNever && at_vertex(g, p, "g")) out.T = z1.times[k];
    const GraphPoint q = out.T == kNever ? eta_r.apply(p) : p;
    out.z2.push_back(q);
    out.mirror_flag.push_back(out.T == kNever && g.same(q, r.apply(p)));
  }
  return out;
}

CoupledTrajectory counterexample_tree_run(const Trajectory& z1) {
  const MetricGraph& g = tree_graph();
  require_start(g, z1, "p11", "counterexample_tree_run");
  const GraphIsometry r = tree_reflection(g);
  const GraphIsometry eta_r = compose(tree_eta(g), r);
  CoupledTrajectory out = start_pair(z1);
  bool past_p1 = false;
  for (std::size_t k = 0; k < z1.positions.size(); ++k) {
    const auto& p = std::get<GraphPoint>(z1.positions[k]);
    if (at_vertex(g, p, "p1")) past_p1 = true;
    if (out.T == kNever && at_vertex(g, p, "p0")) out.T = z1.times[k];
    GraphPoint q = p;
    if (out.T == kNever) q = past_p1 ? eta_r.apply(p) : r.apply(p);
    out.z2.push_back(q);
    out.mirror_flag.push_back(out.T == kNever && g.same(q, r.apply(p)));
  }
  return out;
}

CoupledTrajectory independent_run(const Space& space, const Trajectory& z1,
                                  const Trajectory& z2) {
  if (z1.seed == z2.seed && z1.stream == z2.stream)
    throw DomainError("independent_run: components share a random stream");
  if (z1.times != z2.times) throw DomainError("independent_run: time grids differ");
  const bool can_meet = z1.kind == Trajectory::Kind::Chain && z2.kind == Trajectory::Kind::Chain;
  CoupledTrajectory out = start_pair(z1);
  for (std::size_t k = 0; k < z1.positions.size(); ++k) {
    if (out.T == kNever && can_meet &&
        distance(space, z1.positions[k], z2.positions[k]) == 0.0)
      out.T = z1.times[k];
    out.z2.push_back(out.T == kNever ? z2.positions[k] : z1.positions[k]);
    out.mirror_flag.push_back(false);
  }
  return out;
}

// --------------------------------------------------- exact chain couplings --

MirrorKernel chain_mirror_kernel(const FiniteChain& chain, int t_max) {
  if (t_max < 0) throw DomainError("chain_mirror_kernel: t_max must be >= 0");
  MirrorKernel k;
  std::vector<int> pos(static_cast<std::size_t>(chain.size()), -1);
  for (int i = 0; i < chain.size(); ++i) {
    if (chain.h_mask[static_cast<std::size_t>(i)]) continue;
    pos[static_cast<std::size_t>(i)] = static_cast<int>(k.states.size());
    k.states.push_back(i);
  }
  const int m = static_cast<int>(k.states.size());
  k.Q.resize(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      k.Q(a, b) = chain.P(k.states[static_cast<std::size_t>(a)], k.states[static_cast<std::size_t>(b)]);
  k.survival.resize(t_max + 1);
  const int start = pos[static_cast<std::size_t>(chain.x1)];
  if (start < 0) throw DomainError("chain_mirror_kernel: x1 lies on H");
  Eigen::RowVectorXd v = Eigen::RowVectorXd::Zero(m);
  v(start) = 1.0;
  for (int t = 0; t <= t_max; ++t) {
    k.survival(t) = v.sum();
    v = v * k.Q;
  }
  return k;
}

StagedCoupling mirror_stages(const FiniteChain& chain) {
  StagedCoupling c;
  c.name = "mirror";
  c.maps = {chain.sym, identity_map(chain.size())};
  c.triggers = {chain.h_mask, std::vector<bool>(static_cast<std::size_t>(chain.size()), false)};
  return c;
}

StagedCoupling eight_stages(const FiniteChain& chain) {
  const MetricGraph& g = chain_graph(chain, GraphKind::Eight, "eight_stages");
  const std::vector<int> eta = state_permutation(chain, eight_eta(g));
  StagedCoupling c;
  c.name = "eight";
  std::vector<int> eta_r(static_cast<std::size_t>(chain.size()));
  std::vector<bool> glue(static_cast<std::size_t>(chain.size()), false);
  for (int i = 0; i < chain.size(); ++i) {
    eta_r[static_cast<std::size_t>(i)] = eta[static_cast<std::size_t>(chain.sym[static_cast<std::size_t>(i)])];
    glue[static_cast<std::size_t>(i)] = at_vertex(g, chain.states[static_cast<std::size_t>(i)], "g");
  }
  c.maps = {eta_r, identity_map(chain.size())};
  c.triggers = {glue, std::vector<bool>(static_cast<std::size_t>(chain.size()), false)};
  return c;
}

StagedCoupling tree_stages(const FiniteChain& chain) {
  const MetricGraph& g = chain_graph(chain, GraphKind::StarTree, "tree_stages");
  const std::vector<int> eta = state_permutation(chain, tree_eta(g));
  const auto n = static_cast<std::size_t>(chain.size());
  std::vector<int> eta_r(n);
  std::vector<bool> at_p1(n, false), at_p0(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    eta_r[i] = eta[static_cast<std::size_t>(chain.sym[i])];
    at_p1[i] = at_vertex(g, chain.states[i], "p1");
    at_p0[i] = at_vertex(g, chain.states[i], "p0");
  }
  StagedCoupling c;
  c.name = "tree";
  c.maps = {chain.sym, eta_r, identity_map(chain.size())};
  c.triggers = {at_p1, at_p0, std::vector<bool>(n, false)};
  return c;
}

namespace {

void check_staged(const FiniteChain& chain, const StagedCoupling& c) {
  if (c.maps.size() < 2 || c.triggers.size() != c.maps.size())
    throw DomainError("staged coupling needs >= 2 stages with matching triggers");
  for (const auto& m : c.maps)
    if (static_cast<int>(m.size()) != chain.size())
      throw DomainError("staged coupling map has the wrong size");
  for (int i = 0; i < chain.size(); ++i)
    if (c.maps.back()[static_cast<std::size_t>(i)] != i)
      throw DomainError("staged coupling must end in the identity stage");
}

// Distribution over (Z1 state, stage) after each step, handed to `visit`.
template <class Visit>
void propagate(const FiniteChain& chain, const StagedCoupling& c, int t_max, Visit&& visit) {
  check_staged(chain, c);
  const int n = chain.size();
  const int S = static_cast<int>(c.maps.size());
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, S);
  D(chain.x1, advance(c, 0, chain.x1)) = 1.0;
  for (int t = 0; t <= t_max; ++t) {
    visit(t, D);
    if (t == t_max) break;
    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(n, S);
    for (int s = 0; s < S; ++s)
      for (int i = 0; i < n; ++i) {
        const double w = D(i, s);
        if (w == 0.0) continue;
        for (int j = 0; j < n; ++j) {
          const double p = chain.P(i, j);
          if (p != 0.0) next(j, advance(c, s, j)) += w * p;
        }
      }
    D = std::move(next);
  }
}

}  // namespace

JointLaw staged_joint_law(const FiniteChain& chain, const StagedCoupling& c, int t_max) {
  if (t_max < 0) throw DomainError("staged_joint_law: t_max must be >= 0");
  JointLaw law;
  law.survival.resize(t_max + 1);
  const int n = chain.size();
  const int S = static_cast<int>(c.maps.size());
  propagate(chain, c, t_max, [&](int t, const Eigen::MatrixXd& D) {
    Eigen::MatrixXd pair = Eigen::MatrixXd::Zero(n, n);
    double alive = 0.0;
    for (int s = 0; s < S; ++s)
      for (int i = 0; i < n; ++i) {
        pair(i, c.maps[static_cast<std::size_t>(s)][static_cast<std::size_t>(i)]) += D(i, s);
        if (s < S - 1) alive += D(i, s);
      }
    law.pair.push_back(std::move(pair));
    law.survival(t) = alive;
  });
  return law;
}

JointLaw independent_joint_law(const FiniteChain& chain, int a, int b, int t_max) {
  if (t_max < 0) throw DomainError("independent_joint_law: t_max must be >= 0");
  const int n = chain.size();
  JointLaw law;
  law.survival.resize(t_max + 1);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  M(a, b) = 1.0;
  for (int t = 0; t <= t_max; ++t) {
    law.survival(t) = M.sum() - M.diagonal().sum();
    law.pair.push_back(M);
    Eigen::MatrixXd off = M;
    off.diagonal().setZero();
    const Eigen::VectorXd together = M.diagonal();
    Eigen::MatrixXd next = chain.P.transpose() * off * chain.P;
    next.diagonal() += chain.P.transpose() * together;
    M = std::move(next);
  }
  return law;
}

double markovian_contract_residual(const FiniteChain& chain, const StagedCoupling& c,
                                   int t_max) {
  const int n = chain.size();
  const int S = static_cast<int>(c.maps.size());
  double worst = 0.0;
  std::vector<char> seen(static_cast<std::size_t>(n * S), 0);
  propagate(chain, c, t_max, [&](int, const Eigen::MatrixXd& D) {
    for (int s = 0; s < S; ++s)
      for (int i = 0; i < n; ++i) {
        auto& flag = seen[static_cast<std::size_t>(s * n + i)];
        if (D(i, s) == 0.0 || flag) continue;
        flag = 1;
        const int z2 = c.maps[static_cast<std::size_t>(s)][static_cast<std::size_t>(i)];
        Eigen::RowVectorXd law2 = Eigen::RowVectorXd::Zero(n);
        for (int j = 0; j < n; ++j) {
          const double p = chain.P(i, j);
          if (p == 0.0) continue;
          const int s2 = advance(c, s, j);
          law2(c.maps[static_cast<std::size_t>(s2)][static_cast<std::size_t>(j)]) += p;
        }
        worst = std::max(worst, (law2 - chain.P.row(z2)).cwiseAbs().maxCoeff());
      }
  });
  return worst;
}

double marginal_residual(const FiniteChain& chain, const JointLaw& law, int a, int b) {
  double worst = 0.0;
  Eigen::RowVectorXd m1 = Eigen::RowVectorXd::Zero(chain.size());
  Eigen::RowVectorXd m2 = m1;
  m1(a) = 1.0;
  m2(b) = 1.0;
  for (const auto& pair : law.pair) {
    worst = std::max(worst, (pair.rowwise().sum().transpose() - m1).cwiseAbs().maxCoeff());
    worst = std::max(worst, (pair.colwise().sum() - m2).cwiseAbs().maxCoeff());
    m1 = m1 * chain.P;
    m2 = m2 * chain.P;
  }
  return worst;
}

double max_joint_gap(const JointLaw& a, const JointLaw& b) {
  if (a.pair.size() != b.pair.size()) throw DomainError("max_joint_gap: horizon mismatch");
  double worst = 0.0;
  for (std::size_t t = 0; t < a.pair.size(); ++t)
    worst = std::max(worst, (a.pair[t] - b.pair[t]).cwiseAbs().maxCoeff());
  return worst;
}

CoupledTrajectory staged_run(const FiniteChain& chain, const StagedCoupling& c,
                             const Trajectory& z1) {
  check_staged(chain, c);
  const std::vector<int> states = chain_states(chain, z1);
  if (states.empty() || states.front() != chain.x1)
    throw DomainError("staged_run: path must start at x1");
  const int last = static_cast<int>(c.maps.size()) - 1;
  CoupledTrajectory out = start_pair(z1);
  int s = 0;
  for (std::size_t k = 0; k < states.size(); ++k) {
    const int i = states[k];
    s = advance(c, s, i);
    if (s == last && out.T == kNever) out.T = z1.times[k];
    const int j = c.maps[static_cast<std::size_t>(s)][static_cast<std::size_t>(i)];
    out.z2.push_back(chain.states[static_cast<std::size_t>(j)]);
    out.mirror_flag.push_back(s < last && j == chain.sym[static_cast<std::size_t>(i)]);
  }
  return out;
}

}  // namespace mirror
