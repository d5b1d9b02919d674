#include <algorithm>
#include <cmath>
#include <random>

#include "mirror/analysis.hpp"

namespace mirror {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// P[wrapped N(u0, t) lands in (0, 1/2)] on the unit circle.
double circle_half_mass(double t, double u0) {
  const double s = std::sqrt(t);
  const int images = std::max(10, static_cast<int>(std::ceil(std::sqrt(80.0 * t))) + 2);
  double acc = 0.0;
  for (int n = -images; n <= images; ++n)
    acc += normal_cdf((0.5 - u0 + n) / s) - normal_cdf((-u0 + n) / s);
  return acc;
}

// phi on a circle coordinate whose reflection is u -> 2c - u.
double circle_phi(double t, double coord, double center) {
  const double u = std::abs(wrap_centered(coord - center));
  return circle_half_mass(t, u) - circle_half_mass(t, -u);
}

void require_distribution(const Eigen::VectorXd& mu, const char* who) {
  if (std::abs(mu.sum() - 1.0) > 1e-12)
    throw DomainError(std::string(who) + ": vector does not sum to 1");
}

Point sample_at(const Space& space, const Point& from, double t, CounterRng& rng,
                int walk_steps) {
  if (std::holds_alternative<Euclidean>(space) || std::holds_alternative<Circle>(space) ||
      std::holds_alternative<FlatTorus>(space))
    return bm_increment(space, from, t, rng);
  if (std::holds_alternative<Sphere2>(space) || std::holds_alternative<Hyperbolic2>(space)) {
    const double eps = std::sqrt(t / walk_steps);
    const int d = manifold_dim(space);
    Point x = from;
    for (int k = 0; k < walk_steps; ++k)
      x = geodesic_rw_step(space, x, reference_frame(space, x), eps, uniform_disk(d, rng));
    return x;
  }
  throw UnsupportedError("phi_sides_mc: no sampler on " + space_name(space));
}

bool is_flat(const Space& space) {
  return std::holds_alternative<Euclidean>(space) || std::holds_alternative<Circle>(space) ||
         std::holds_alternative<FlatTorus>(space);
}

}  // namespace

std::string to_string(TVCurve::Method m) {
  switch (m) {
    case TVCurve::Method::ExactKernel: return "exact-kernel";
    case TVCurve::Method::ExactChain: return "exact-chain";
    case TVCurve::Method::McSides: return "mc-sides";
    case TVCurve::Method::McSurvival: return "mc-survival";
  }
  return "?";
}

double tv_distance(const Eigen::VectorXd& mu1, const Eigen::VectorXd& mu2) {
  if (mu1.size() != mu2.size()) throw DomainError("tv_distance: dimension mismatch");
  require_distribution(mu1, "tv_distance");
  require_distribution(mu2, "tv_distance");
  return 0.5 * (mu1 - mu2).cwiseAbs().sum();
}

double sphere_phi_series(double t, double u) {
  if (!(t > 0.0)) throw DomainError("sphere_phi_series: t must be positive");
  // phi = sum over odd l of exp(-l(l+1)t/2) P_l(u) (P_{l-1}(0) - P_{l+1}(0)),
  // the heat-smoothed Legendre expansion of sign(x . n).
  double p_prev = 1.0, p_curr = u;  // P_{l-1}(u), P_l(u) at l = 1
  double q_prev = 1.0;              // P_{l-1}(0) at l = 1
  double sum = 0.0;
  for (long l = 1;; l += 2) {
    const double q_next = -static_cast<double>(l) / (l + 1) * q_prev;  // P_{l+1}(0)
    const double decay = std::exp(-0.5 * l * (l + 1.0) * t);
    sum += decay * p_curr * (q_prev - q_next);
    if (l * t > 1.0 && 2.0 * decay < 1e-17) break;
    // Advance P_l(u) by two orders.
    for (int k = 0; k < 2; ++k) {
      const long m = l + k;
      const double p_next = ((2.0 * m + 1.0) * u * p_curr - m * p_prev) / (m + 1.0);
      p_prev = p_curr;
      p_curr = p_next;
    }
    q_prev = q_next;
  }
  return sum;
}

double phi_exact(const Space& space, double t, const Point& x, const Point& y) {
  if (!(t > 0.0)) throw DomainError("phi_exact: t must be positive");
  const ReflectionStructure s = build_structure(space, x, y);
  if (std::holds_alternative<Euclidean>(space)) {
    const double r = distance(space, x, y);
    return 2.0 * normal_cdf(r / (2.0 * std::sqrt(t))) - 1.0;
  }
  if (const auto* c = std::get_if<CircleReflection>(&s.involution))
    return circle_phi(t, std::get<CirclePoint>(x).angle, c->center);
  if (const auto* r = std::get_if<TorusReflection>(&s.involution))
    return circle_phi(t, std::get<TorusPoint>(x).p(r->axis), r->center);
  if (std::holds_alternative<Sphere2>(space)) {
    const auto& lin = std::get<LinearReflection>(s.involution);
    return sphere_phi_series(t, lin.normal.dot(std::get<SpherePoint>(x).z));
  }
  if (std::holds_alternative<Hyperbolic2>(space))
    throw UnsupportedError("phi_exact: no closed-form kernel on Hyperbolic2");
  throw UnsupportedError("phi_exact: use phi_exact_chain on " + space_name(space));
}

double phi_exact_chain(const FiniteChain& chain, int t) {
  return tv_distance(chain_distribution(chain, chain.x1, t),
                     chain_distribution(chain, chain.x2, t));
}

TVCurve phi_curve(const FiniteChain& chain, int t_max) {
  TVCurve c;
  c.method = TVCurve::Method::ExactChain;
  Eigen::RowVectorXd a = Eigen::RowVectorXd::Zero(chain.size());
  Eigen::RowVectorXd b = a;
  a(chain.x1) = 1.0;
  b(chain.x2) = 1.0;
  for (int t = 0; t <= t_max; ++t) {
    c.t.push_back(t);
    c.value.push_back(0.5 * (a - b).cwiseAbs().sum());
    c.se.push_back(0.0);
    a = a * chain.P;
    b = b * chain.P;
  }
  return c;
}

PhiEstimate phi_sides_mc(const ReflectionStructure& s, const Point& a, const Point& b,
                         double t, std::int64_t trials, std::uint64_t seed,
                         const SidesOptions& options) {
  if (!(t > 0.0)) throw DomainError("phi_sides_mc: t must be positive");
  if (trials < 2) throw DomainError("phi_sides_mc: need at least 2 trials");
  const bool reflected = options.estimator == SidesEstimator::Reflected;
  if (reflected && distance(s.space, b, reflect(s, a)) > 1e-12)
    throw DomainError("phi_sides_mc: reflected estimator needs b = R a");
  double sum = 0.0, sum2 = 0.0;
  for (std::int64_t k = 0; k < trials; ++k) {
    CounterRng rng = seed_stream(seed, static_cast<std::uint64_t>(k));
    const Point za = sample_at(s.space, a, t, rng, options.walk_steps);
    const Side sa = side(s, za);
    double v = 0.0;
    if (reflected) {
      // Under (A1), Z from b has the law of R Z from a; R Z in X1 iff Z in X2.
      v = (sa == Side::X1 ? 1.0 : 0.0) - (sa == Side::X2 ? 1.0 : 0.0);
    } else {
      CounterRng rng_b = seed_stream(seed, static_cast<std::uint64_t>(k));
      const Point zb = sample_at(s.space, b, t, rng_b, options.walk_steps);
      v = (sa == Side::X1 ? 1.0 : 0.0) - (side(s, zb) == Side::X1 ? 1.0 : 0.0);
    }
    sum += v;
    sum2 += v * v;
  }
  const double n = static_cast<double>(trials);
  PhiEstimate e;
  e.value = sum / n;
  e.se = std::sqrt(std::max(0.0, sum2 / n - e.value * e.value) / (n - 1.0));
  e.paired = reflected;
  return e;
}

PhiEstimate phi_sides_mc(const ReflectionStructure& s, double t, std::int64_t trials,
                         std::uint64_t seed, const SidesOptions& options) {
  return phi_sides_mc(s, s.x1, s.x2, t, trials, seed, options);
}

// ---------------------------------------------------------- mirror measure --

Eigen::VectorXd DiscreteMeasurePair::mu0() const {
  Eigen::VectorXd m(mu1.size());
  for (Eigen::Index i = 0; i < mu1.size(); ++i)
    m(i) = sides[static_cast<std::size_t>(i)] == Side::X1 ? mu2(i) : mu1(i);
  return m;
}

DiscreteMeasurePair measure_pair(const FiniteChain& chain, int t) {
  return {chain_distribution(chain, chain.x1, t), chain_distribution(chain, chain.x2, t),
          chain.sides, chain.sym};
}

std::vector<PairWeight> mirror_measure(const DiscreteMeasurePair& pair) {
  const auto n = pair.mu1.size();
  if (pair.mu2.size() != n || static_cast<Eigen::Index>(pair.sides.size()) != n ||
      static_cast<Eigen::Index>(pair.sym.size()) != n)
    throw DomainError("mirror_measure: size mismatch");
  const Eigen::VectorXd m0 = pair.mu0();
  std::vector<PairWeight> w;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (m0(i) > pair.mu1(i) + 1e-12 || m0(i) > pair.mu2(i) + 1e-12)
      throw ConsistencyError("mirror_measure: mu0 exceeds mu1 or mu2 at state " +
                             std::to_string(i));
    const int ii = static_cast<int>(i);
    if (m0(i) != 0.0) w.push_back({ii, ii, m0(i)});
    const double excess = pair.mu1(i) - m0(i);
    if (excess != 0.0) w.push_back({ii, pair.sym[static_cast<std::size_t>(i)], excess});
  }
  const auto [r, c] = marginals(w, static_cast<int>(n));
  if ((r - pair.mu1).cwiseAbs().maxCoeff() > 1e-14 || (c - pair.mu2).cwiseAbs().maxCoeff() > 1e-14)
    throw ConsistencyError("mirror_measure: marginals do not reproduce mu1, mu2");
  return w;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> marginals(const std::vector<PairWeight>& w, int n) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(n), c = Eigen::VectorXd::Zero(n);
  for (const auto& pw : w) {
    r(pw.i) += pw.w;
    c(pw.j) += pw.w;
  }
  return {r, c};
}

Eigen::MatrixXd scale_to_marginals(Eigen::MatrixXd K, const Eigen::VectorXd& mu1,
                                   const Eigen::VectorXd& mu2, double tol, int max_iter) {
  for (int it = 0; it < max_iter; ++it) {
    for (Eigen::Index i = 0; i < K.rows(); ++i) {
      const double r = K.row(i).sum();
      if (r > 0.0) K.row(i) *= mu1(i) / r;
    }
    for (Eigen::Index j = 0; j < K.cols(); ++j) {
      const double c = K.col(j).sum();
      if (c > 0.0) K.col(j) *= mu2(j) / c;
    }
    const double err = (K.rowwise().sum() - mu1).cwiseAbs().maxCoeff();
    if (err < tol) break;
  }
  return K;
}

WasserResult wasser_check(const FiniteChain& chain, int s, int t, int random_couplings,
                          std::uint64_t seed, int a, int b) {
  if (s < 0 || t < 0) throw DomainError("wasser_check: s, t must be >= 0");
  if (a < 0) a = chain.x1;
  if (b < 0) b = chain.x2;
  if (b != a && b != chain.sym[static_cast<std::size_t>(a)])
    throw DomainError("wasser_check: pair must be (x, R x) or (x, x)");
  const int n = chain.size();
  const Eigen::MatrixXd Pt = chain_power(chain, t);
  const Eigen::MatrixXd Ps = chain_power(chain, s);
  const Eigen::MatrixXd Pst = Pt * Ps;
  Eigen::MatrixXd phi_s(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      phi_s(i, j) = 0.5 * (Ps.row(i) - Ps.row(j)).cwiseAbs().sum();

  WasserResult r;
  r.s = s;
  r.t = t;
  r.target = 0.5 * (Pst.row(a) - Pst.row(b)).cwiseAbs().sum();
  const DiscreteMeasurePair pair{Pt.row(a).transpose(), Pt.row(b).transpose(), chain.sides,
                                 chain.sym};
  for (const auto& pw : mirror_measure(pair)) r.mirror_value += pw.w * phi_s(pw.i, pw.j);
  r.residual = r.mirror_value - r.target;

  r.worst_random_gap = std::numeric_limits<double>::infinity();
  for (int k = 0; k < random_couplings; ++k) {
    CounterRng rng = seed_stream(seed, static_cast<std::uint64_t>(k), 7);
    std::normal_distribution<double> normal(0.0, 2.0);
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (pair.mu1(i) > 0.0 && pair.mu2(j) > 0.0) K(i, j) = std::exp(normal(rng));
    const Eigen::MatrixXd pi = scale_to_marginals(K, pair.mu1, pair.mu2);
    const double value = (pi.array() * phi_s.array()).sum();
    r.worst_random_gap = std::min(r.worst_random_gap, value - r.target);
    ++r.random_couplings;
  }
  if (random_couplings == 0) r.worst_random_gap = 0.0;
  r.pass = std::abs(r.residual) <= 1e-12 && r.worst_random_gap >= -1e-12;
  return r;
}

// -------------------------------------------------------------- verdicts --

MaximalityReport maximality_report(const TVCurve& survival, const TVCurve& phi) {
  if (survival.t != phi.t) throw DomainError("maximality_report: t grids differ");
  MaximalityReport rep;
  rep.pass = true;
  const bool exact = survival.exact() && phi.exact();
  for (std::size_t k = 0; k < phi.t.size(); ++k) {
    MaximalityRow row;
    row.t = phi.t[k];
    row.survival = survival.value[k];
    row.phi = phi.value[k];
    row.residual = row.survival - row.phi;
    const double se_s = k < survival.se.size() ? survival.se[k] : 0.0;
    const double se_p = k < phi.se.size() ? phi.se[k] : 0.0;
    row.tolerance = exact ? 1e-12 : 3.0 * std::sqrt(se_s * se_s + se_p * se_p);
    row.pass = std::abs(row.residual) <= row.tolerance;
    rep.pass = rep.pass && row.pass;
    rep.max_abs_residual = std::max(rep.max_abs_residual, std::abs(row.residual));
    rep.rows.push_back(row);
  }
  return rep;
}

TVCurve survival_curve(const Eigen::VectorXd& survival) {
  TVCurve c;
  c.method = TVCurve::Method::ExactChain;
  for (Eigen::Index t = 0; t < survival.size(); ++t) {
    c.t.push_back(static_cast<double>(t));
    c.value.push_back(survival(t));
    c.se.push_back(0.0);
  }
  return c;
}

double maximality_gap(const FiniteChain& chain, int t_max) {
  const JointLaw law = staged_joint_law(chain, mirror_stages(chain), t_max);
  const TVCurve phi = phi_curve(chain, t_max);
  double gap = 0.0;
  for (int t = 0; t <= t_max; ++t)
    gap = std::max(gap, std::abs(law.survival(t) - phi.value[static_cast<std::size_t>(t)]));
  return gap;
}

VaradhanReport varadhan_check(const Space& space, const Point& x, const Point& y,
                              const std::vector<double>& t_list) {
  const bool sphere = std::holds_alternative<Sphere2>(space);
  if (!sphere && !is_flat(space))
    throw UnsupportedError("varadhan_check: no kernel on " + space_name(space));
  if (t_list.empty()) throw DomainError("varadhan_check: empty t list");
  const double t_min = sphere ? 1e-3 : 1e-6;
  for (std::size_t k = 0; k < t_list.size(); ++k) {
    if (t_list[k] < t_min * (1.0 - 1e-12))
      throw DomainError("varadhan_check: t below the supported range");
    if (k > 0 && !(t_list[k] < t_list[k - 1]))
      throw DomainError("varadhan_check: t list must be strictly decreasing");
  }
  VaradhanReport rep;
  const double d = distance(space, x, y);
  rep.d2 = d * d;
  rep.tolerance = sphere ? 0.10 : 0.05;
  for (double t : t_list) {
    VaradhanRow row;
    row.t = t;
    row.value = -2.0 * t * log_heat_kernel(space, t, x, y);
    row.deviation = rep.d2 > 0.0 ? std::abs(row.value - rep.d2) / rep.d2 : std::abs(row.value);
    rep.rows.push_back(row);
  }
  rep.monotone = true;
  for (std::size_t k = 1; k < rep.rows.size(); ++k)
    if (rep.rows[k].deviation > rep.rows[k - 1].deviation) rep.monotone = false;
  rep.pass = rep.monotone && rep.rows.back().deviation <= rep.tolerance;
  return rep;
}

}  // namespace mirror
