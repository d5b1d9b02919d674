#include <cmath>

#include "mirror/couplings.hpp"

namespace mirror {

double geodesic_ball_step_density(const Space& space, double rho, double r) {
  if (!(rho > 0.0)) throw DomainError("geodesic_ball_step_density: rho must be positive");
  if (r < 0.0) throw DomainError("geodesic_ball_step_density: negative distance");
  if (r > rho) return 0.0;
  if (const auto* e = std::get_if<Euclidean>(&space)) {
    const double d = e->dim;
    const double ball = std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d + 1.0) * std::pow(rho, d);
    return 1.0 / ball;
  }
  const double base = 1.0 / (M_PI * rho * rho);
  // Area element of exp_x in polar coordinates: sin r (sphere), sinh r
  // (hyperbolic) against r in the tangent plane.
  if (std::holds_alternative<Sphere2>(space)) return r == 0.0 ? base : base * r / std::sin(r);
  if (std::holds_alternative<Hyperbolic2>(space)) return r == 0.0 ? base : base * r / std::sinh(r);
  throw UnsupportedError("geodesic_ball_step_density: not offered on " + space_name(space));
}

CoupledTrajectory kc_run(const Space& space, const Point& x1, const Point& x2,
                         double eps, std::int64_t n_steps, CounterRng& rng,
                         const KcOptions& options) {
  if (!std::holds_alternative<Euclidean>(space) && !std::holds_alternative<Sphere2>(space) &&
      !std::holds_alternative<Hyperbolic2>(space))
    throw UnsupportedError("kc_run: needs Euclidean, Sphere2 or Hyperbolic2, got " +
                           space_name(space));
  if (!(eps > 0.0)) throw DomainError("kc_run: eps must be positive");
  if (n_steps < 0) throw DomainError("kc_run: n_steps must be >= 0");
  if (options.poisson_lambda && !(*options.poisson_lambda > 0.0))
    throw DomainError("kc_run: Poisson rate must be positive");
  validate(space, x1);
  validate(space, x2);
  if (distance(space, x1, x2) == 0.0) throw DomainError("kc_run: x1 == x2");

  const int d = manifold_dim(space);
  const double rho = eps * std::sqrt(d + 2.0);
  const ReflectionStructure rs = build_structure(space, x1, x2);

  CoupledTrajectory out;
  out.max_mirror_deviation = 0.0;
  out.times.reserve(static_cast<std::size_t>(n_steps) + 1);
  out.z1.reserve(static_cast<std::size_t>(n_steps) + 1);
  out.z2.reserve(static_cast<std::size_t>(n_steps) + 1);
  Point a = x1;
  Point b = x2;
  double t = 0.0;
  out.times.push_back(t);
  out.z1.push_back(a);
  out.z2.push_back(b);
  out.mirror_flag.push_back(true);

  for (std::int64_t n = 1; n <= n_steps; ++n) {
    if (options.poisson_lambda)
      t += -std::log1p(-rng.uniform()) / *options.poisson_lambda;
    else
      t = static_cast<double>(n) * eps * eps;
    const Eigen::VectorXd xi = options.noise ? options.noise(n, rng) : uniform_disk(d, rng);

    if (out.T != kNever) {
      a = geodesic_rw_step(space, a, reference_frame(space, a), eps, xi);
      b = a;
    } else {
      MirrorMapFrame f;
      try {
        f = mirror_frame(space, a, b);
      } catch (const NonUniqueGeodesicError& e) {
        throw CutLocusError(std::string("kc_run: ") + e.what() + " at step " + std::to_string(n), n);
      }
      const Point a_next = geodesic_rw_step(space, a, f.phi1, eps, xi);
      Point b_next = geodesic_rw_step(space, b, f.phi2, eps, xi);
      bool merge = false;
      if (options.merge == MergeRule::ReflectionMaximal) {
        const double g = geodesic_ball_step_density(space, rho, distance(space, b, a_next));
        if (g > 0.0) {
          const double f1 = geodesic_ball_step_density(space, rho, distance(space, a, a_next));
          merge = rng.uniform() * f1 < g;
        }
      } else {
        merge = distance(space, a_next, b_next) < rho;
      }
      a = a_next;
      if (merge) {
        b = a_next;
        out.T = t;
      } else {
        b = b_next;
        out.max_mirror_deviation =
            std::max(out.max_mirror_deviation, distance(space, b, reflect(rs, a)));
      }
    }
    out.times.push_back(t);
    out.z1.push_back(a);
    out.z2.push_back(b);
    out.mirror_flag.push_back(out.T == kNever);
  }
  return out;
}

}  // namespace mirror
