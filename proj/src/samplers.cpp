#include <cmath>
#include <random>

#include "mirror/diffusion.hpp"
#include "mirror/geometry.hpp"

namespace mirror {

Point bm_increment(const Space& space, const Point& x, double dt, CounterRng& rng) {
  if (!(dt > 0.0)) throw DomainError("bm_increment: dt must be positive");
  std::normal_distribution<double> normal(0.0, std::sqrt(dt));
  if (const auto* e = std::get_if<Euclidean>(&space)) {
    EuclideanPoint p = std::get<EuclideanPoint>(x);
    for (int k = 0; k < e->dim; ++k) p.x(k) += normal(rng);
    return p;
  }
  if (std::holds_alternative<Circle>(space))
    return circle_point(std::get<CirclePoint>(x).angle + normal(rng));
  if (std::holds_alternative<FlatTorus>(space)) {
    const auto& p = std::get<TorusPoint>(x).p;
    const double a = normal(rng);
    const double b = normal(rng);
    return torus_point(p(0) + a, p(1) + b);
  }
  throw UnsupportedError("bm_increment: use geodesic_rw_step on " + space_name(space));
}

Eigen::VectorXd uniform_disk(int d, CounterRng& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(d);
  double n2 = 0.0;
  do {
    for (int k = 0; k < d; ++k) v(k) = normal(rng);
    n2 = v.squaredNorm();
  } while (n2 == 0.0);
  const double radius = std::pow(rng.uniform(), 1.0 / d);
  return v * (radius / std::sqrt(n2));
}

Point geodesic_rw_step(const Space& space, const Point& x,
                       const Eigen::MatrixXd& frame, double eps,
                       const Eigen::VectorXd& xi) {
  if (!(eps > 0.0)) throw DomainError("geodesic_rw_step: eps must be positive");
  if (xi.norm() > 1.0 + 1e-12) throw DomainError("geodesic_rw_step: |xi| > 1");
  const int d = manifold_dim(space);
  if (frame.cols() != d || xi.size() != d)
    throw DomainError("geodesic_rw_step: frame / noise dimension mismatch");
  Eigen::MatrixXd gram(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      gram(a, b) = std::holds_alternative<Hyperbolic2>(space)
                       ? geometry::lorentz_dot(frame.col(a), frame.col(b))
                       : frame.col(a).dot(frame.col(b));
  if ((gram - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-10)
    throw DomainError("geodesic_rw_step: frame is not orthonormal");
  const double scale = eps * std::sqrt(static_cast<double>(d) + 2.0);
  return exp_map(space, x, TangentVector{x, scale * (frame * xi)});
}

std::int64_t poisson_clock(double lambda, double t, CounterRng& rng) {
  if (!(lambda > 0.0)) throw DomainError("poisson_clock: rate must be positive");
  if (t < 0.0) throw DomainError("poisson_clock: t must be non-negative");
  if (t == 0.0) return 0;
  std::poisson_distribution<std::int64_t> dist(lambda * t);
  return dist(rng);
}

double bridge_crossing_prob(double d1, double d2, double dt) {
  if (d1 < 0.0 || d2 < 0.0) throw DomainError("bridge_crossing_prob: negative distance");
  if (!(dt > 0.0)) throw DomainError("bridge_crossing_prob: dt must be positive");
  return std::exp(-2.0 * d1 * d2 / dt);
}

Trajectory sample_brownian(const Space& space, const Point& x0, double dt,
                           int n_steps, std::uint64_t seed, std::uint64_t stream) {
  Trajectory tr;
  tr.kind = Trajectory::Kind::Brownian;
  tr.seed = seed;
  tr.stream = stream;
  tr.times.reserve(static_cast<std::size_t>(n_steps) + 1);
  tr.positions.reserve(static_cast<std::size_t>(n_steps) + 1);
  CounterRng rng = seed_stream(seed, stream);
  Point x = x0;
  tr.times.push_back(0.0);
  tr.positions.push_back(x);
  for (int k = 1; k <= n_steps; ++k) {
    x = bm_increment(space, x, dt, rng);
    tr.times.push_back(k * dt);
    tr.positions.push_back(x);
  }
  return tr;
}

Trajectory sample_geodesic_walk(const Space& space, const Point& x0, double eps,
                                int n_steps, std::uint64_t seed,
                                std::uint64_t stream) {
  Trajectory tr;
  tr.kind = Trajectory::Kind::GeodesicWalk;
  tr.seed = seed;
  tr.stream = stream;
  CounterRng rng = seed_stream(seed, stream);
  const int d = manifold_dim(space);
  Point x = x0;
  tr.times.push_back(0.0);
  tr.positions.push_back(x);
  for (int k = 1; k <= n_steps; ++k) {
    x = geodesic_rw_step(space, x, reference_frame(space, x), eps, uniform_disk(d, rng));
    tr.times.push_back(k * eps * eps);
    tr.positions.push_back(x);
  }
  return tr;
}

}  // namespace mirror
