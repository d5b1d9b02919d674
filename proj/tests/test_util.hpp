#pragma once

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "mirror/rng.hpp"
#include "mirror/spaces.hpp"

namespace testutil {

inline double unif(mirror::CounterRng& rng, double lo, double hi) {
  return lo + (hi - lo) * rng.uniform();
}

inline mirror::Point random_point(const mirror::Space& space, mirror::CounterRng& rng) {
  using namespace mirror;
  std::normal_distribution<double> g;
  if (const auto* e = std::get_if<Euclidean>(&space)) {
    EuclideanPoint p{Eigen::VectorXd(e->dim)};
    for (int k = 0; k < e->dim; ++k) p.x(k) = unif(rng, -3, 3);
    return p;
  }
  if (std::holds_alternative<Circle>(space)) return circle_point(rng.uniform());
  if (std::holds_alternative<FlatTorus>(space)) return torus_point(rng.uniform(), rng.uniform());
  if (std::holds_alternative<Sphere2>(space))
    return sphere_point(Eigen::Vector3d(g(rng), g(rng), g(rng)));
  if (std::holds_alternative<Hyperbolic2>(space))
    return hyperbolic_point(unif(rng, -2, 2), unif(rng, -2, 2));
  if (const auto* gs = std::get_if<GraphSpace>(&space)) {
    const int e = static_cast<int>(rng() % gs->graph->num_edges());
    return GraphPoint{e, rng.uniform()};
  }
  // Gasket: a random level-4 vertex.
  static const GasketLevelGraph v4 = gasket_vertices(4);
  return v4.vertices[rng() % v4.vertices.size()];
}

/// Tangent vector at x with Gaussian coordinates in the reference frame.
inline mirror::TangentVector random_tangent(const mirror::Space& space, const mirror::Point& x,
                                            mirror::CounterRng& rng, double scale = 1.0) {
  std::normal_distribution<double> g;
  const Eigen::MatrixXd f = mirror::reference_frame(space, x);
  Eigen::VectorXd c(f.cols());
  for (int k = 0; k < c.size(); ++k) c(k) = scale * g(rng);
  return {x, f * c};
}

inline std::vector<mirror::Space> continuous_spaces() {
  using namespace mirror;
  return {Euclidean{1}, Euclidean{3}, Circle{}, FlatTorus{}, Sphere2{}, Hyperbolic2{}};
}

/// Spaces offering exp, log and parallel transport.
inline std::vector<mirror::Space> manifolds() {
  using namespace mirror;
  return {Euclidean{1}, Euclidean{3}, Sphere2{}, Hyperbolic2{}};
}

}  // namespace testutil
