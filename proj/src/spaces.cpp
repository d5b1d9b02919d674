#include "mirror/spaces.hpp"

#include <cmath>
#include <sstream>

#include "mirror/geometry.hpp"

namespace mirror {

namespace {

template <typename T>
const T& as(const Point& p, const char* what) {
  if (const T* q = std::get_if<T>(&p)) return *q;
  throw DomainError(std::string(what) + ": point does not belong to the space");
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double circle_gap(double a, double b) { return std::abs(wrap_centered(a - b)); }

}  // namespace

double wrap_unit(double a) {
  double r = a - std::floor(a);
  if (r >= 1.0) r = 0.0;
  return r;
}

double wrap_centered(double a) { return wrap_unit(a + 0.5) - 0.5; }

EuclideanPoint euclidean_point(std::initializer_list<double> coords) {
  EuclideanPoint p;
  p.x.resize(static_cast<Eigen::Index>(coords.size()));
  Eigen::Index k = 0;
  for (double c : coords) p.x(k++) = c;
  return p;
}

CirclePoint circle_point(double angle) { return {wrap_unit(angle)}; }

TorusPoint torus_point(double p, double q) {
  return {Eigen::Vector2d(wrap_unit(p), wrap_unit(q))};
}

SpherePoint sphere_point(const Eigen::Vector3d& v) {
  const double n = v.norm();
  if (n == 0.0) throw DomainError("sphere_point: zero vector");
  return {v / n};
}

HyperbolicPoint hyperbolic_point(double z1, double z2) {
  return {geometry::hyperbolic_project(Eigen::Vector3d(0.0, z1, z2))};
}

std::string space_name(const Space& space) {
  return std::visit(overloaded{
                        [](const Euclidean& e) {
                          return "euclidean" + std::to_string(e.dim);
                        },
                        [](const Circle&) { return std::string("circle"); },
                        [](const FlatTorus&) { return std::string("torus"); },
                        [](const Sphere2&) { return std::string("sphere"); },
                        [](const Hyperbolic2&) {
                          return std::string("hyperbolic");
                        },
                        [](const GraphSpace& g) {
                          return std::string(g.graph->topology().kind ==
                                                     GraphKind::Eight
                                                 ? "eight"
                                                 : "tree");
                        },
                        [](const Gasket&) { return std::string("gasket"); }},
                    space);
}

int manifold_dim(const Space& space) {
  return std::visit(overloaded{[](const Euclidean& e) { return e.dim; },
                               [](const Circle&) { return 1; },
                               [](const FlatTorus&) { return 2; },
                               [](const Sphere2&) { return 2; },
                               [](const Hyperbolic2&) { return 2; },
                               [](const GraphSpace&) { return 1; },
                               [](const Gasket&) { return 2; }},
                    space);
}

void validate(const Space& space, const Point& x) {
  std::visit(
      overloaded{
          [&](const Euclidean& e) {
            if (as<EuclideanPoint>(x, "validate").x.size() != e.dim)
              throw DomainError("validate: Euclidean dimension mismatch");
          },
          [&](const Circle&) {
            const double a = as<CirclePoint>(x, "validate").angle;
            if (!(a >= 0.0 && a < 1.0))
              throw DomainError("validate: circle angle outside [0,1)");
          },
          [&](const FlatTorus&) {
            const auto& p = as<TorusPoint>(x, "validate").p;
            if (!(p.minCoeff() >= 0.0 && p.maxCoeff() < 1.0))
              throw DomainError("validate: torus point outside [0,1)^2");
          },
          [&](const Sphere2&) {
            if (std::abs(as<SpherePoint>(x, "validate").z.norm() - 1.0) > 1e-12)
              throw DomainError("validate: sphere point off the unit sphere");
          },
          [&](const Hyperbolic2&) {
            const auto& z = as<HyperbolicPoint>(x, "validate").z;
            const double c = geometry::lorentz_dot(z, z) + 1.0;
            if (z(0) <= 0.0 || std::abs(c) > 1e-12 * std::max(1.0, z(0) * z(0)))
              throw DomainError("validate: point off the hyperboloid");
          },
          [&](const GraphSpace& g) {
            const auto& p = as<GraphPoint>(x, "validate");
            if (p.edge < 0 || p.edge >= g.graph->num_edges())
              throw DomainError("validate: unknown graph edge");
            if (!(p.offset >= 0.0 && p.offset <= 1.0))
              throw DomainError("validate: graph offset outside [0,1]");
          },
          [&](const Gasket&) {
            if (!is_gasket_vertex(as<GasketPoint>(x, "validate")))
              throw DomainError("validate: not a gasket vertex");
          }},
      space);
}

double distance(const Space& space, const Point& x, const Point& y) {
  return std::visit(
      overloaded{
          [&](const Euclidean&) {
            const auto& a = as<EuclideanPoint>(x, "distance").x;
            const auto& b = as<EuclideanPoint>(y, "distance").x;
            if (a.size() != b.size())
              throw DomainError("distance: Euclidean dimension mismatch");
            return (a - b).norm();
          },
          [&](const Circle&) {
            return circle_gap(as<CirclePoint>(x, "distance").angle,
                              as<CirclePoint>(y, "distance").angle);
          },
          [&](const FlatTorus&) {
            // Scan the 3x3 block of lattice translates.
            const Eigen::Vector2d d = as<TorusPoint>(x, "distance").p -
                                      as<TorusPoint>(y, "distance").p;
            double best = std::numeric_limits<double>::infinity();
            for (int a = -1; a <= 1; ++a)
              for (int b = -1; b <= 1; ++b)
                best = std::min(best, std::hypot(d(0) + a, d(1) + b));
            return best;
          },
          [&](const Sphere2&) {
            return geometry::sphere_distance(as<SpherePoint>(x, "distance").z,
                                             as<SpherePoint>(y, "distance").z);
          },
          [&](const Hyperbolic2&) {
            return geometry::hyperbolic_distance(
                as<HyperbolicPoint>(x, "distance").z,
                as<HyperbolicPoint>(y, "distance").z);
          },
          [&](const GraphSpace& g) {
            return g.graph->distance(as<GraphPoint>(x, "distance"),
                                     as<GraphPoint>(y, "distance"));
          },
          [&](const Gasket&) {
            return gasket_distance(as<GasketPoint>(x, "distance"),
                                   as<GasketPoint>(y, "distance"))
                .value();
          }},
      space);
}

double tangent_dot(const Space& space, const TangentVector& a,
                   const TangentVector& b) {
  if (std::holds_alternative<Hyperbolic2>(space))
    return geometry::lorentz_dot(a.v, b.v);
  return a.v.dot(b.v);
}

double tangent_norm(const Space& space, const TangentVector& v) {
  return std::sqrt(std::max(0.0, tangent_dot(space, v, v)));
}

Point exp_map(const Space& space, const Point& x, const TangentVector& v) {
  if (std::holds_alternative<Euclidean>(space)) {
    return EuclideanPoint{as<EuclideanPoint>(x, "exp_map").x + v.v};
  }
  if (std::holds_alternative<Sphere2>(space)) {
    const Eigen::Vector3d w = v.v;
    return SpherePoint{geometry::sphere_exp(as<SpherePoint>(x, "exp_map").z, w)};
  }
  if (std::holds_alternative<Hyperbolic2>(space)) {
    const Eigen::Vector3d w = v.v;
    return HyperbolicPoint{
        geometry::hyperbolic_exp(as<HyperbolicPoint>(x, "exp_map").z, w)};
  }
  throw UnsupportedError("exp_map: not offered on " + space_name(space));
}

TangentVector log_map(const Space& space, const Point& x, const Point& y) {
  if (std::holds_alternative<Euclidean>(space)) {
    return {x, as<EuclideanPoint>(y, "log_map").x -
                   as<EuclideanPoint>(x, "log_map").x};
  }
  if (std::holds_alternative<Sphere2>(space)) {
    return {x, geometry::sphere_log(as<SpherePoint>(x, "log_map").z,
                                    as<SpherePoint>(y, "log_map").z)};
  }
  if (std::holds_alternative<Hyperbolic2>(space)) {
    return {x, geometry::hyperbolic_log(as<HyperbolicPoint>(x, "log_map").z,
                                        as<HyperbolicPoint>(y, "log_map").z)};
  }
  throw UnsupportedError("log_map: not offered on " + space_name(space));
}

TangentVector parallel_transport(const Space& space, const Point& x,
                                 const Point& y, const TangentVector& v) {
  if (std::holds_alternative<Euclidean>(space)) {
    return {y, v.v};
  }
  if (std::holds_alternative<Sphere2>(space)) {
    const Eigen::Vector3d w = v.v;
    return {y, geometry::sphere_transport(as<SpherePoint>(x, "transport").z,
                                          as<SpherePoint>(y, "transport").z, w)};
  }
  if (std::holds_alternative<Hyperbolic2>(space)) {
    const Eigen::Vector3d w = v.v;
    return {y, geometry::hyperbolic_transport(
                   as<HyperbolicPoint>(x, "transport").z,
                   as<HyperbolicPoint>(y, "transport").z, w)};
  }
  throw UnsupportedError("parallel_transport: not offered on " +
                         space_name(space));
}

Eigen::MatrixXd reference_frame(const Space& space, const Point& x) {
  if (const auto* e = std::get_if<Euclidean>(&space)) {
    return Eigen::MatrixXd::Identity(e->dim, e->dim);
  }
  if (std::holds_alternative<Sphere2>(space)) {
    const Eigen::Vector3d z = as<SpherePoint>(x, "reference_frame").z;
    Eigen::Index drop;
    z.cwiseAbs().maxCoeff(&drop);
    Eigen::MatrixXd frame(3, 2);
    int col = 0;
    for (Eigen::Index k = 0; k < 3; ++k) {
      if (k == drop) continue;
      Eigen::Vector3d v = Eigen::Vector3d::Unit(k);
      v -= v.dot(z) * z;
      for (int c = 0; c < col; ++c) v -= v.dot(frame.col(c)) * frame.col(c);
      frame.col(col++) = v.normalized();
    }
    return frame;
  }
  if (std::holds_alternative<Hyperbolic2>(space)) {
    const Eigen::Vector3d z = as<HyperbolicPoint>(x, "reference_frame").z;
    Eigen::MatrixXd frame(3, 2);
    for (int col = 0; col < 2; ++col) {
      Eigen::Vector3d v = Eigen::Vector3d::Unit(col + 1);
      v += geometry::lorentz_dot(z, v) * z;
      for (int c = 0; c < col; ++c) {
        const Eigen::Vector3d f = frame.col(c);
        v -= geometry::lorentz_dot(v, f) * f;
      }
      frame.col(col) = v / std::sqrt(geometry::lorentz_dot(v, v));
    }
    return frame;
  }
  throw UnsupportedError("reference_frame: not offered on " + space_name(space));
}

GraphSpace graph_space(GraphTopology topology) {
  return {std::make_shared<const MetricGraph>(std::move(topology))};
}

}  // namespace mirror
