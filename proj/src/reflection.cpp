#include "mirror/reflection.hpp"

#include <cmath>
#include <numeric>

#include "mirror/geometry.hpp"

namespace mirror {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Side side_from_signed(double s) {
  if (std::abs(s) <= kHBand) return Side::H;
  return s > 0.0 ? Side::X1 : Side::X2;
}

Side swap_side(Side s) {
  if (s == Side::X1) return Side::X2;
  if (s == Side::X2) return Side::X1;
  return Side::H;
}

// Signed distance on a circle of circumference 1 to the fixed pair
// {center, center + 1/2}, positive on the half containing `reference`.
double circle_signed(double theta, double center, double reference) {
  const double s = wrap_centered(theta - center);
  const double sr = wrap_centered(reference - center);
  const double dist = std::min(std::abs(s), 0.5 - std::abs(s));
  const double sign = (s >= 0.0) == (sr >= 0.0) ? 1.0 : -1.0;
  return sign * dist;
}

double midpoint_on_circle(double u1, double u2) {
  return wrap_unit(u2 + 0.5 * wrap_centered(u1 - u2));
}

GraphReflection graph_sides(const MetricGraph& g, GraphIsometry iso,
                            const GraphPoint& x1) {
  if (!iso.is_involution())
    throw ConsistencyError("graph reflection is not an involution");
  const int nv = g.num_vertices();
  const int ne = g.num_edges();
  GraphReflection r;
  r.vertex_side.assign(static_cast<std::size_t>(nv), Side::X1);
  r.edge_side.assign(static_cast<std::size_t>(ne), Side::X1);
  // Union-find over vertices [0, nv) and edge interiors [nv, nv + ne).
  std::vector<int> parent(static_cast<std::size_t>(nv + ne));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[static_cast<std::size_t>(a)] != a)
      a = parent[static_cast<std::size_t>(a)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
    return a;
  };
  std::vector<bool> fixed(static_cast<std::size_t>(nv + ne), false);
  for (int v = 0; v < nv; ++v)
    fixed[static_cast<std::size_t>(v)] = iso.vertex_map[static_cast<std::size_t>(v)] == v;
  for (int e = 0; e < ne; ++e) {
    const auto ue = static_cast<std::size_t>(e);
    if (iso.edge_map[ue] == e) {
      if (iso.flip[ue])
        throw UnsupportedError("graph reflection fixing an edge with a flip");
      fixed[static_cast<std::size_t>(nv + e)] = true;
    }
  }
  for (int e = 0; e < ne; ++e) {
    if (fixed[static_cast<std::size_t>(nv + e)]) continue;
    const auto& edge = g.topology().edges[static_cast<std::size_t>(e)];
    for (int v : {edge.from, edge.to})
      if (!fixed[static_cast<std::size_t>(v)]) parent[static_cast<std::size_t>(find(nv + e))] = find(v);
  }
  const auto v1 = g.vertex_of(x1);
  const int root1 = find(v1 ? *v1 : nv + x1.edge);
  int root2 = -1;
  {
    const GraphPoint x2 = iso.apply(x1);
    const auto v2 = g.vertex_of(x2);
    root2 = find(v2 ? *v2 : nv + x2.edge);
  }
  if (root1 == root2) throw UnsupportedError("fixed set does not separate x1, x2");
  for (int a = 0; a < nv + ne; ++a) {
    Side s = Side::H;
    if (!fixed[static_cast<std::size_t>(a)]) {
      const int root = find(a);
      if (root == root1) s = Side::X1;
      else if (root == root2) s = Side::X2;
      else throw UnsupportedError("complement of the fixed set has extra components");
    }
    if (a < nv) r.vertex_side[static_cast<std::size_t>(a)] = s;
    else r.edge_side[static_cast<std::size_t>(a - nv)] = s;
  }
  r.iso = std::move(iso);
  return r;
}

GraphIsometry identity_iso(const MetricGraph& g) {
  GraphIsometry iso;
  iso.vertex_map.resize(static_cast<std::size_t>(g.num_vertices()));
  iso.edge_map.resize(static_cast<std::size_t>(g.num_edges()));
  std::iota(iso.vertex_map.begin(), iso.vertex_map.end(), 0);
  std::iota(iso.edge_map.begin(), iso.edge_map.end(), 0);
  iso.flip.assign(static_cast<std::size_t>(g.num_edges()), false);
  return iso;
}

void swap_vertices(GraphIsometry& iso, const MetricGraph& g, const char* a,
                   const char* b) {
  const int va = g.topology().vertex(a);
  const int vb = g.topology().vertex(b);
  iso.vertex_map[static_cast<std::size_t>(va)] = vb;
  iso.vertex_map[static_cast<std::size_t>(vb)] = va;
}

void swap_edges(GraphIsometry& iso, int a, int b, bool flip) {
  iso.edge_map[static_cast<std::size_t>(a)] = b;
  iso.edge_map[static_cast<std::size_t>(b)] = a;
  iso.flip[static_cast<std::size_t>(a)] = flip;
  iso.flip[static_cast<std::size_t>(b)] = flip;
}

}  // namespace

std::string to_string(Side s) {
  switch (s) {
    case Side::X1: return "X1";
    case Side::H: return "H";
    case Side::X2: return "X2";
  }
  return "?";
}

GraphPoint GraphIsometry::apply(const GraphPoint& x) const {
  const auto e = static_cast<std::size_t>(x.edge);
  return {edge_map.at(e), flip.at(e) ? 1.0 - x.offset : x.offset};
}

bool GraphIsometry::is_involution() const {
  for (std::size_t v = 0; v < vertex_map.size(); ++v)
    if (vertex_map[static_cast<std::size_t>(vertex_map[v])] != static_cast<int>(v)) return false;
  for (std::size_t e = 0; e < edge_map.size(); ++e) {
    const auto img = static_cast<std::size_t>(edge_map[e]);
    if (edge_map[img] != static_cast<int>(e) || flip[img] != flip[e]) return false;
  }
  return true;
}

GraphIsometry compose(const GraphIsometry& outer, const GraphIsometry& inner) {
  GraphIsometry out = inner;
  for (std::size_t v = 0; v < inner.vertex_map.size(); ++v)
    out.vertex_map[v] = outer.vertex_map[static_cast<std::size_t>(inner.vertex_map[v])];
  for (std::size_t e = 0; e < inner.edge_map.size(); ++e) {
    const auto mid = static_cast<std::size_t>(inner.edge_map[e]);
    out.edge_map[e] = outer.edge_map[mid];
    out.flip[e] = inner.flip[e] != outer.flip[mid];
  }
  return out;
}

GraphIsometry eight_reflection(const MetricGraph& g) {
  GraphIsometry iso = identity_iso(g);
  swap_vertices(iso, g, "o1", "o2");
  swap_edges(iso, 0, 2, false);
  swap_edges(iso, 1, 3, false);
  return iso;
}

GraphIsometry eight_eta(const MetricGraph& g) {
  GraphIsometry iso = identity_iso(g);
  swap_edges(iso, 2, 3, true);
  return iso;
}

GraphIsometry tree_reflection(const MetricGraph& g) {
  GraphIsometry iso = identity_iso(g);
  swap_vertices(iso, g, "p1", "p2");
  swap_vertices(iso, g, "p11", "p22");
  swap_vertices(iso, g, "p12", "p21");
  swap_edges(iso, 0, 1, false);  // p0p1 <-> p0p2
  swap_edges(iso, 3, 6, false);  // p1p11 <-> p2p22
  swap_edges(iso, 4, 5, false);  // p1p12 <-> p2p21
  return iso;
}

GraphIsometry tree_eta(const MetricGraph& g) {
  GraphIsometry iso = identity_iso(g);
  swap_vertices(iso, g, "p21", "p22");
  swap_edges(iso, 5, 6, false);
  return iso;
}

BisectorGeometry torus_bisector(double a, double b) {
  if (!(a > 0.0 && a <= 0.5 && b >= 0.0 && b <= a))
    throw DomainError("torus_bisector: need 0 < a <= 1/2 and 0 <= b <= a");
  BisectorGeometry g;
  g.a = a;
  g.b = b;
  if (b == 0.0) {
    g.kind = BisectorGeometry::Case::TwoCircles;
    g.points = {{a / 2, 0.0}, {a / 2, 1.0}, {(1 + a) / 2, 0.0}, {(1 + a) / 2, 1.0}};
    g.segments = {{0, 1}, {2, 3}};
    g.singular = false;
    return g;
  }
  g.kind = BisectorGeometry::Case::SingularNoReflection;
  const double aa = a * a;
  const double bb = b * b;
  const double left = 1.0 / (2.0 * a);
  const double right = 1.0 / (2.0 * (1.0 - a));
  g.points = {
      {left * (aa + bb - b), b - 0.5},
      {left * (aa - bb + b), 0.5},
      {left * (aa + bb - b), b + 0.5},
      {right * (-aa - bb + b + 1.0), b - 0.5},
      {right * (-aa + bb - b + 1.0), 0.5},
      {right * (-aa - bb + b + 1.0), b + 0.5},
  };
  g.segments = {{0, 1}, {1, 2}, {3, 4}, {4, 5}};
  g.singular = true;
  return g;
}

ReflectionStructure build_structure(const Space& space, const Point& x1,
                                    const Point& x2) {
  validate(space, x1);
  validate(space, x2);
  if (distance(space, x1, x2) == 0.0)
    throw DomainError("build_structure: starting points coincide");

  auto involution = std::visit(
      overloaded{
          [&](const Euclidean&) -> Involution {
            const auto& a = std::get<EuclideanPoint>(x1).x;
            const auto& b = std::get<EuclideanPoint>(x2).x;
            return HyperplaneReflection{(a - b).normalized(), 0.5 * (a + b)};
          },
          [&](const Circle&) -> Involution {
            return CircleReflection{midpoint_on_circle(
                std::get<CirclePoint>(x1).angle, std::get<CirclePoint>(x2).angle)};
          },
          [&](const FlatTorus&) -> Involution {
            const auto& p = std::get<TorusPoint>(x1).p;
            const auto& q = std::get<TorusPoint>(x2).p;
            const double dx = std::abs(wrap_centered(p(0) - q(0)));
            const double dy = std::abs(wrap_centered(p(1) - q(1)));
            if (dx > kHBand && dy > kHBand) {
              throw NoReflectionError(
                  "flat torus pair is not axis aligned: no reflection structure",
                  torus_bisector(std::max(dx, dy), std::min(dx, dy)));
            }
            const int axis = dy <= kHBand ? 0 : 1;
            return TorusReflection{axis, midpoint_on_circle(p(axis), q(axis))};
          },
          [&](const Sphere2&) -> Involution {
            const Eigen::Vector3d d =
                std::get<SpherePoint>(x1).z - std::get<SpherePoint>(x2).z;
            return LinearReflection{d.normalized(), false};
          },
          [&](const Hyperbolic2&) -> Involution {
            const Eigen::Vector3d d =
                std::get<HyperbolicPoint>(x1).z - std::get<HyperbolicPoint>(x2).z;
            return LinearReflection{d / std::sqrt(geometry::lorentz_dot(d, d)), true};
          },
          [&](const GraphSpace& gs) -> Involution {
            const MetricGraph& g = *gs.graph;
            const auto& a = std::get<GraphPoint>(x1);
            const auto& b = std::get<GraphPoint>(x2);
            GraphIsometry iso = g.topology().kind == GraphKind::Eight
                                    ? eight_reflection(g)
                                    : tree_reflection(g);
            const auto va = g.vertex_of(a);
            const bool ok =
                g.topology().kind == GraphKind::Eight
                    ? (va && ((*va == g.topology().vertex("o1") && g.same(b, g.at_vertex("o2"))) ||
                              (*va == g.topology().vertex("o2") && g.same(b, g.at_vertex("o1")))))
                    : (va && ((*va == g.topology().vertex("p11") && g.same(b, g.at_vertex("p22"))) ||
                              (*va == g.topology().vertex("p22") && g.same(b, g.at_vertex("p11")))));
            if (!ok) throw UnsupportedError("build_structure: unsupported graph pair");
            return graph_sides(g, std::move(iso), a);
          },
          [&](const Gasket&) -> Involution {
            const auto& a = std::get<GasketPoint>(x1);
            const auto& b = std::get<GasketPoint>(x2);
            const bool ok = (a == gasket_corner(1) && b == gasket_corner(2)) ||
                            (a == gasket_corner(2) && b == gasket_corner(1));
            if (!ok) throw UnsupportedError("build_structure: gasket pair must be {p1, p2}");
            return GasketReflection{};
          }},
      space);

  ReflectionStructure s{space, x1, x2, std::move(involution)};
  if (distance(space, reflect(s, x1), x2) > 1e-12)
    throw ConsistencyError("build_structure: R(x1) != x2");
  if (side(s, x1) != Side::X1 || side(s, x2) != Side::X2)
    throw ConsistencyError("build_structure: starting points not separated");
  return s;
}

Point reflect(const ReflectionStructure& s, const Point& x) {
  return std::visit(
      overloaded{
          [&](const HyperplaneReflection& r) -> Point {
            const auto& z = std::get<EuclideanPoint>(x).x;
            return EuclideanPoint{z - 2.0 * (z - r.origin).dot(r.normal) * r.normal};
          },
          [&](const CircleReflection& r) -> Point {
            return circle_point(2.0 * r.center - std::get<CirclePoint>(x).angle);
          },
          [&](const TorusReflection& r) -> Point {
            TorusPoint t = std::get<TorusPoint>(x);
            t.p(r.axis) = wrap_unit(2.0 * r.center - t.p(r.axis));
            return t;
          },
          [&](const LinearReflection& r) -> Point {
            if (r.lorentz) {
              const auto& z = std::get<HyperbolicPoint>(x).z;
              return HyperbolicPoint{geometry::hyperbolic_project(
                  z - 2.0 * geometry::lorentz_dot(r.normal, z) * r.normal)};
            }
            const auto& z = std::get<SpherePoint>(x).z;
            const Eigen::Vector3d w = z - 2.0 * r.normal.dot(z) * r.normal;
            return SpherePoint{w / w.norm()};
          },
          [&](const GraphReflection& r) -> Point {
            return r.iso.apply(std::get<GraphPoint>(x));
          },
          [&](const GasketReflection&) -> Point {
            const auto& g = std::get<GasketPoint>(x);
            const std::int64_t n = std::int64_t{1} << g.level;
            return gasket_point(n - g.i - g.j, g.j, g.level);
          }},
      s.involution);
}

Side side(const ReflectionStructure& s, const Point& x) {
  return std::visit(
      overloaded{
          [&](const GraphReflection& r) {
            const auto& p = std::get<GraphPoint>(x);
            const auto& g = *std::get<GraphSpace>(s.space).graph;
            if (const auto v = g.vertex_of(p))
              return r.vertex_side[static_cast<std::size_t>(*v)];
            return r.edge_side[static_cast<std::size_t>(p.edge)];
          },
          [&](const GasketReflection&) {
            const auto& g = std::get<GasketPoint>(x);
            const std::int64_t k = (std::int64_t{1} << g.level) - g.i - g.j;
            Side sd = k > g.i ? Side::X1 : (k == g.i ? Side::H : Side::X2);
            // Orientation follows x1.
            if (std::get<GasketPoint>(s.x1) == gasket_corner(2)) sd = swap_side(sd);
            return sd;
          },
          [&](const auto&) { return side_from_signed(signed_distance_to_h(s, x)); }},
      s.involution);
}

double signed_distance_to_h(const ReflectionStructure& s, const Point& x) {
  return std::visit(
      overloaded{
          [&](const HyperplaneReflection& r) {
            return (std::get<EuclideanPoint>(x).x - r.origin).dot(r.normal);
          },
          [&](const CircleReflection& r) {
            return circle_signed(std::get<CirclePoint>(x).angle, r.center,
                                 std::get<CirclePoint>(s.x1).angle);
          },
          [&](const TorusReflection& r) {
            return circle_signed(std::get<TorusPoint>(x).p(r.axis), r.center,
                                 std::get<TorusPoint>(s.x1).p(r.axis));
          },
          [&](const LinearReflection& r) {
            if (r.lorentz)
              return std::asinh(
                  geometry::lorentz_dot(r.normal, std::get<HyperbolicPoint>(x).z));
            return std::asin(std::clamp(r.normal.dot(std::get<SpherePoint>(x).z), -1.0, 1.0));
          },
          [&](const auto&) -> double {
            throw UnsupportedError("signed_distance_to_h: combinatorial space");
          }},
      s.involution);
}

}  // namespace mirror
