#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "mirror/errors.hpp"

namespace mirror {

// ------------------------------------------------------------------ points --

struct EuclideanPoint {
  Eigen::VectorXd x;
};

/// Position on the circle of circumference 1, stored in [0, 1).
struct CirclePoint {
  double angle = 0.0;
};

/// Flat torus R^2 / Z^2, coordinates stored in [0, 1)^2.
struct TorusPoint {
  Eigen::Vector2d p = Eigen::Vector2d::Zero();
};

struct SpherePoint {
  Eigen::Vector3d z = Eigen::Vector3d::UnitX();
};

/// Upper sheet of -z0^2 + z1^2 + z2^2 = -1.
struct HyperbolicPoint {
  Eigen::Vector3d z = Eigen::Vector3d::UnitX();
};

/// Point on edge `edge` of a metric graph at fractional position `offset`
/// measured from the edge's first endpoint.
struct GraphPoint {
  int edge = 0;
  double offset = 0.0;
};

/// Dyadic gasket vertex. With p1 = (0,0), p2 = (1,0), p3 = (0,1) as an affine
/// frame, the point is p1 + (i (p2 - p1) + j (p3 - p1)) / 2^level. Always kept
/// in lowest terms.
struct GasketPoint {
  std::int64_t i = 0;
  std::int64_t j = 0;
  int level = 0;

  friend bool operator==(const GasketPoint&, const GasketPoint&) = default;
};

using Point = std::variant<EuclideanPoint, CirclePoint, TorusPoint,
                           SpherePoint, HyperbolicPoint, GraphPoint,
                           GasketPoint>;

EuclideanPoint euclidean_point(std::initializer_list<double> coords);
CirclePoint circle_point(double angle);
TorusPoint torus_point(double p, double q);
/// Normalizes v onto the unit sphere.
SpherePoint sphere_point(const Eigen::Vector3d& v);
/// Lifts (z1, z2) to the hyperboloid.
HyperbolicPoint hyperbolic_point(double z1, double z2);
GasketPoint gasket_point(std::int64_t i, std::int64_t j, int level);

/// Wraps to [0, 1).
double wrap_unit(double a);
/// Wraps to [-1/2, 1/2).
double wrap_centered(double a);

// -------------------------------------------------------------- topologies --

enum class GraphKind { Eight, StarTree };

struct GraphEdge {
  int from = 0;
  int to = 0;
  double length = 1.0;
};

struct GraphTopology {
  GraphKind kind = GraphKind::Eight;
  std::vector<std::string> vertices;
  std::vector<GraphEdge> edges;

  int vertex(const std::string& name) const;
};

/// Two circles of circumference 1 glued at the points 1/2. Vertices "o1"
/// (0 in Y1), "o2" (0 in Y2) and "g" (glue); each circle is two half-edges
/// of length 1/2: Y_i upper half (o_i -> g) and lower half (g -> o_i).
GraphTopology eight_topology();

/// Star tree: center p0, branch vertices p1..p3 at distance 1, leaves
/// p11, p12, p21, p22, p31, p32. Nine unit edges oriented away from p0.
GraphTopology star_tree_topology();

/// Immutable metric graph with precomputed vertex distances.
class MetricGraph {
 public:
  explicit MetricGraph(GraphTopology topology);

  const GraphTopology& topology() const { return topology_; }
  int num_vertices() const { return static_cast<int>(topology_.vertices.size()); }
  int num_edges() const { return static_cast<int>(topology_.edges.size()); }

  double distance(const GraphPoint& x, const GraphPoint& y) const;
  double vertex_distance(int a, int b) const { return vdist_(a, b); }

  /// Point sitting on vertex v (via its first incident edge).
  GraphPoint at_vertex(int v) const;
  GraphPoint at_vertex(const std::string& name) const;
  /// Vertex under x, if x is an edge endpoint.
  std::optional<int> vertex_of(const GraphPoint& x) const;
  /// Same location (vertex points compare by vertex).
  bool same(const GraphPoint& x, const GraphPoint& y, double tol = 0.0) const;

 private:
  GraphTopology topology_;
  Eigen::MatrixXd vdist_;
};

/// Eight-space point on circle Y_circle (1 or 2) at position u in [0,1).
GraphPoint eight_point(int circle, double u);
/// Inverse of eight_point: (circle, u). The glue point reports circle 1.
std::pair<int, double> eight_position(const GraphPoint& x);

// ------------------------------------------------------------------ spaces --

struct Euclidean {
  int dim = 1;
};
struct Circle {};
struct FlatTorus {};
struct Sphere2 {};
struct Hyperbolic2 {};
struct Gasket {};
struct GraphSpace {
  std::shared_ptr<const MetricGraph> graph;
};

using Space = std::variant<Euclidean, Circle, FlatTorus, Sphere2, Hyperbolic2,
                           GraphSpace, Gasket>;

std::string space_name(const Space& space);
/// Manifold dimension (Euclidean dim, 1 for circle, 2 for surfaces).
int manifold_dim(const Space& space);
/// Throws DomainError when the point does not belong to the space or
/// violates its payload invariant.
void validate(const Space& space, const Point& x);

/// Metric handle for a graph topology.
GraphSpace graph_space(GraphTopology topology);

// ------------------------------------------------------------ metric, maps --

double distance(const Space& space, const Point& x, const Point& y);

/// Tangent vector in the chart (Euclidean) or ambient embedding
/// (Sphere2 / Hyperbolic2) of its base point.
struct TangentVector {
  Point base;
  Eigen::VectorXd v;
};

/// Norm in the Riemannian metric of the base point.
double tangent_norm(const Space& space, const TangentVector& v);
double tangent_dot(const Space& space, const TangentVector& a,
                   const TangentVector& b);

Point exp_map(const Space& space, const Point& x, const TangentVector& v);
TangentVector log_map(const Space& space, const Point& x, const Point& y);
TangentVector parallel_transport(const Space& space, const Point& x,
                                 const Point& y, const TangentVector& v);

/// Orthonormal frame at x obtained by Gram-Schmidt from the ambient basis,
/// dropping the basis vector most aligned with the normal. Columns are
/// tangent vectors in the same coordinates as TangentVector::v.
Eigen::MatrixXd reference_frame(const Space& space, const Point& x);

// ------------------------------------------------------------------ gasket --

/// V_n with its nearest-neighbour edges (each of length 2^-n).
struct GasketLevelGraph {
  int level = 0;
  std::vector<GasketPoint> vertices;
  std::vector<std::pair<int, int>> edges;
  std::unordered_map<std::uint64_t, int> index;

  /// Index of p in vertices, if present.
  std::optional<int> find(const GasketPoint& p) const;
};

inline constexpr int kMaxGasketLevel = 12;

GasketPoint gasket_corner(int k);  // k in {1,2,3}
/// Contraction toward p_k: x -> (x + p_k) / 2.
GasketPoint gasket_contract(int k, const GasketPoint& x);
/// Psi_{w[0]} o Psi_{w[1]} o ... applied to x.
GasketPoint gasket_contract(const std::vector<int>& word, const GasketPoint& x);

GasketLevelGraph gasket_vertices(int n);

/// Exact dyadic length num / 2^exp in lowest terms.
struct Dyadic {
  std::int64_t num = 0;
  int exp = 0;

  double value() const;
  friend bool operator==(const Dyadic&, const Dyadic&) = default;
};
Dyadic make_dyadic(std::int64_t num, int exp);

/// Shortest-path distance between gasket vertices, computed by descending
/// the cell hierarchy. Throws UnsupportedError for points outside V_n.
Dyadic gasket_distance(const GasketPoint& x, const GasketPoint& y);

/// Planar position with p1 = (0,0), p2 = (1,0), p3 = (1/2, sqrt(3)/2).
Eigen::Vector2d gasket_planar(const GasketPoint& x);

/// Whether x lies in V_n for n = max(level, x.level).
bool is_gasket_vertex(const GasketPoint& x);

}  // namespace mirror
