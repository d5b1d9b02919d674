#include <algorithm>
#include <cmath>
#include <limits>

#include "mirror/spaces.hpp"

namespace mirror {

int GraphTopology::vertex(const std::string& name) const {
  const auto it = std::find(vertices.begin(), vertices.end(), name);
  if (it == vertices.end()) throw DomainError("unknown graph vertex " + name);
  return static_cast<int>(it - vertices.begin());
}

GraphTopology eight_topology() {
  GraphTopology t;
  t.kind = GraphKind::Eight;
  t.vertices = {"o1", "o2", "g"};
  // Edge order: Y1 upper, Y1 lower, Y2 upper, Y2 lower.
  t.edges = {{0, 2, 0.5}, {2, 0, 0.5}, {1, 2, 0.5}, {2, 1, 0.5}};
  return t;
}

GraphTopology star_tree_topology() {
  GraphTopology t;
  t.kind = GraphKind::StarTree;
  t.vertices = {"p0", "p1", "p2", "p3", "p11", "p12", "p21", "p22", "p31", "p32"};
  t.edges = {{0, 1, 1.0}, {0, 2, 1.0}, {0, 3, 1.0},
             {1, 4, 1.0}, {1, 5, 1.0}, {2, 6, 1.0},
             {2, 7, 1.0}, {3, 8, 1.0}, {3, 9, 1.0}};
  return t;
}

MetricGraph::MetricGraph(GraphTopology topology)
    : topology_(std::move(topology)) {
  const int n = num_vertices();
  const double inf = std::numeric_limits<double>::infinity();
  vdist_ = Eigen::MatrixXd::Constant(n, n, inf);
  for (int v = 0; v < n; ++v) vdist_(v, v) = 0.0;
  for (const auto& e : topology_.edges) {
    if (e.length <= 0.0) throw DomainError("MetricGraph: non-positive edge length");
    vdist_(e.from, e.to) = std::min(vdist_(e.from, e.to), e.length);
    vdist_(e.to, e.from) = vdist_(e.from, e.to);
  }
  for (int k = 0; k < n; ++k)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        vdist_(a, b) = std::min(vdist_(a, b), vdist_(a, k) + vdist_(k, b));
}

double MetricGraph::distance(const GraphPoint& x, const GraphPoint& y) const {
  const auto& ex = topology_.edges.at(static_cast<std::size_t>(x.edge));
  const auto& ey = topology_.edges.at(static_cast<std::size_t>(y.edge));
  double best = std::numeric_limits<double>::infinity();
  if (x.edge == y.edge) best = std::abs(x.offset - y.offset) * ex.length;
  const std::array<std::pair<int, double>, 2> from_x = {
      {{ex.from, x.offset * ex.length}, {ex.to, (1.0 - x.offset) * ex.length}}};
  const std::array<std::pair<int, double>, 2> from_y = {
      {{ey.from, y.offset * ey.length}, {ey.to, (1.0 - y.offset) * ey.length}}};
  for (const auto& [a, da] : from_x)
    for (const auto& [b, db] : from_y)
      best = std::min(best, da + vdist_(a, b) + db);
  return best;
}

GraphPoint MetricGraph::at_vertex(int v) const {
  for (int e = 0; e < num_edges(); ++e) {
    const auto& edge = topology_.edges[static_cast<std::size_t>(e)];
    if (edge.from == v) return {e, 0.0};
    if (edge.to == v) return {e, 1.0};
  }
  throw DomainError("MetricGraph::at_vertex: isolated vertex");
}

GraphPoint MetricGraph::at_vertex(const std::string& name) const {
  return at_vertex(topology_.vertex(name));
}

std::optional<int> MetricGraph::vertex_of(const GraphPoint& x) const {
  const auto& e = topology_.edges.at(static_cast<std::size_t>(x.edge));
  if (x.offset == 0.0) return e.from;
  if (x.offset == 1.0) return e.to;
  return std::nullopt;
}

bool MetricGraph::same(const GraphPoint& x, const GraphPoint& y,
                       double tol) const {
  if (tol > 0.0) return distance(x, y) <= tol;
  const auto vx = vertex_of(x);
  const auto vy = vertex_of(y);
  if (vx || vy) return vx == vy;
  return x.edge == y.edge && x.offset == y.offset;
}

GraphPoint eight_point(int circle, double u) {
  if (circle != 1 && circle != 2)
    throw DomainError("eight_point: circle must be 1 or 2");
  u = wrap_unit(u);
  const int upper = circle == 1 ? 0 : 2;
  if (u <= 0.5) return {upper, 2.0 * u};
  return {upper + 1, 2.0 * u - 1.0};
}

std::pair<int, double> eight_position(const GraphPoint& x) {
  if (x.edge < 0 || x.edge > 3) throw DomainError("eight_position: bad edge");
  int circle = x.edge < 2 ? 1 : 2;
  const bool upper = x.edge % 2 == 0;
  double u = upper ? 0.5 * x.offset : 0.5 + 0.5 * x.offset;
  if (u >= 1.0) u -= 1.0;
  if (u == 0.5) circle = 1;
  return {circle, u};
}

}  // namespace mirror
