#pragma once

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "mirror/spaces.hpp"

namespace mirror {

enum class Side { X1, H, X2 };

std::string to_string(Side s);

/// Equidistant set K = { z : d(z, x1) = d(z, x2) } on the flat torus for
/// x1 = [(a, 0)], x2 = [(0, b)].
struct BisectorGeometry {
  enum class Case { SingularNoReflection, TwoCircles };

  Case kind = Case::TwoCircles;
  double a = 0.0;
  double b = 0.0;
  /// z1..z6 for the singular case; circle end points for TwoCircles.
  std::vector<Eigen::Vector2d> points;
  /// Index pairs into `points`, each an R^2 segment projected to the torus.
  std::vector<std::array<int, 2>> segments;
  bool singular = false;
};

BisectorGeometry torus_bisector(double a, double b);

/// Thrown when the starting pair admits no reflection structure; carries the
/// bisector witness.
class NoReflectionError : public DomainError {
 public:
  NoReflectionError(const std::string& what, BisectorGeometry witness)
      : DomainError(what), witness_(std::move(witness)) {}
  const BisectorGeometry& witness() const { return witness_; }

 private:
  BisectorGeometry witness_;
};

/// Vertex and edge permutation of a metric graph; `flip[e]` reverses the
/// offset direction on the image edge.
struct GraphIsometry {
  std::vector<int> vertex_map;
  std::vector<int> edge_map;
  std::vector<bool> flip;

  GraphPoint apply(const GraphPoint& x) const;
  bool is_involution() const;
};

/// Reflection across the hyperplane { z : (z - origin) . normal = 0 }.
struct HyperplaneReflection {
  Eigen::VectorXd normal;
  Eigen::VectorXd origin;
};
/// theta -> 2 center - theta on the unit circle.
struct CircleReflection {
  double center = 0.0;
};
/// Torus reflection along one coordinate axis: u -> sum - u.
struct TorusReflection {
  int axis = 0;
  double center = 0.0;
};
/// Linear reflection of R^3 restricted to the sphere (Euclidean form) or to
/// the hyperboloid (Lorentz form).
struct LinearReflection {
  Eigen::Vector3d normal;
  bool lorentz = false;
};
struct GraphReflection {
  GraphIsometry iso;
  std::vector<Side> vertex_side;
  std::vector<Side> edge_side;  // side of edge interiors
};
/// Swap of the p1 / p2 barycentric weights.
struct GasketReflection {};

using Involution = std::variant<HyperplaneReflection, CircleReflection,
                                TorusReflection, LinearReflection,
                                GraphReflection, GasketReflection>;

struct ReflectionStructure {
  Space space;
  Point x1;
  Point x2;
  Involution involution;
};

/// Validated reflection structure for the supported (space, pair)
/// combinations. Throws NoReflectionError on a torus pair that is not
/// axis aligned and UnsupportedError on any other unsupported pair.
ReflectionStructure build_structure(const Space& space, const Point& x1,
                                    const Point& x2);

Point reflect(const ReflectionStructure& s, const Point& x);
Side side(const ReflectionStructure& s, const Point& x);

/// Signed geodesic distance from x to H, positive on X1. Continuous spaces
/// only.
double signed_distance_to_h(const ReflectionStructure& s, const Point& x);

/// Band width used to classify continuous points as lying on H.
inline constexpr double kHBand = 1e-12;

/// Graph isometries of the two singular examples.
GraphIsometry eight_reflection(const MetricGraph& g);
/// eta: u -> 1 - u on Y2 (identity on Y1).
GraphIsometry eight_eta(const MetricGraph& g);
GraphIsometry tree_reflection(const MetricGraph& g);
/// eta: swaps the p21 and p22 leaves.
GraphIsometry tree_eta(const MetricGraph& g);
GraphIsometry compose(const GraphIsometry& outer, const GraphIsometry& inner);

}  // namespace mirror
