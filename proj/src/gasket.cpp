// Sierpinski gasket vertices in exact dyadic coordinates.
//
// A vertex of level L is (i, j) / 2^L in the affine frame p1 = (0,0),
// p2 = (1,0), p3 = (0,1); its barycentric weights are (k, i, j) / 2^L with
// k = 2^L - i - j. The top-level cell Psi_c(X) is {k >= N/2}, {i >= N/2} or
// {j >= N/2} for c = 1, 2, 3 (N = 2^L).

#include <algorithm>
#include <cmath>
#include <limits>

#include "mirror/spaces.hpp"

namespace mirror {

namespace {

std::uint64_t key(std::int64_t i, std::int64_t j) {
  return (static_cast<std::uint64_t>(i) << 32) ^ static_cast<std::uint64_t>(j);
}

struct Lifted {
  std::int64_t i, j;
};

Lifted lift(const GasketPoint& x, int level) {
  const std::int64_t s = std::int64_t{1} << (level - x.level);
  return {x.i * s, x.j * s};
}

// Top-level cells (1..3) containing the level-L lattice point, as a bitmask.
int cells_of(std::int64_t i, std::int64_t j, int level) {
  const std::int64_t n = std::int64_t{1} << level;
  const std::int64_t half = n / 2;
  const std::int64_t k = n - i - j;
  int mask = 0;
  if (k >= half) mask |= 1;
  if (i >= half) mask |= 2;
  if (j >= half) mask |= 4;
  return mask;
}

// Psi_c^{-1} at level L > 0, result at level L - 1.
Lifted expand(int c, std::int64_t i, std::int64_t j, int level) {
  const std::int64_t half = std::int64_t{1} << (level - 1);
  if (c == 2) return {i - half, j};
  if (c == 3) return {i, j - half};
  return {i, j};
}

int first_cell(int mask) {
  for (int c = 1; c <= 3; ++c)
    if (mask & (1 << (c - 1))) return c;
  return 0;
}

// Level-1 vertex Psi_c(p_k): a corner (c == k) or the midpoint of p_c p_k.
// Distance between two such vertices in units of 1/2.
std::int64_t level1_half_units(int c1, int k1, int c2, int k2) {
  const bool corner1 = c1 == k1;
  const bool corner2 = c2 == k2;
  if (corner1 && corner2) return c1 == c2 ? 0 : 2;
  if (corner1 || corner2) {
    const int a = corner1 ? c1 : c2;
    const int b = corner1 ? c2 : c1;
    const int d = corner1 ? k2 : k1;
    return (a == b || a == d) ? 1 : 2;
  }
  const bool same = std::min(c1, k1) == std::min(c2, k2) &&
                    std::max(c1, k1) == std::max(c2, k2);
  return same ? 0 : 1;
}

bool in_vn(std::int64_t i, std::int64_t j, int level) {
  const std::int64_t n = std::int64_t{1} << level;
  if (i < 0 || j < 0 || i + j > n) return false;
  if (level == 0) return true;
  const int mask = cells_of(i, j, level);
  const int c = first_cell(mask);
  if (c == 0) return false;
  const Lifted e = expand(c, i, j, level);
  return in_vn(e.i, e.j, level - 1);
}

// Distances from (i,j) at level L to p1, p2, p3 in units of 2^-L.
std::array<std::int64_t, 3> corner_distances(std::int64_t i, std::int64_t j,
                                             int level) {
  if (level == 0) {
    const int corner = (i == 0 && j == 0) ? 1 : (i == 1 ? 2 : 3);
    std::array<std::int64_t, 3> d{};
    for (int m = 1; m <= 3; ++m) d[m - 1] = m == corner ? 0 : 1;
    return d;
  }
  const int c = first_cell(cells_of(i, j, level));
  const Lifted e = expand(c, i, j, level);
  const auto inner = corner_distances(e.i, e.j, level - 1);
  const std::int64_t unit = std::int64_t{1} << (level - 1);
  std::array<std::int64_t, 3> d{};
  for (int m = 1; m <= 3; ++m) {
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    for (int k = 1; k <= 3; ++k)
      best = std::min(best, inner[k - 1] + unit * level1_half_units(c, k, m, m));
    d[m - 1] = best;
  }
  return d;
}

std::int64_t pair_distance(Lifted x, Lifted y, int level) {
  if (level == 0) return (x.i == y.i && x.j == y.j) ? 0 : 1;
  const int mx = cells_of(x.i, x.j, level);
  const int my = cells_of(y.i, y.j, level);
  if (const int common = mx & my) {
    const int c = first_cell(common);
    return pair_distance(expand(c, x.i, x.j, level), expand(c, y.i, y.j, level),
                         level - 1);
  }
  const int cx = first_cell(mx);
  const int cy = first_cell(my);
  const Lifted ex = expand(cx, x.i, x.j, level);
  const Lifted ey = expand(cy, y.i, y.j, level);
  const auto dx = corner_distances(ex.i, ex.j, level - 1);
  const auto dy = corner_distances(ey.i, ey.j, level - 1);
  const std::int64_t unit = std::int64_t{1} << (level - 1);
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  for (int a = 1; a <= 3; ++a)
    for (int b = 1; b <= 3; ++b)
      best = std::min(best, dx[a - 1] + unit * level1_half_units(cx, a, cy, b) +
                                dy[b - 1]);
  return best;
}

}  // namespace

GasketPoint gasket_point(std::int64_t i, std::int64_t j, int level) {
  if (level < 0) throw DomainError("gasket_point: negative level");
  while (level > 0 && i % 2 == 0 && j % 2 == 0) {
    i /= 2;
    j /= 2;
    --level;
  }
  return {i, j, level};
}

GasketPoint gasket_corner(int k) {
  switch (k) {
    case 1: return {0, 0, 0};
    case 2: return {1, 0, 0};
    case 3: return {0, 1, 0};
    default: throw DomainError("gasket_corner: index must be 1, 2 or 3");
  }
}

GasketPoint gasket_contract(int k, const GasketPoint& x) {
  const GasketPoint c = gasket_corner(k);
  const std::int64_t s = std::int64_t{1} << x.level;
  return gasket_point(x.i + c.i * s, x.j + c.j * s, x.level + 1);
}

GasketPoint gasket_contract(const std::vector<int>& word, const GasketPoint& x) {
  GasketPoint y = x;
  for (auto it = word.rbegin(); it != word.rend(); ++it) y = gasket_contract(*it, y);
  return y;
}

bool is_gasket_vertex(const GasketPoint& x) {
  if (x.level > 62) return false;
  return in_vn(x.i, x.j, x.level);
}

Eigen::Vector2d gasket_planar(const GasketPoint& x) {
  const double s = std::ldexp(1.0, -x.level);
  const Eigen::Vector2d e1(1.0, 0.0);
  const Eigen::Vector2d e2(0.5, std::sqrt(3.0) / 2.0);
  return s * (static_cast<double>(x.i) * e1 + static_cast<double>(x.j) * e2);
}

std::optional<int> GasketLevelGraph::find(const GasketPoint& p) const {
  if (p.level > level) return std::nullopt;
  const Lifted l = lift(p, level);
  const auto it = index.find(key(l.i, l.j));
  if (it == index.end()) return std::nullopt;
  return it->second;
}

GasketLevelGraph gasket_vertices(int n) {
  if (n < 0 || n > kMaxGasketLevel)
    throw LimitError("gasket_vertices: level must lie in [0, 12]");
  GasketLevelGraph g;
  g.level = n;
  // Lower-left corners of the upward cells, in units of 2^-n.
  std::vector<std::pair<std::int64_t, std::int64_t>> cells = {{0, 0}};
  for (int l = 0; l < n; ++l) {
    std::vector<std::pair<std::int64_t, std::int64_t>> next;
    next.reserve(cells.size() * 3);
    for (const auto& [a, b] : cells) {
      next.emplace_back(2 * a, 2 * b);
      next.emplace_back(2 * a + 1, 2 * b);
      next.emplace_back(2 * a, 2 * b + 1);
    }
    cells = std::move(next);
  }
  auto vertex = [&](std::int64_t i, std::int64_t j) {
    const auto [it, inserted] =
        g.index.try_emplace(key(i, j), static_cast<int>(g.vertices.size()));
    if (inserted) g.vertices.push_back(gasket_point(i, j, n));
    return it->second;
  };
  g.edges.reserve(cells.size() * 3);
  for (const auto& [a, b] : cells) {
    const int v1 = vertex(a, b);
    const int v2 = vertex(a + 1, b);
    const int v3 = vertex(a, b + 1);
    g.edges.emplace_back(v1, v2);
    g.edges.emplace_back(v1, v3);
    g.edges.emplace_back(v2, v3);
  }
  return g;
}

double Dyadic::value() const { return std::ldexp(static_cast<double>(num), -exp); }

Dyadic make_dyadic(std::int64_t num, int exp) {
  while (exp > 0 && num % 2 == 0) {
    num /= 2;
    --exp;
  }
  return {num, exp};
}

Dyadic gasket_distance(const GasketPoint& x, const GasketPoint& y) {
  if (!is_gasket_vertex(x) || !is_gasket_vertex(y))
    throw UnsupportedError("gasket_distance: only dyadic gasket vertices");
  const int level = std::max(x.level, y.level);
  return make_dyadic(pair_distance({lift(x, level).i, lift(x, level).j},
                                   {lift(y, level).i, lift(y, level).j}, level),
                     level);
}

}  // namespace mirror
