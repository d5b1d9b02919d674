#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "mirror/reflection.hpp"
#include "mirror/rng.hpp"
#include "mirror/spaces.hpp"

namespace mirror {

// All kernels and walks use the generator Delta / 2 (standard Brownian motion).

// ------------------------------------------------------------ heat kernels --

double heat_kernel(const Space& space, double t, const Point& x, const Point& y);

/// log p_t(x, y). On the sphere this switches to a multiprecision Legendre
/// series so that values far below the double range stay accurate.
double log_heat_kernel(const Space& space, double t, const Point& x,
                       const Point& y);

double euclidean_heat_kernel(int dim, double t, double r);
/// Wrapped Gaussian on the unit-circumference circle, images |n| <= 10.
double circle_heat_kernel(double t, double gap);
/// Eigenfunction series 1 + 2 sum exp(-2 pi^2 k^2 t) cos(2 pi k gap).
double circle_heat_kernel_series(double t, double gap);
/// Legendre series in cos(angle), truncated once the term bound is < 1e-15.
double sphere_heat_kernel(double t, double angle);

/// Legendre series of the S^2 kernel in any floating scalar. Terms are added
/// until the bound (2l+1)/(4 pi) exp(-l(l+1)t/2) drops below `cutoff`.
template <typename Scalar>
Scalar sphere_heat_kernel_series(const Scalar& t, const Scalar& cos_angle,
                                 const Scalar& cutoff) {
  using std::exp;
  const Scalar four_pi = Scalar(4) * Scalar(M_PI);
  Scalar p_prev = Scalar(1);  // P_0
  Scalar p_curr = cos_angle;  // P_1
  Scalar sum = Scalar(1) / four_pi;
  // exp(-l(l+1)t/2) updated by the ratio exp(-(l+1)t) between consecutive l.
  const Scalar step = exp(-t);
  Scalar decay = exp(-t);  // l = 1
  Scalar ratio = step;
  for (long l = 1;; ++l) {
    const Scalar weight = Scalar(2 * l + 1) / four_pi * decay;
    sum += weight * p_curr;
    if (Scalar(l) * t > Scalar(1) && weight < cutoff) break;
    const Scalar p_next =
        (Scalar(2 * l + 1) * cos_angle * p_curr - Scalar(l) * p_prev) /
        Scalar(l + 1);
    p_prev = p_curr;
    p_curr = p_next;
    ratio *= step;
    decay *= ratio;
  }
  return sum;
}

// ---------------------------------------------------------------- samplers --

/// Exact Brownian increment over dt on Euclidean, Circle and FlatTorus.
Point bm_increment(const Space& space, const Point& x, double dt, CounterRng& rng);

/// Uniform sample from the closed unit ball of R^d.
Eigen::VectorXd uniform_disk(int d, CounterRng& rng);

/// exp_x(eps sqrt(d+2) frame xi).
Point geodesic_rw_step(const Space& space, const Point& x,
                       const Eigen::MatrixXd& frame, double eps,
                       const Eigen::VectorXd& xi);

/// Number of events of a rate-lambda Poisson process in [0, t].
std::int64_t poisson_clock(double lambda, double t, CounterRng& rng);

/// P[a Brownian bridge over dt between points at distances d1, d2 > 0 from
/// a hyperplane touches it] = exp(-2 d1 d2 / dt).
double bridge_crossing_prob(double d1, double d2, double dt);

/// Sample path of a single process.
struct Trajectory {
  enum class Kind { Brownian, GeodesicWalk, Chain };

  Kind kind = Kind::Brownian;
  std::vector<double> times;
  std::vector<Point> positions;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

/// Brownian path on a uniform grid of n_steps steps of size dt.
Trajectory sample_brownian(const Space& space, const Point& x0, double dt,
                           int n_steps, std::uint64_t seed, std::uint64_t stream);

/// Geodesic random walk with i.i.d. uniform-disk steps, one step per unit
/// eps^2 of time.
Trajectory sample_geodesic_walk(const Space& space, const Point& x0, double eps,
                                int n_steps, std::uint64_t seed,
                                std::uint64_t stream);

// ------------------------------------------------------------ finite chains --

struct CycleSpec {
  int m = 4;
  double laziness = 0.5;
};
struct EightSpec {
  int m = 4;  // states per circle, even
};
struct TreeSpec {
  int m = 2;  // states per edge
};
struct GasketSpec {
  int n = 1;
  bool axis_subdivision = true;
};

using ChainRequest = std::variant<CycleSpec, EightSpec, TreeSpec, GasketSpec>;

/// Discrete-time chain with a designated mirror pair. States are Points of
/// `space`; `sym` is the state permutation induced by R.
struct FiniteChain {
  std::string label;
  Space space;
  std::vector<Point> states;
  Eigen::MatrixXd P;
  std::vector<int> sym;
  std::vector<bool> h_mask;
  std::vector<Side> sides;
  int x1 = 0;
  int x2 = 0;
  /// No single step goes from X1 straight to X2.
  bool crossing_free = true;

  int size() const { return static_cast<int>(states.size()); }
  /// Index of the state equal to p (exact match).
  std::optional<int> find(const Point& p) const;
};

/// Builds and validates a chain. Equivariance and row sums are asserted for
/// every chain; crossing exclusion is asserted for all but the unsubdivided
/// gasket, where `crossing_free` records its absence.
FiniteChain build_chain(const ChainRequest& request);

std::string describe(const ChainRequest& request);

/// Row `init` of P^t.
Eigen::VectorXd chain_distribution(const FiniteChain& chain, int init, int t);

/// All rows of P^t.
Eigen::MatrixXd chain_power(const FiniteChain& chain, int t);

/// One step of the chain from `state`.
int chain_step(const FiniteChain& chain, int state, CounterRng& rng);

/// Chain path of n_steps steps as a Trajectory (Kind::Chain).
Trajectory sample_chain(const FiniteChain& chain, int init, int n_steps,
                        std::uint64_t seed, std::uint64_t stream);

/// Map a chain trajectory's points back to state indices.
std::vector<int> chain_states(const FiniteChain& chain, const Trajectory& path);

}  // namespace mirror
