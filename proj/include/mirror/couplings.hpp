#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "mirror/diffusion.hpp"
#include "mirror/reflection.hpp"
#include "mirror/rng.hpp"
#include "mirror/spaces.hpp"

namespace mirror {

inline constexpr double kNever = std::numeric_limits<double>::infinity();

/// Pair of paths on a common time grid. After `T` the two components agree.
struct CoupledTrajectory {
  std::vector<double> times;
  std::vector<Point> z1;
  std::vector<Point> z2;
  double T = kNever;
  /// Whether Z2 = R Z1 held at each grid point (always false from T on).
  std::vector<bool> mirror_flag;
  /// max distance(Z2(n), R Z1(n)) over grid points before T; NaN when the
  /// runner has no global reflection to compare against.
  double max_mirror_deviation = std::numeric_limits<double>::quiet_NaN();

  bool coupled_by(double t) const { return T <= t; }
};

// ------------------------------------------------------------- mirror map --

/// Parallel transport along the geodesic x -> y followed by reflection
/// across the hyperplane of T_y orthogonal to the arrival direction.
TangentVector mirror_map(const Space& space, const Point& x, const Point& y,
                         const TangentVector& v);

/// Frame Phi1 at x and its image Phi2 = m_xy Phi1 at y.
struct MirrorMapFrame {
  Point x;
  Point y;
  Eigen::MatrixXd phi1;
  Eigen::MatrixXd phi2;
};

MirrorMapFrame mirror_frame(const Space& space, const Point& x, const Point& y);

// ----------------------------------------------------- pathwise couplings --

/// Z2 = R Z1 until Z1 first reaches H, then Z2 = Z1. On Brownian paths the
/// hitting time between grid points is detected exactly by Brownian-bridge
/// thinning (sub-stream 1 of the path's seed); T is then the grid time that
/// closes the interval containing the hit.
CoupledTrajectory mirror_run(const ReflectionStructure& structure,
                             const Trajectory& z1);

/// Eight space, z1 from 0 in Y1: Z2 = eta o R (Z1) until the glue point.
CoupledTrajectory counterexample_eight_run(const Trajectory& z1);

/// Star tree, z1 from p11: R before the first visit to p1, eta o R until the
/// first visit to p0, identity after.
CoupledTrajectory counterexample_tree_run(const Trajectory& z1);

/// Independent components until they first occupy the same point (chains;
/// continuous paths never meet), identical afterwards. `space` decides
/// equality.
CoupledTrajectory independent_run(const Space& space, const Trajectory& z1,
                                  const Trajectory& z2);

// ------------------------------------------------------- Kendall-Cranston --

/// Coupled geodesic random walk hit the cut locus.
class CutLocusError : public NonUniqueGeodesicError {
 public:
  CutLocusError(const std::string& what, std::int64_t step)
      : NonUniqueGeodesicError(what), step_(step) {}
  std::int64_t step() const { return step_; }

 private:
  std::int64_t step_;
};

enum class MergeRule {
  /// One-step maximal coupling of the two uniform geodesic-ball steps using
  /// the mirror proposal: exact marginals.
  ReflectionMaximal,
  /// Set Z2 = Z1 once d(Z1, Z2) < eps sqrt(d+2). Biased by O(eps).
  Threshold,
};

struct KcOptions {
  std::optional<double> poisson_lambda;
  MergeRule merge = MergeRule::ReflectionMaximal;
  /// Replaces the uniform-disk noise (e.g. all zeros in tests).
  std::function<Eigen::VectorXd(std::int64_t step, CounterRng&)> noise;
};

/// Coupled geodesic random walk on Euclidean, Sphere2 or Hyperbolic2 with
/// shared noise xi_n and Phi2 = m_xy Phi1.
CoupledTrajectory kc_run(const Space& space, const Point& x1, const Point& x2,
                         double eps, std::int64_t n_steps, CounterRng& rng,
                         const KcOptions& options = {});

/// Density of exp_x(rho xi), xi uniform on the unit disk, at geodesic
/// distance r from x (0 outside the ball).
double geodesic_ball_step_density(const Space& space, double rho, double r);

// --------------------------------------------------- exact chain couplings --

/// Sub-stochastic kernel of the chain killed on H and the law of the H
/// hitting time from x1.
struct MirrorKernel {
  std::vector<int> states;  // chain indices of non-H states
  Eigen::MatrixXd Q;
  Eigen::VectorXd survival;  // P[tau > t], t = 0..t_max
};

MirrorKernel chain_mirror_kernel(const FiniteChain& chain, int t_max);

/// Coupling driven by Z1 through a list of state maps: while in stage s,
/// Z2 = maps[s](Z1); after each step the stage advances while Z1 satisfies
/// triggers[s]. The last stage must be the identity (coupled).
struct StagedCoupling {
  std::string name;
  std::vector<std::vector<int>> maps;
  std::vector<std::vector<bool>> triggers;
};

StagedCoupling mirror_stages(const FiniteChain& chain);
/// eta o R on an EightChain; eta reverses circle 2.
StagedCoupling eight_stages(const FiniteChain& chain);
/// R, then eta o R after p1, identity after p0 on a TreeChain.
StagedCoupling tree_stages(const FiniteChain& chain);

/// Exact joint law of (Z1(t), Z2(t)) for t = 0..t_max, and P[T > t].
struct JointLaw {
  std::vector<Eigen::MatrixXd> pair;
  Eigen::VectorXd survival;
};

JointLaw staged_joint_law(const FiniteChain& chain, const StagedCoupling& c,
                          int t_max);

/// Independent product chain, absorbed on the diagonal, from (a, b).
JointLaw independent_joint_law(const FiniteChain& chain, int a, int b, int t_max);

/// Largest violation, over all reached (Z1, stage) configurations up to
/// t_max, of "the one-step law of Z2 is the chain's kernel from Z2".
double markovian_contract_residual(const FiniteChain& chain,
                                   const StagedCoupling& c, int t_max);

/// Largest violation of the marginal identities Z1(t) ~ P^t(x1, .) and
/// Z2(t) ~ P^t(x2, .) for the given joint law.
double marginal_residual(const FiniteChain& chain, const JointLaw& law, int a,
                         int b);

/// max over t and pair states of |law_a - law_b|.
double max_joint_gap(const JointLaw& a, const JointLaw& b);

/// Sample a staged coupling along a sampled chain path of Z1.
CoupledTrajectory staged_run(const FiniteChain& chain, const StagedCoupling& c,
                             const Trajectory& z1);

}  // namespace mirror
