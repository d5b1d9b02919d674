#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mirror/couplings.hpp"
#include "mirror/diffusion.hpp"
#include "mirror/reflection.hpp"

namespace mirror {

/// Values of t -> phi_t (or a survival curve) on a grid.
struct TVCurve {
  enum class Method { ExactKernel, ExactChain, McSides, McSurvival };

  std::vector<double> t;
  std::vector<double> value;
  std::vector<double> se;  // 0 for exact methods
  Method method = Method::ExactChain;

  bool exact() const {
    return method == Method::ExactKernel || method == Method::ExactChain;
  }
};

std::string to_string(TVCurve::Method m);

/// Half the l1 distance between two probability vectors.
double tv_distance(const Eigen::VectorXd& mu1, const Eigen::VectorXd& mu2);

/// phi_t(x, y) for y = R x on spaces with a closed-form kernel, computed as
/// P_x[Z(t) in X1] - P_y[Z(t) in X1].
double phi_exact(const Space& space, double t, const Point& x, const Point& y);

/// Series in Legendre polynomials for the hemisphere case; `cos_angle` is
/// x . n with n the unit normal of H pointing into X1.
double sphere_phi_series(double t, double cos_angle);

/// phi_t between the rows x1 and x2 of P^t.
double phi_exact_chain(const FiniteChain& chain, int t);

/// phi_t for t = 0..t_max.
TVCurve phi_curve(const FiniteChain& chain, int t_max);

struct PhiEstimate {
  double value = 0.0;
  double se = 0.0;
  bool paired = false;
};

enum class SidesEstimator {
  /// One sample path per trial from x1; the x2 term reuses it through R.
  Reflected,
  /// Independent samples from a and b on common random numbers.
  TwoSample,
};

struct SidesOptions {
  SidesEstimator estimator = SidesEstimator::Reflected;
  /// Geodesic-walk steps used on curved spaces.
  int walk_steps = 200;
};

/// Monte Carlo estimate of P_a[Z(t) in X1] - P_b[Z(t) in X1].
PhiEstimate phi_sides_mc(const ReflectionStructure& s, const Point& a,
                         const Point& b, double t, std::int64_t trials,
                         std::uint64_t seed, const SidesOptions& options = {});
PhiEstimate phi_sides_mc(const ReflectionStructure& s, double t,
                         std::int64_t trials, std::uint64_t seed,
                         const SidesOptions& options = {});

// ---------------------------------------------------------- mirror measure --

struct PairWeight {
  int i = 0;
  int j = 0;
  double w = 0.0;
};

struct DiscreteMeasurePair {
  Eigen::VectorXd mu1;
  Eigen::VectorXd mu2;
  std::vector<Side> sides;
  std::vector<int> sym;

  /// mu2 on X1, mu1 off X1.
  Eigen::VectorXd mu0() const;
};

DiscreteMeasurePair measure_pair(const FiniteChain& chain, int t);

/// Diagonal mass mu0 plus (mu1 - mu0)(x) on (x, Rx). Throws ConsistencyError
/// when mu0 exceeds mu1 or mu2 by more than 1e-12.
std::vector<PairWeight> mirror_measure(const DiscreteMeasurePair& pair);

/// Row and column marginals of sparse pair weights over n states.
std::pair<Eigen::VectorXd, Eigen::VectorXd> marginals(const std::vector<PairWeight>& w, int n);

struct WasserResult {
  int s = 0;
  int t = 0;
  double mirror_value = 0.0;  // E_{mu_M}[phi_s]
  double target = 0.0;        // phi_{s+t}(x1, x2)
  double residual = 0.0;      // mirror_value - target
  /// min over random couplings of E[phi_s] - target.
  double worst_random_gap = 0.0;
  int random_couplings = 0;
  bool pass = false;
};

/// Mirror-measure optimality at (s, t) on the chain's pair (a, b), where b is
/// R a or equal to a (defaults: x1, x2).
WasserResult wasser_check(const FiniteChain& chain, int s, int t,
                          int random_couplings = 100, std::uint64_t seed = 1,
                          int a = -1, int b = -1);

/// Random coupling of mu1 and mu2: iterative proportional scaling of `kernel`
/// (positive where both marginals are) until the marginal error is < tol.
Eigen::MatrixXd scale_to_marginals(Eigen::MatrixXd kernel, const Eigen::VectorXd& mu1,
                                   const Eigen::VectorXd& mu2, double tol = 1e-15,
                                   int max_iter = 20000);

// -------------------------------------------------------------- verdicts --

struct MaximalityRow {
  double t = 0.0;
  double survival = 0.0;
  double phi = 0.0;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct MaximalityReport {
  std::vector<MaximalityRow> rows;
  bool pass = false;
  double max_abs_residual = 0.0;
};

/// Compares a survival curve with phi: exact inputs must agree to 1e-12,
/// Monte Carlo inputs to 3 combined standard errors.
MaximalityReport maximality_report(const TVCurve& survival, const TVCurve& phi);

/// Survival curve of a joint law (exact).
TVCurve survival_curve(const Eigen::VectorXd& survival);

/// max over t <= t_max of |P[tau_H > t] - phi_t| for the mirror coupling.
double maximality_gap(const FiniteChain& chain, int t_max);

struct VaradhanRow {
  double t = 0.0;
  double value = 0.0;  // -2 t log p_t(x, y)
  double deviation = 0.0;
};

struct VaradhanReport {
  double d2 = 0.0;
  std::vector<VaradhanRow> rows;
  bool monotone = false;
  double tolerance = 0.0;
  bool pass = false;
};

/// -2 t log p_t(x, y) against d(x, y)^2 along a decreasing t list. Deviation
/// is relative to d^2 (absolute when x = y). Passes when deviations decrease
/// and the last one is within 5% (flat spaces) or 10% (sphere).
VaradhanReport varadhan_check(const Space& space, const Point& x, const Point& y,
                              const std::vector<double>& t_list);

// ------------------------------------------------------------------ stats --

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Kolmogorov survival function Q(lambda) = 2 sum (-1)^(k-1) exp(-2 k^2 lambda^2).
double kolmogorov_q(double lambda);

}  // namespace mirror
