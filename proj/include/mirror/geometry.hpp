#pragma once

// Closed-form Riemannian geometry of the model manifolds, written against
// Eigen::MatrixBase so the routines accept expressions and any scalar type.
//
//   Sphere     S^2 = { z in R^3 : |z| = 1 }
//   Hyperboloid H^2 = { z in R^{1,2} : <z,z>_L = -1, z0 > 0 }
//
// Tangent vectors are stored in ambient coordinates.

#include <cmath>
#include <Eigen/Dense>

#include "mirror/errors.hpp"

namespace mirror::geometry {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

/// Lorentz bilinear form -a0 b0 + a1 b1 + a2 b2.
template <typename A, typename B>
typename A::Scalar lorentz_dot(const Eigen::MatrixBase<A>& a,
                               const Eigen::MatrixBase<B>& b) {
  return -a(0) * b(0) + a(1) * b(1) + a(2) * b(2);
}

// ---------------------------------------------------------------- sphere --

template <typename A, typename B>
typename A::Scalar sphere_distance(const Eigen::MatrixBase<A>& x,
                                   const Eigen::MatrixBase<B>& y) {
  using std::atan2;
  return atan2(x.cross(y).norm(), x.dot(y));
}

template <typename A, typename B>
Vec3<typename A::Scalar> sphere_exp(const Eigen::MatrixBase<A>& x,
                                    const Eigen::MatrixBase<B>& v) {
  using Scalar = typename A::Scalar;
  using std::cos;
  using std::sin;
  const Scalar len = v.norm();
  if (len == Scalar(0)) return x;
  Vec3<Scalar> z = cos(len) * x + (sin(len) / len) * v;
  return z / z.norm();
}

/// Inverse of sphere_exp on the open hemisphere-free domain; antipodes throw.
template <typename A, typename B>
Vec3<typename A::Scalar> sphere_log(const Eigen::MatrixBase<A>& x,
                                    const Eigen::MatrixBase<B>& y) {
  using Scalar = typename A::Scalar;
  const Vec3<Scalar> w = y - x.dot(y) * x;
  const Scalar wn = w.norm();
  const Scalar theta = sphere_distance(x, y);
  if (wn < Scalar(1e-300)) {
    if (x.dot(y) < Scalar(0))
      throw NonUniqueGeodesicError("sphere_log: antipodal points");
    return Vec3<Scalar>::Zero();
  }
  if (theta > Scalar(M_PI) - Scalar(1e-12))
    throw NonUniqueGeodesicError("sphere_log: antipodal points");
  return (theta / wn) * w;
}

/// Unit velocity of the minimal geodesic x -> y at y, given the unit initial
/// direction u at x and the length theta.
template <typename A, typename B>
Vec3<typename A::Scalar> sphere_end_direction(const Eigen::MatrixBase<A>& x,
                                              const Eigen::MatrixBase<B>& u,
                                              typename A::Scalar theta) {
  using std::cos;
  using std::sin;
  return -sin(theta) * x + cos(theta) * u;
}

template <typename A, typename B, typename C>
Vec3<typename A::Scalar> sphere_transport(const Eigen::MatrixBase<A>& x,
                                          const Eigen::MatrixBase<B>& y,
                                          const Eigen::MatrixBase<C>& v) {
  using Scalar = typename A::Scalar;
  const Vec3<Scalar> l = sphere_log(x, y);
  const Scalar theta = l.norm();
  if (theta == Scalar(0)) return v;
  const Vec3<Scalar> u = l / theta;
  const Scalar a = v.dot(u);
  return v - a * u + a * sphere_end_direction(x, u, theta);
}

/// Transport along the geodesic x -> y, then reflect across the hyperplane of
/// T_y orthogonal to the arrival direction.
template <typename A, typename B, typename C>
Vec3<typename A::Scalar> sphere_mirror(const Eigen::MatrixBase<A>& x,
                                       const Eigen::MatrixBase<B>& y,
                                       const Eigen::MatrixBase<C>& v) {
  using Scalar = typename A::Scalar;
  const Vec3<Scalar> l = sphere_log(x, y);
  const Scalar theta = l.norm();
  if (theta == Scalar(0))
    throw DomainError("sphere_mirror: coincident points");
  const Vec3<Scalar> u = l / theta;
  const Scalar a = v.dot(u);
  return v - a * u - a * sphere_end_direction(x, u, theta);
}

// ------------------------------------------------------------ hyperboloid --

template <typename A, typename B>
typename A::Scalar hyperbolic_distance(const Eigen::MatrixBase<A>& x,
                                       const Eigen::MatrixBase<B>& y) {
  using Scalar = typename A::Scalar;
  using std::asinh;
  using std::sqrt;
  const Vec3<Scalar> d = x - y;
  const Scalar q = lorentz_dot(d, d);
  return Scalar(2) * asinh(sqrt(q > Scalar(0) ? q : Scalar(0)) / Scalar(2));
}

/// Lift (z1, z2) onto the upper sheet.
template <typename A>
Vec3<typename A::Scalar> hyperbolic_project(const Eigen::MatrixBase<A>& z) {
  using std::sqrt;
  Vec3<typename A::Scalar> out = z;
  out(0) = sqrt(typename A::Scalar(1) + z(1) * z(1) + z(2) * z(2));
  return out;
}

template <typename A, typename B>
Vec3<typename A::Scalar> hyperbolic_exp(const Eigen::MatrixBase<A>& x,
                                        const Eigen::MatrixBase<B>& v) {
  using Scalar = typename A::Scalar;
  using std::cosh;
  using std::sinh;
  using std::sqrt;
  const Scalar q = lorentz_dot(v, v);
  const Scalar len = sqrt(q > Scalar(0) ? q : Scalar(0));
  if (len == Scalar(0)) return x;
  return hyperbolic_project(cosh(len) * x + (sinh(len) / len) * v);
}

template <typename A, typename B>
Vec3<typename A::Scalar> hyperbolic_log(const Eigen::MatrixBase<A>& x,
                                        const Eigen::MatrixBase<B>& y) {
  using Scalar = typename A::Scalar;
  using std::sqrt;
  const Vec3<Scalar> w = y + lorentz_dot(x, y) * x;
  const Scalar q = lorentz_dot(w, w);
  const Scalar wn = sqrt(q > Scalar(0) ? q : Scalar(0));
  if (wn == Scalar(0)) return Vec3<Scalar>::Zero();
  return (hyperbolic_distance(x, y) / wn) * w;
}

template <typename A, typename B>
Vec3<typename A::Scalar> hyperbolic_end_direction(
    const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& u,
    typename A::Scalar theta) {
  using std::cosh;
  using std::sinh;
  return sinh(theta) * x + cosh(theta) * u;
}

template <typename A, typename B, typename C>
Vec3<typename A::Scalar> hyperbolic_transport(const Eigen::MatrixBase<A>& x,
                                              const Eigen::MatrixBase<B>& y,
                                              const Eigen::MatrixBase<C>& v) {
  using Scalar = typename A::Scalar;
  const Vec3<Scalar> l = hyperbolic_log(x, y);
  const Scalar theta = hyperbolic_distance(x, y);
  if (theta == Scalar(0)) return v;
  const Vec3<Scalar> u = l / theta;
  const Scalar a = lorentz_dot(v, u);
  return v - a * u + a * hyperbolic_end_direction(x, u, theta);
}

template <typename A, typename B, typename C>
Vec3<typename A::Scalar> hyperbolic_mirror(const Eigen::MatrixBase<A>& x,
                                           const Eigen::MatrixBase<B>& y,
                                           const Eigen::MatrixBase<C>& v) {
  using Scalar = typename A::Scalar;
  const Vec3<Scalar> l = hyperbolic_log(x, y);
  const Scalar theta = hyperbolic_distance(x, y);
  if (theta == Scalar(0))
    throw DomainError("hyperbolic_mirror: coincident points");
  const Vec3<Scalar> u = l / theta;
  const Scalar a = lorentz_dot(v, u);
  return v - a * u - a * hyperbolic_end_direction(x, u, theta);
}

// -------------------------------------------------------------- euclidean --

/// Reflection of v across the hyperplane orthogonal to y - x.
template <typename A, typename B, typename C>
Eigen::Matrix<typename A::Scalar, Eigen::Dynamic, 1> euclidean_mirror(
    const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& y,
    const Eigen::MatrixBase<C>& v) {
  using Scalar = typename A::Scalar;
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> d = y - x;
  const Scalar n = d.norm();
  if (n == Scalar(0)) throw DomainError("euclidean_mirror: coincident points");
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> u = d / n;
  return v - Scalar(2) * v.dot(u) * u;
}

}  // namespace mirror::geometry
