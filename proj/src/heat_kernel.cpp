#include <algorithm>
#include <cmath>
#include <iostream>

#include <boost/multiprecision/mpfr.hpp>

#include "mirror/diffusion.hpp"
#include "mirror/geometry.hpp"

namespace mirror {

namespace {

namespace mp = boost::multiprecision;

void require_positive_time(double t) {
  if (!(t > 0.0)) throw DomainError("heat kernel: t must be positive");
}

int circle_images(double t) {
  // exp(-n^2 / 2t) < 1e-17 beyond this many images.
  return std::max(10, static_cast<int>(std::ceil(std::sqrt(80.0 * t))) + 1);
}

double circle_log_kernel(double t, double gap) {
  const int images = circle_images(t);
  double peak = -std::numeric_limits<double>::infinity();
  for (int n = -images; n <= images; ++n)
    peak = std::max(peak, -(gap + n) * (gap + n) / (2.0 * t));
  double acc = 0.0;
  for (int n = -images; n <= images; ++n)
    acc += std::exp(-(gap + n) * (gap + n) / (2.0 * t) - peak);
  return peak + std::log(acc) - 0.5 * std::log(2.0 * M_PI * t);
}

double sphere_log_kernel_mp(double t, double angle) {
  // Cancellation in the series is as deep as the result itself, so carry
  // enough digits to resolve exp(-angle^2 / 2t) plus a margin.
  const double depth = angle * angle / (2.0 * t) / std::log(10.0);
  const unsigned digits = static_cast<unsigned>(std::ceil(depth)) + 40;
  mp::mpfr_float::default_precision(digits);
  const mp::mpfr_float tt(t);
  const mp::mpfr_float c = mp::cos(mp::mpfr_float(angle));
  const mp::mpfr_float cutoff = mp::pow(mp::mpfr_float(10), -static_cast<int>(digits - 10));
  const mp::mpfr_float sum = sphere_heat_kernel_series<mp::mpfr_float>(tt, c, cutoff);
  if (sum <= 0) throw ConsistencyError("sphere kernel: non-positive series sum");
  return static_cast<double>(mp::log(sum));
}

}  // namespace

double euclidean_heat_kernel(int dim, double t, double r) {
  require_positive_time(t);
  return std::pow(2.0 * M_PI * t, -0.5 * dim) * std::exp(-r * r / (2.0 * t));
}

double circle_heat_kernel(double t, double gap) {
  require_positive_time(t);
  const int images = circle_images(t);
  double sum = 0.0;
  for (int n = -images; n <= images; ++n)
    sum += std::exp(-(gap + n) * (gap + n) / (2.0 * t));
  return sum / std::sqrt(2.0 * M_PI * t);
}

double circle_heat_kernel_series(double t, double gap) {
  require_positive_time(t);
  double sum = 1.0;
  for (int k = 1;; ++k) {
    const double w = std::exp(-2.0 * M_PI * M_PI * k * k * t);
    sum += 2.0 * w * std::cos(2.0 * M_PI * k * gap);
    if (w < 1e-18) break;
  }
  return sum;
}

double sphere_heat_kernel(double t, double angle) {
  require_positive_time(t);
  if (t < 1e-4)
    throw DomainError("sphere_heat_kernel: Legendre series too slow for t < 1e-4");
  const double value = sphere_heat_kernel_series<double>(t, std::cos(angle), 1e-15);
  // Below ~1e-13 of the leading terms the double series is rounding noise.
  if (value < 1e-12 / t) return std::exp(sphere_log_kernel_mp(t, angle));
  return value;
}

double heat_kernel(const Space& space, double t, const Point& x, const Point& y) {
  require_positive_time(t);
  if (const auto* e = std::get_if<Euclidean>(&space))
    return euclidean_heat_kernel(e->dim, t, distance(space, x, y));
  if (std::holds_alternative<Circle>(space))
    return circle_heat_kernel(t, distance(space, x, y));
  if (std::holds_alternative<FlatTorus>(space)) {
    const Eigen::Vector2d d = std::get<TorusPoint>(x).p - std::get<TorusPoint>(y).p;
    return circle_heat_kernel(t, d(0)) * circle_heat_kernel(t, d(1));
  }
  if (std::holds_alternative<Sphere2>(space))
    return sphere_heat_kernel(t, distance(space, x, y));
  throw UnsupportedError("heat_kernel: no closed form on " + space_name(space));
}

double log_heat_kernel(const Space& space, double t, const Point& x,
                       const Point& y) {
  require_positive_time(t);
  if (const auto* e = std::get_if<Euclidean>(&space)) {
    const double r = distance(space, x, y);
    return -0.5 * e->dim * std::log(2.0 * M_PI * t) - r * r / (2.0 * t);
  }
  if (std::holds_alternative<Circle>(space))
    return circle_log_kernel(t, distance(space, x, y));
  if (std::holds_alternative<FlatTorus>(space)) {
    const Eigen::Vector2d d = std::get<TorusPoint>(x).p - std::get<TorusPoint>(y).p;
    return circle_log_kernel(t, wrap_centered(d(0))) +
           circle_log_kernel(t, wrap_centered(d(1)));
  }
  if (std::holds_alternative<Sphere2>(space)) {
    if (t < 1e-4)
      throw DomainError("log_heat_kernel: sphere series too slow for t < 1e-4");
    return sphere_log_kernel_mp(t, distance(space, x, y));
  }
  throw UnsupportedError("log_heat_kernel: no closed form on " + space_name(space));
}

}  // namespace mirror
