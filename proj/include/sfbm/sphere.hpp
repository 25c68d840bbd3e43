#ifndef SFBM_SPHERE_HPP
#define SFBM_SPHERE_HPP

#include <array>
#include <cmath>
#include <vector>

#include "sfbm/numerics.hpp"

namespace sfbm {

/// A location on the unit sphere, kept in both representations: the unit
/// vector feeds inner products, the (colatitude, longitude) pair feeds the
/// harmonics. The two views are reconciled at construction, which avoids
/// pole ambiguities later.
struct SpherePoint {
  std::array<double, 3> unit_vector{0.0, 0.0, 1.0};
  double theta = 0.0;  // colatitude in [0, pi]
  double phi = 0.0;    // longitude in [0, 2*pi)
};

namespace detail {
inline double reduce_longitude(double phi) {
  double p = std::fmod(phi, 2.0 * pi);
  if (p < 0.0) p += 2.0 * pi;
  if (p >= 2.0 * pi) p = 0.0;
  return p;
}
}  // namespace detail

inline SpherePoint from_angles(double theta, double phi) {
  if (!(theta >= 0.0 && theta <= pi))
    throw std::domain_error("from_angles: colatitude must lie in [0, pi]");
  SpherePoint p;
  p.theta = theta;
  // longitude is meaningless at the poles; pin it to 0 there
  p.phi = (theta == 0.0 || theta == pi) ? 0.0 : detail::reduce_longitude(phi);
  const double st = std::sin(theta);
  p.unit_vector = {st * std::cos(p.phi), st * std::sin(p.phi), std::cos(theta)};
  return p;
}

inline SpherePoint from_vector(double x, double y, double z) {
  const double norm = std::sqrt(x * x + y * y + z * z);
  if (!(norm > 0.0)) throw std::domain_error("from_vector: zero vector");
  x /= norm;
  y /= norm;
  z /= norm;
  SpherePoint p;
  p.theta = std::acos(std::clamp(z, -1.0, 1.0));
  p.phi = (p.theta == 0.0 || p.theta == pi) ? 0.0 : detail::reduce_longitude(std::atan2(y, x));
  p.unit_vector = {x, y, z};
  return p;
}

inline SpherePoint north() { return from_angles(0.0, 0.0); }

/// Great-circle distance arccos<x,y>, with the inner product clamped so
/// roundoff at coincident/antipodal pairs cannot produce NaN. Identical
/// points short-circuit to 0: acos near a rounded-down 1.0 would otherwise
/// report ~1e-8, which fractional powers d^{2H} amplify far beyond roundoff.
inline double geodesic_distance(const SpherePoint& x, const SpherePoint& y) {
  if (x.unit_vector == y.unit_vector) return 0.0;
  const double dot = x.unit_vector[0] * y.unit_vector[0] + x.unit_vector[1] * y.unit_vector[1] +
                     x.unit_vector[2] * y.unit_vector[2];
  return std::acos(std::clamp(dot, -1.0, 1.0));
}

/// i.i.d. uniform points: z uniform on [-1,1], longitude uniform on [0,2*pi).
inline std::vector<SpherePoint> sample_uniform(RandomStream stream, std::size_t n) {
  Rng rng(stream);
  std::vector<SpherePoint> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 2.0 * rng.next_unit() - 1.0;
    const double phi = 2.0 * pi * (rng.next_unit() - 0x1.0p-53);
    pts.push_back(from_angles(std::acos(std::clamp(z, -1.0, 1.0)), phi));
  }
  return pts;
}

/// Deterministic quasi-uniform spiral point set (golden-angle lattice).
inline std::vector<SpherePoint> fibonacci_grid(std::size_t n) {
  if (n < 1) throw usage_error("fibonacci_grid: need at least one point");
  const double golden_angle = pi * (3.0 - std::sqrt(5.0));
  std::vector<SpherePoint> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / static_cast<double>(n);
    pts.push_back(from_angles(std::acos(std::clamp(z, -1.0, 1.0)), golden_angle * i));
  }
  return pts;
}

/// Displace x by geodesic distance s along a tangent direction chosen by
/// the angle alpha within the tangent plane.
inline SpherePoint geodesic_step(const SpherePoint& x, double alpha, double s) {
  // orthonormal tangent basis at x
  const auto& u = x.unit_vector;
  std::array<double, 3> a{};
  if (std::abs(u[2]) < 0.9) {
    a = {-u[1], u[0], 0.0};  // e_z x u
  } else {
    a = {0.0, -u[2], u[1]};  // e_x x u
  }
  double na = std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
  for (auto& v : a) v /= na;
  const std::array<double, 3> b = {u[1] * a[2] - u[2] * a[1], u[2] * a[0] - u[0] * a[2],
                                   u[0] * a[1] - u[1] * a[0]};
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  const double cs = std::cos(s), ss = std::sin(s);
  return from_vector(cs * u[0] + ss * (ca * a[0] + sa * b[0]),
                     cs * u[1] + ss * (ca * a[1] + sa * b[1]),
                     cs * u[2] + ss * (ca * a[2] + sa * b[2]));
}

}  // namespace sfbm

#endif  // SFBM_SPHERE_HPP
