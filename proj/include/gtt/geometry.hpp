#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "gtt/algebra.hpp"

namespace gtt {

template <typename Scalar>
struct Ray {
  Vector3<Scalar> origin;
  Vector3<Scalar> direction;  // unit length

  Vector3<Scalar> at(Scalar t) const { return origin + t * direction; }
};

/// Hits at or below this distance are ignored (self-intersection guard).
template <typename Scalar>
inline constexpr Scalar kHitEpsilon = Scalar(1e-4);

/// Nearest root of |o + t d - c|^2 = r^2 with t > t_min.
template <typename Scalar>
std::optional<Scalar> intersect_sphere(const Ray<Scalar>& ray,
                                       const Vector3<Scalar>& center,
                                       Scalar radius,
                                       Scalar t_min = kHitEpsilon<Scalar>) {
  const Vector3<Scalar> oc = ray.origin - center;
  const Scalar half_b = oc.dot(ray.direction);
  const Scalar c = oc.squaredNorm() - radius * radius;
  const Scalar disc = half_b * half_b - c;
  if (disc < Scalar(0)) return std::nullopt;
  const Scalar root = std::sqrt(disc);
  // Numerically stable pair: q = -(half_b + sign(half_b) * root).
  const Scalar q = half_b > Scalar(0) ? -(half_b + root) : -(half_b - root);
  Scalar t0 = q;
  Scalar t1 = q != Scalar(0) ? c / q : Scalar(0);
  if (t0 > t1) std::swap(t0, t1);
  if (t0 > t_min) return t0;
  if (t1 > t_min) return t1;
  return std::nullopt;
}

/// Möller-Trumbore ray/triangle test, two-sided.
template <typename Scalar>
std::optional<Scalar> intersect_triangle(const Ray<Scalar>& ray,
                                         const Vector3<Scalar>& v0,
                                         const Vector3<Scalar>& v1,
                                         const Vector3<Scalar>& v2,
                                         Scalar t_min = kHitEpsilon<Scalar>) {
  const Vector3<Scalar> e1 = v1 - v0;
  const Vector3<Scalar> e2 = v2 - v0;
  const Vector3<Scalar> p = ray.direction.cross(e2);
  const Scalar det = e1.dot(p);
  if (std::abs(det) < std::numeric_limits<Scalar>::epsilon() * e1.norm() * e2.norm()) {
    return std::nullopt;
  }
  const Scalar inv_det = Scalar(1) / det;
  const Vector3<Scalar> s = ray.origin - v0;
  const Scalar u = s.dot(p) * inv_det;
  if (u < Scalar(0) || u > Scalar(1)) return std::nullopt;
  const Vector3<Scalar> q = s.cross(e1);
  const Scalar v = ray.direction.dot(q) * inv_det;
  if (v < Scalar(0) || u + v > Scalar(1)) return std::nullopt;
  const Scalar t = e2.dot(q) * inv_det;
  if (t > t_min) return t;
  return std::nullopt;
}

/// Right-handed orthonormal basis around a unit normal (Duff et al. 2017).
template <typename Scalar>
void orthonormal_basis(const Vector3<Scalar>& n, Vector3<Scalar>& t,
                       Vector3<Scalar>& b) {
  const Scalar sign = std::copysign(Scalar(1), n.z());
  const Scalar a = Scalar(-1) / (sign + n.z());
  const Scalar bxy = n.x() * n.y() * a;
  t = Vector3<Scalar>(Scalar(1) + sign * n.x() * n.x() * a, sign * bxy, -sign * n.x());
  b = Vector3<Scalar>(bxy, sign + n.y() * n.y() * a, -n.y());
}

/// Cosine-weighted direction on the hemisphere around `n`; pdf = cos(theta)/pi.
template <typename Scalar>
Vector3<Scalar> sample_cosine_hemisphere(const Vector3<Scalar>& n, Scalar u1,
                                         Scalar u2) {
  const Scalar r = std::sqrt(u1);
  const Scalar phi = Scalar(2) * std::numbers::pi_v<Scalar> * u2;
  const Scalar z = std::sqrt(std::max(Scalar(0), Scalar(1) - u1));
  Vector3<Scalar> t, b;
  orthonormal_basis(n, t, b);
  return (r * std::cos(phi) * t + r * std::sin(phi) * b + z * n).normalized();
}

}  // namespace gtt
