#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

#include "grazing/error.hpp"
#include "grazing/vec3.hpp"

namespace grazing {

namespace detail {

inline double landau_power(double r, double p, double delta) {
  const double s = std::max(r, delta);
  if (!(s > 0.0)) throw DegenerateInputError("Landau coefficient at z = 0 without regularization");
  return std::pow(s, p);
}

}  // namespace detail

/// l(z) = |z|^gamma (|z|^2 Id - z z^T); |z| -> max(|z|, delta) inside the power.
inline Eigen::Matrix3d l_eval(double gamma, const Vec3& z, double delta = 0.0) {
  const double r = norm(z);
  if (r == 0.0 && delta > 0.0) return Eigen::Matrix3d::Zero();
  const Eigen::Vector3d e = to_eigen(z);
  return detail::landau_power(r, gamma, delta) * (e.squaredNorm() * Eigen::Matrix3d::Identity() - e * e.transpose());
}

/// sigma(z) = |z|^(gamma/2) [[z2, -z3, 0], [-z1, 0, z3], [0, z1, -z2]], so that sigma sigma^T = l.
inline Eigen::Matrix3d sigma_eval(double gamma, const Vec3& z, double delta = 0.0) {
  const double r = norm(z);
  if (r == 0.0 && delta > 0.0) return Eigen::Matrix3d::Zero();
  const double s = detail::landau_power(r, 0.5 * gamma, delta);
  Eigen::Matrix3d m;
  m << z.y, -z.z, 0.0, -z.x, 0.0, z.z, 0.0, z.x, -z.y;
  return s * m;
}

/// sigma(z) xi without forming the matrix.
inline Vec3 sigma_apply(double gamma, const Vec3& z, const Vec3& xi, double delta = 0.0) {
  const double r = norm(z);
  if (r == 0.0 && delta > 0.0) return {};
  const double s = detail::landau_power(r, 0.5 * gamma, delta);
  return {s * (z.y * xi.x - z.z * xi.y), s * (-z.x * xi.x + z.z * xi.z), s * (z.x * xi.y - z.y * xi.z)};
}

/// b(z) = div l(z) = -2 |z|^gamma z.
inline Vec3 b_eval(double gamma, const Vec3& z, double delta = 0.0) {
  const double r = norm(z);
  if (r == 0.0 && delta > 0.0) return {};
  return (-2.0 * detail::landau_power(r, gamma, delta)) * z;
}

}  // namespace grazing
