#pragma once

#include <cmath>
#include <cstdlib>

#include "grazing/angular_kernels.hpp"
#include "grazing/error.hpp"
#include "grazing/vec3.hpp"

namespace grazing {

/// Orthogonal pair spanning the plane normal to X, each of norm |X|.
struct Frame {
  Vec3 I;
  Vec3 J;
};

namespace detail {

inline int least_aligned_axis(const Vec3& u) {
  int axis = 0;
  for (int k = 1; k < 3; ++k)
    if (std::abs(u[k]) < std::abs(u[axis])) axis = k;
  return axis;
}

inline double leading_sign(const Vec3& X) {
  for (int k = 0; k < 3; ++k)
    if (X[k] != 0.0) return X[k] > 0.0 ? 1.0 : -1.0;
  return 1.0;
}

// Unit-free direction e_axis - (e_axis . u) u rescaled to norm r. Even in X, bitwise.
inline Vec3 even_normal(const Vec3& u, double r) {
  const int axis = least_aligned_axis(u);
  Vec3 p = -u[axis] * u;
  p[axis] += 1.0;
  return p * (r / norm(p));
}

}  // namespace detail

/// Deterministic frame of X with I(-X) = -I(X) bitwise.
///
/// (X/|X|, I/|X|, J/|X|) is always positively oriented, so J(-X) = J(X).
/// Keeping a single orientation is what makes the Tanaka alignment
/// |Gamma(X, phi) - Gamma(Y, phi + phi0)| <= 3|X - Y| possible; see frame_odd.
inline Frame frame(const Vec3& X) {
  const double r = norm(X);
  if (!(r > 0.0)) throw DegenerateInputError("frame of the zero vector");
  const Vec3 u = X / r;
  const Vec3 I = detail::leading_sign(X) * detail::even_normal(u, r);
  return {I, cross(u, I)};
}

/// Frame with both I and J odd in X. Its orientation flips across the plane
/// where the leading component of X changes sign, so no rotation phi0 can align
/// frames of nearby X, Y on opposite sides. Kept for comparison only.
inline Frame frame_odd(const Vec3& X) {
  const double r = norm(X);
  if (!(r > 0.0)) throw DegenerateInputError("frame of the zero vector");
  const Vec3 u = X / r;
  const double s = detail::leading_sign(X);
  const Vec3 p = detail::even_normal(u, r);
  return {s * p, s * cross(s * u, p)};
}

inline Vec3 gamma_vec(const Frame& f, double phi) { return std::cos(phi) * f.I + std::sin(phi) * f.J; }

/// Gamma(X, phi) = cos(phi) I(X) + sin(phi) J(X).
inline Vec3 gamma_vec(const Vec3& X, double phi) { return gamma_vec(frame(X), phi); }

inline double phi_zero(const Frame& fx, const Frame& fy) {
  const double a = dot(fx.I, fy.I) + dot(fx.J, fy.J);
  const double b = dot(fx.I, fy.J) - dot(fx.J, fy.I);
  const double p = std::atan2(b, a);
  return p < 0.0 ? p + 2.0 * kPi : p;
}

/// Rotation phi0 maximizing the mean alignment of Gamma(X, .) and Gamma(Y, . + phi0).
inline double phi_zero(const Vec3& X, const Vec3& Y) { return phi_zero(frame(X), frame(Y)); }

struct Deviation {
  Vec3 v_prime;
  Vec3 v_star_prime;
  Vec3 a;
};

/// Displacement a of v for deviation angle theta about the relative velocity X = v - v_star.
inline Vec3 displacement(const Vec3& X, const Frame& f, double theta, double phi) {
  const double s = std::sin(0.5 * theta);
  const double c = std::cos(0.5 * theta);
  return -(s * s) * X + (s * c) * gamma_vec(f, phi);
}

inline Deviation deviate(const Vec3& v, const Vec3& v_star, double theta, double phi) {
  if (v == v_star) return {v, v_star, {}};
  const Vec3 X = v - v_star;
  const Vec3 a = displacement(X, frame(X), theta, phi);
  return {v + a, v_star - a, a};
}

/// c(v, v_star, z, phi) = a(v, v_star, G(z / Phi(|v - v_star|)), phi).
inline Vec3 jump_c(const AngularKernel& k, const Vec3& v, const Vec3& v_star, double z, double phi) {
  const Vec3 X = v - v_star;
  const double r = norm(X);
  if (r == 0.0) return {};
  const double theta = k.inverse(z / k.velocity_factor(r));
  if (theta == 0.0) return {};
  return displacement(X, frame(X), theta, phi);
}

/// d(v, v_star, z, phi) = G(z / Phi) Gamma(v - v_star, phi) / 2.
inline Vec3 jump_d(const AngularKernel& k, const Vec3& v, const Vec3& v_star, double z, double phi) {
  const Vec3 X = v - v_star;
  const double r = norm(X);
  if (r == 0.0) return {};
  const double theta = k.inverse(z / k.velocity_factor(r));
  return 0.5 * theta * gamma_vec(frame(X), phi);
}

/// -k_res Phi(|X|) X with a precomputed residual constant.
inline Vec3 residual_drift(const AngularKernel& k, double k_res, const Vec3& X) {
  const double r = norm(X);
  if (r == 0.0 || k_res == 0.0) return {};
  return -(k_res * k.velocity_factor(r)) * X;
}

/// Drift standing in for the uncompensated jumps with theta < theta_min.
///
/// Uses int_0^{2pi} a dphi = -pi (1 - cos theta)(v - v_star), so together with
/// the compensator of the retained jumps it reproduces -k Phi (v - v_star).
inline Vec3 compensator_drift(const AngularKernel& k, const Vec3& v, const Vec3& v_star, double theta_min) {
  if (!(theta_min > 0.0 && theta_min <= kPi)) throw ParameterError("theta_min must lie in (0, pi]");
  return residual_drift(k, k_residual(k, theta_min), v - v_star);
}

}  // namespace grazing
