#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "grazing/error.hpp"
#include "grazing/quadrature.hpp"

namespace grazing {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Amplitude c_nu making beta(theta) = c_nu theta^(-1-nu) satisfy int theta^2 beta = 4/pi.
inline double soft_normalizer(double nu) {
  if (!(nu > 0.0 && nu < 2.0)) throw ParameterError("nu must lie in (0, 2), got " + std::to_string(nu));
  return 4.0 * (2.0 - nu) / std::pow(kPi, 3.0 - nu);
}

/// Closed-form normalizer of the Coulomb grazing kernel; 2 pi c_eps -> 1 as eps -> 0.
inline double coulomb_normalizer(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw ParameterError("Coulomb eps must lie in (0, 1), got " + std::to_string(eps));
  const double s = std::sin(0.5 * eps);
  const double c = std::cos(0.5 * eps);
  const double denom = eps * eps / (s * s) + 4.0 * eps * c / s + 8.0 * std::log(1.0 / (std::sqrt(2.0) * s)) -
                       0.5 * kPi * kPi - 2.0 * kPi;
  return (4.0 / kPi) * std::log(1.0 / eps) / denom;
}

/// beta(theta) = c_nu theta^(-1-nu) on (0, pi], velocity factor r^gamma.
struct SoftKernel {
  double gamma = -0.5;
  double nu = 0.6;
  double c_nu = 0.0;

  static SoftKernel make(double gamma, double nu) {
    if (!(gamma > -3.0 && gamma < 0.0)) throw ParameterError("gamma must lie in (-3, 0), got " + std::to_string(gamma));
    return {gamma, nu, soft_normalizer(nu)};
  }

  double lo() const { return 0.0; }
  double hi() const { return kPi; }

  double beta(double th) const { return (th > 0.0 && th <= kPi) ? c_nu * std::pow(th, -1.0 - nu) : 0.0; }

  double tail(double th) const {
    if (th >= kPi) return 0.0;
    if (th <= 0.0) return kInf;
    return (c_nu / nu) * (std::pow(th, -nu) - std::pow(kPi, -nu));
  }

  double inverse(double z) const {
    if (z <= 0.0) return kPi;
    if (z == kInf) return 0.0;
    return std::pow(nu * z / c_nu + std::pow(kPi, -nu), -1.0 / nu);
  }

  double z_max() const { return kInf; }
};

/// beta_eps(theta) = (pi/eps)^3 beta(pi theta / eps) on (0, eps).
struct GrazingKernel {
  SoftKernel base;
  double eps = kPi;

  static GrazingKernel make(double gamma, double nu, double eps) {
    if (!(eps > 0.0 && eps <= kPi)) throw ParameterError("grazing eps must lie in (0, pi], got " + std::to_string(eps));
    return {SoftKernel::make(gamma, nu), eps};
  }

  double lo() const { return 0.0; }
  double hi() const { return eps; }

  double beta(double th) const {
    if (!(th > 0.0 && th < eps)) return 0.0;
    const double s = kPi / eps;
    return s * s * s * base.beta(s * th);
  }

  double tail(double th) const {
    if (th >= eps) return 0.0;
    const double s = kPi / eps;
    return s * s * base.tail(s * th);
  }

  double inverse(double z) const {
    const double s = eps / kPi;
    return s * base.inverse(s * s * z);
  }

  double z_max() const { return kInf; }
};

/// (c_eps / log(1/eps)) cos(theta/2) / sin^3(theta/2) on [eps, pi/2], velocity factor (r + h_eps)^-3.
struct CoulombKernel {
  double eps = 0.1;
  double h_eps = 0.1;
  double c_eps = 0.0;

  static CoulombKernel make(double eps, double h_eps) {
    if (!(h_eps >= 0.0 && h_eps < 1.0)) throw ParameterError("h_eps must lie in [0, 1), got " + std::to_string(h_eps));
    return {eps, h_eps, coulomb_normalizer(eps)};
  }

  double amplitude() const { return c_eps / std::log(1.0 / eps); }

  double lo() const { return eps; }
  double hi() const { return 0.5 * kPi; }

  double beta(double th) const {
    if (!(th >= eps && th <= 0.5 * kPi)) return 0.0;
    const double s = std::sin(0.5 * th);
    return amplitude() * std::cos(0.5 * th) / (s * s * s);
  }

  double tail(double th) const {
    if (th >= 0.5 * kPi) return 0.0;
    const double s = std::sin(0.5 * std::max(th, eps));
    return amplitude() * (1.0 / (s * s) - 2.0);
  }

  double inverse(double z) const {
    if (z >= z_max()) return 0.0;
    return 2.0 * std::asin(1.0 / std::sqrt(std::max(z, 0.0) / amplitude() + 2.0));
  }

  double z_max() const {
    const double s = std::sin(0.5 * eps);
    return amplitude() * (1.0 / (s * s) - 2.0);
  }
};

enum class Family { kSoft, kGrazing, kCoulomb };

inline std::string to_string(Family f) {
  switch (f) {
    case Family::kSoft:
      return "soft";
    case Family::kGrazing:
      return "grazing";
    case Family::kCoulomb:
      return "coulomb";
  }
  return "?";
}

inline Family parse_family(const std::string& s) {
  if (s == "soft") return Family::kSoft;
  if (s == "grazing") return Family::kGrazing;
  if (s == "coulomb") return Family::kCoulomb;
  throw ParameterError("unknown kernel family '" + s + "' (expected soft, grazing or coulomb)");
}

/// Angular cross-section together with its velocity factor Phi.
class AngularKernel {
 public:
  AngularKernel(SoftKernel k) : k_(k) {}
  AngularKernel(GrazingKernel k) : k_(k) {}
  AngularKernel(CoulombKernel k) : k_(k) {}

  Family family() const { return static_cast<Family>(k_.index()); }

  double gamma() const {
    return std::visit(
        [](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, SoftKernel>) return k.gamma;
          else if constexpr (std::is_same_v<K, GrazingKernel>) return k.base.gamma;
          else return -3.0;
        },
        k_);
  }

  /// Grazing parameter; pi for an unscaled soft kernel.
  double eps() const {
    if (auto* g = std::get_if<GrazingKernel>(&k_)) return g->eps;
    if (auto* c = std::get_if<CoulombKernel>(&k_)) return c->eps;
    return kPi;
  }

  double lo() const { return std::visit([](const auto& k) { return k.lo(); }, k_); }
  double hi() const { return std::visit([](const auto& k) { return k.hi(); }, k_); }
  double beta(double th) const { return std::visit([th](const auto& k) { return k.beta(th); }, k_); }

  /// H(theta) = int_theta^pi beta.
  double tail(double th) const { return std::visit([th](const auto& k) { return k.tail(th); }, k_); }
  /// G = H^-1, extended by 0 beyond z_max.
  double inverse(double z) const { return std::visit([z](const auto& k) { return k.inverse(z); }, k_); }
  double z_max() const { return std::visit([](const auto& k) { return k.z_max(); }, k_); }

  /// Phi(r): r^gamma for soft families, (r + h_eps)^-3 for Coulomb.
  double velocity_factor(double r) const {
    if (auto* c = std::get_if<CoulombKernel>(&k_)) {
      const double s = r + c->h_eps;
      return 1.0 / (s * s * s);
    }
    return std::pow(r, gamma());
  }

  /// Soft families have an integrable power singularity at theta = 0.
  quad::Singular singularity() const {
    return family() == Family::kCoulomb ? quad::Singular::kNone : quad::Singular::kLeft;
  }

  const auto& variant() const { return k_; }

 private:
  std::variant<SoftKernel, GrazingKernel, CoulombKernel> k_;
};

/// Textual kernel description as it appears in config files.
struct KernelSpec {
  Family family = Family::kGrazing;
  double gamma = -0.5;
  double nu = 0.6;
  double eps = kPi;
  double h_eps = -1.0;  // negative selects the default schedule h_eps = eps
};

inline AngularKernel make_kernel(const KernelSpec& s) {
  switch (s.family) {
    case Family::kSoft:
      return SoftKernel::make(s.gamma, s.nu);
    case Family::kGrazing:
      return GrazingKernel::make(s.gamma, s.nu, s.eps);
    case Family::kCoulomb:
      return CoulombKernel::make(s.eps, s.h_eps < 0.0 ? s.eps : s.h_eps);
  }
  throw ParameterError("unknown kernel family");
}

/// Closed-form H and G of a kernel with the simulable jump bound.
class TailInverse {
 public:
  explicit TailInverse(AngularKernel k) : k_(std::move(k)) {}
  double H(double th) const { return k_.tail(th); }
  double G(double z) const { return k_.inverse(z); }
  double z_max() const { return k_.z_max(); }
  const AngularKernel& kernel() const { return k_; }

 private:
  AngularKernel k_;
};

inline TailInverse tail_inverse(const AngularKernel& k) { return TailInverse(k); }

/// int_{a}^{b} f(theta) beta(theta) dtheta restricted to the kernel support.
template <class F>
double angular_integral(const AngularKernel& k, F&& f, double a, double b) {
  const double lo = std::max(a, k.lo());
  const double hi = std::min(b, k.hi());
  if (!(hi > lo)) return 0.0;
  const quad::Singular sing = (lo == 0.0) ? k.singularity() : quad::Singular::kNone;
  return quad::integrate([&](double th) { return f(th) * k.beta(th); }, lo, hi, sing);
}

/// int_0^pi theta^power beta(theta) dtheta.
inline double theta_moment(const AngularKernel& k, double power) {
  if (k.family() != Family::kCoulomb) {
    const double nu = k.family() == Family::kSoft ? std::get<SoftKernel>(k.variant()).nu
                                                  : std::get<GrazingKernel>(k.variant()).base.nu;
    if (!(power > nu)) throw ParameterError("theta moment of order <= nu diverges at theta = 0");
  } else if (power < 0.0) {
    throw ParameterError("theta moment order must be non-negative");
  }
  return angular_integral(k, [power](double th) { return std::pow(th, power); }, 0.0, kPi);
}

inline double one_minus_cos(double th) {
  const double s = std::sin(0.5 * th);
  return 2.0 * s * s;
}

/// k = pi int (1 - cos theta) beta.
inline double k_constant(const AngularKernel& k) { return kPi * angular_integral(k, one_minus_cos, 0.0, kPi); }

/// Residual drift constant pi int_0^theta_min (1 - cos theta) beta of the truncated small jumps.
inline double k_residual(const AngularKernel& k, double theta_min) {
  return kPi * angular_integral(k, one_minus_cos, 0.0, theta_min);
}

/// r_eta = (pi/4) int_0^eta theta^2 beta.
inline double r_eta(const AngularKernel& k, double eta) {
  if (!(eta > 0.0 && eta <= kPi)) throw ParameterError("eta must lie in (0, pi]");
  return 0.25 * kPi * angular_integral(k, [](double th) { return th * th; }, 0.0, eta);
}

/// I(x, y) = int_0^inf (G(z/x) - G(z/y))^2 dz, evaluated as bounded angular integrals.
inline double tail_gap_integral(const AngularKernel& k, double x, double y) {
  if (!(x > 0.0 && y > 0.0)) throw ParameterError("tail gap integral needs x, y > 0");
  if (x == y) return 0.0;
  if (x > y) std::swap(x, y);
  const double rho = x / y;
  // z = x H(theta) maps (lo, hi] onto [0, x z_max).
  const double main = x * angular_integral(
                              k,
                              [&](double th) {
                                const double d = th - k.inverse(rho * k.tail(th));
                                return d * d;
                              },
                              0.0, kPi);
  if (!std::isfinite(k.z_max())) return main;
  // z in [x z_max, y z_max): only G(z/y) is nonzero; substitute z = y H(theta).
  const double th_star = k.inverse(rho * k.z_max());
  const double rest = y * angular_integral(k, [](double th) { return th * th; }, 0.0, th_star);
  return main + rest;
}

struct ScalingReport {
  double max_rel_diff = 0.0;  ///< max over pairs and eps of |I_eps - I_pi| / I_pi
  double max_ratio = 0.0;     ///< max of I_pi / ((x-y)^2/(x+y))
  double min_ratio = kInf;
  std::size_t pairs = 0;
};

/// Checks that the tail gap integral of the grazing rescaling does not depend on eps.
inline ScalingReport verify_scaling_A4(const SoftKernel& base, const std::vector<double>& eps_list,
                                       const std::vector<std::pair<double, double>>& xy) {
  ScalingReport rep;
  const AngularKernel ref(GrazingKernel{base, kPi});
  for (const auto& [x, y] : xy) {
    const double i_pi = tail_gap_integral(ref, x, y);
    ++rep.pairs;
    if (x == y) continue;
    const double scale = (x - y) * (x - y) / (x + y);
    rep.max_ratio = std::max(rep.max_ratio, i_pi / scale);
    rep.min_ratio = std::min(rep.min_ratio, i_pi / scale);
    for (double e : eps_list) {
      const double i_e = tail_gap_integral(AngularKernel(GrazingKernel{base, e}), x, y);
      rep.max_rel_diff = std::max(rep.max_rel_diff, std::abs(i_e - i_pi) / i_pi);
    }
  }
  return rep;
}

struct A5Report {
  std::vector<double> eps;
  std::vector<double> sup_ratio;  ///< per eps
  double overall_sup = 0.0;
};

inline double a5_denominator(double eps, double x, double y) {
  const double mx = std::max(x, y);
  const double mn = std::min(x, y);
  return (x - y) * (x - y) / (x + y) + mx / std::log(1.0 / eps) * std::log(mx / mn);
}

/// Empirical supremum of the Coulomb tail gap integral over its log comparison quantity.
inline A5Report verify_A5(const std::vector<double>& eps_list, const std::vector<std::pair<double, double>>& xy,
                          double h_eps = 0.0) {
  A5Report rep;
  for (double e : eps_list) {
    const AngularKernel k(CoulombKernel::make(e, h_eps));
    double sup = 0.0;
    for (const auto& [x, y] : xy) {
      if (x == y) continue;
      sup = std::max(sup, tail_gap_integral(k, x, y) / a5_denominator(e, x, y));
    }
    rep.eps.push_back(e);
    rep.sup_ratio.push_back(sup);
    rep.overall_sup = std::max(rep.overall_sup, sup);
  }
  return rep;
}

}  // namespace grazing
