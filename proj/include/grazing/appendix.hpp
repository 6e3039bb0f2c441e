#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>
#include <boost/numeric/odeint.hpp>

#include "grazing/error.hpp"
#include "grazing/quadrature.hpp"
#include "grazing/rng.hpp"
#include "grazing/transport_metrics.hpp"
#include "grazing/vec3.hpp"

namespace grazing {

/// psi(x) = x (1 - 1_{x <= 1} log x).
inline double psi(double x) {
  if (x < 0.0) throw ParameterError("psi is defined on [0, inf)");
  if (x == 0.0) return 0.0;
  return x <= 1.0 ? x * (1.0 - std::log(x)) : x;
}

/// Two-piece comparison function within a factor 2 of psi.
inline double psi_tilde(double x) {
  if (x < 0.0) throw ParameterError("psi_tilde is defined on [0, inf)");
  if (x == 0.0) return 0.0;
  return x <= 0.5 ? x * (1.0 - std::log(x)) : x * std::log(2.0) + 0.5;
}

/// C(K) = e^K e^(e^K - 1) + e^(1 - e^-K).
inline double gronwall_constant(double K) {
  return std::exp(K) * std::exp(std::exp(K) - 1.0) + std::exp(1.0 - std::exp(-K));
}

/// Nonnegative rate gamma(t) with optional discontinuity points.
struct GammaFn {
  std::function<double(double)> f;
  std::vector<double> breaks;
};

struct GronwallReport {
  double a = 0.0;
  double K = 0.0;
  double rho_rk4 = 0.0;
  double rho_dp = 0.0;
  double envelope = 0.0;  ///< C(K) (a^(e^-K) + a)
  double rel_agreement = 0.0;
  bool holds = false;
};

/// Integrates rho' = gamma(t) psi(rho), rho(0) = a, with fixed-step RK4 and an
/// adaptive Dormand-Prince pair, and compares rho(T) with the envelope.
inline GronwallReport gronwall_bound_check(double a, const GammaFn& gamma, double T, int steps = 100000) {
  namespace ode = boost::numeric::odeint;
  if (!(a >= 0.0) || !std::isfinite(a)) throw ParameterError("a must be finite and >= 0");
  if (!(T > 0.0)) throw ParameterError("T must be positive");
  if (steps < 1) throw ParameterError("steps must be positive");
  std::vector<double> nodes = {0.0};
  for (double b : gamma.breaks)
    if (b > 0.0 && b < T) nodes.push_back(b);
  std::sort(nodes.begin(), nodes.end());
  nodes.push_back(T);

  GronwallReport rep;
  rep.a = a;
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    double piece = 0.0;
    try {
      piece = quad::integrate(
          [&](double t) {
            const double g = gamma.f(t);
            if (!(g >= 0.0)) throw ParameterError("gamma must be >= 0");
            return g;
          },
          nodes[k], nodes[k + 1], quad::Singular::kBoth);
    } catch (const NumericalError&) {
      throw ParameterError("gamma is not integrable on [0, T]");
    }
    if (!std::isfinite(piece)) throw ParameterError("gamma is not integrable on [0, T]");
    rep.K += piece;
  }

  using State = std::array<double, 1>;
  auto rhs = [&](const State& x, State& dx, double t) { dx[0] = gamma.f(t) * psi(std::max(x[0], 0.0)); };
  State fixed{a}, adapt{a};
  ode::runge_kutta4<State> rk4;
  auto dp = ode::make_controlled(1e-14, 1e-13, ode::runge_kutta_dopri5<State>());
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    const double t0 = nodes[k], t1 = nodes[k + 1];
    const int n = std::max(1, static_cast<int>(std::ceil(steps * (t1 - t0) / T)));
    // step just inside each piece so the rate is sampled on the correct side of a break
    const double lo = std::nextafter(t0, t1), hi = std::nextafter(t1, t0);
    ode::integrate_n_steps(rk4, rhs, fixed, lo, (hi - lo) / n, n);
    ode::integrate_adaptive(dp, rhs, adapt, lo, hi, (hi - lo) / 1000.0);
  }
  rep.rho_rk4 = fixed[0];
  rep.rho_dp = adapt[0];
  rep.envelope = gronwall_constant(rep.K) * (std::pow(a, std::exp(-rep.K)) + a);
  rep.rel_agreement = std::abs(rep.rho_rk4 - rep.rho_dp) / std::max(std::abs(rep.rho_dp), 1e-300);
  if (a == 0.0) rep.rel_agreement = std::abs(rep.rho_rk4 - rep.rho_dp);
  rep.holds = rep.rho_rk4 <= rep.envelope && rep.rho_dp <= rep.envelope;
  return rep;
}

// ----------------------------------------------------------- Poisson vs Gaussian

struct Atom {
  Vec3 h;
  double w = 1.0;
};

struct PoissonIntegralSpec {
  std::vector<Atom> atoms;
  double t = 1.0;
};

struct PoissonGaussianReport {
  double t = 0.0;
  double kappa = 0.0;
  double gamma_norm = 0.0;  ///< spectral norm of Gamma
  double envelope = 0.0;    ///< kappa^2 |Gamma| max(1, log(t / kappa^2))^2
  double w2_sq = 0.0;       ///< Poisson sample vs Gaussian sample
  double control_w2_sq = 0.0;  ///< two independent Gaussian samples
  double ratio = 0.0;
  double control_ratio = 0.0;
  Vec3 sample_mean;
  Eigen::Matrix3d sample_cov = Eigen::Matrix3d::Zero();
  bool degenerate = false;  ///< all jumps vanish; both laws are the point mass at 0
};

inline Eigen::Matrix3d atom_covariance(const std::vector<Atom>& atoms) {
  Eigen::Matrix3d G = Eigen::Matrix3d::Zero();
  for (const Atom& a : atoms) {
    if (!(a.w >= 0.0)) throw ParameterError("atom weights must be >= 0");
    const Eigen::Vector3d h = to_eigen(a.h);
    G += a.w * h * h.transpose();
  }
  return G;
}

/// Empirical W2 between the compensated Poisson integral and N(0, t Gamma),
/// scaled by the envelope; a second Gaussian sample gives the same-law control.
inline PoissonGaussianReport poisson_gaussian_w2(const PoissonIntegralSpec& spec, std::size_t samples,
                                                 std::uint64_t seed) {
  if (samples < 1000) throw ParameterError("sample_count must be at least 1000");
  if (spec.atoms.empty()) throw ParameterError("atom set is empty");
  if (!(spec.t > 0.0)) throw ParameterError("horizon t must be positive");
  PoissonGaussianReport rep;
  rep.t = spec.t;
  const Eigen::Matrix3d G = atom_covariance(spec.atoms);
  if (G.isZero(0.0)) {
    rep.degenerate = true;
    return rep;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(G);
  const Eigen::Vector3d ev = es.eigenvalues();
  if (!(ev.minCoeff() > 1e-12 * ev.maxCoeff())) throw ParameterError("Gamma is singular; the atoms must span R^3");
  const Eigen::Matrix3d U = es.eigenvectors();
  const Eigen::Matrix3d root = U * ev.cwiseSqrt().asDiagonal() * U.transpose();
  const Eigen::Matrix3d inv_root = U * ev.cwiseSqrt().cwiseInverse().asDiagonal() * U.transpose();
  for (const Atom& a : spec.atoms) rep.kappa = std::max(rep.kappa, (inv_root * to_eigen(a.h)).norm());
  rep.gamma_norm = ev.maxCoeff();
  const double lg = std::max(1.0, std::log(spec.t / (rep.kappa * rep.kappa)));
  rep.envelope = rep.kappa * rep.kappa * rep.gamma_norm * lg * lg;

  std::vector<Vec3> P(samples), N1(samples), N2(samples);
  const double st = std::sqrt(spec.t);
  for (std::size_t s = 0; s < samples; ++s) {
    CounterRng rng(seed, Stream::kVerifier, 0, static_cast<std::uint32_t>(s));
    Vec3 z{};
    for (const Atom& a : spec.atoms) {
      const double mean = spec.t * a.w;
      const double k = mean > 0.0 ? static_cast<double>(std::poisson_distribution<std::uint64_t>(mean)(rng)) : 0.0;
      z += (k - mean) * a.h;
    }
    P[s] = z;
    CounterRng g1(seed, Stream::kVerifier, 1, static_cast<std::uint32_t>(s));
    CounterRng g2(seed, Stream::kVerifier, 2, static_cast<std::uint32_t>(s));
    N1[s] = from_eigen(st * root * Eigen::Vector3d(g1.normal(), g1.normal(), g1.normal()));
    N2[s] = from_eigen(st * root * Eigen::Vector3d(g2.normal(), g2.normal(), g2.normal()));
  }
  Vec3 m{};
  for (const Vec3& z : P) m += z / static_cast<double>(samples);
  rep.sample_mean = m;
  for (const Vec3& z : P) {
    const Eigen::Vector3d d = to_eigen(z - m);
    rep.sample_cov += d * d.transpose() / static_cast<double>(samples - 1);
  }
  rep.w2_sq = w2_squared_exact(P, N1);
  rep.control_w2_sq = w2_squared_exact(N2, N1);
  rep.ratio = rep.w2_sq / rep.envelope;
  rep.control_ratio = rep.control_w2_sq / rep.envelope;
  return rep;
}

/// Three orthogonal unit jumps with unit intensity.
inline PoissonIntegralSpec orthogonal_atoms(double t, double scale = 1.0, double w = 1.0) {
  return {{{{scale, 0, 0}, w}, {{0, scale, 0}, w}, {{0, 0, scale}, w}}, t};
}

}  // namespace grazing
