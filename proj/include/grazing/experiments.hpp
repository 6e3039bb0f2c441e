#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <boost/math/distributions/chi_squared.hpp>

#include "grazing/boltzmann_sim.hpp"
#include "grazing/collision_geometry.hpp"
#include "grazing/landau_sim.hpp"
#include "grazing/particle_cloud.hpp"
#include "grazing/transport_metrics.hpp"

namespace grazing {

// ---------------------------------------------------------------- subdivision

struct Subdivision {
  std::vector<double> a;         ///< a_0 < ... < a_K = T
  int n = 1;
  std::vector<double> h_values;  ///< h(a_i) for i < K
  double T = 0.0;

  std::size_t slabs() const { return a.size(); }
  /// Sum over i < K of (a_{i+1} - a_i) h(a_i).
  double riemann_sum() const {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < a.size(); ++i) s += (a[i + 1] - a[i]) * h_values[i];
    return s;
  }
};

/// Nodes a_i in (i/2n, (2i+1)/4n] at the sampled minimizer of h, and a_K = T with K = floor(2nT).
inline Subdivision build_subdivision(const std::function<double(double)>& h, double T, int n, int samples = 32) {
  if (!(T > 0.0) || !std::isfinite(T)) throw ParameterError("subdivision horizon T must be positive");
  if (n < 1) throw ParameterError("subdivision resolution n must be >= 1");
  if (samples < 1) throw ParameterError("subdivision needs at least one sample per cell");
  const auto K = static_cast<int>(std::floor(2.0 * n * T));
  if (K < 1) throw ParameterError("subdivision needs 2nT >= 1");
  Subdivision s;
  s.n = n;
  s.T = T;
  const double cell = 1.0 / (4.0 * n);
  for (int i = 0; i < K; ++i) {
    const double left = i / (2.0 * n);
    double best_t = left + 0.5 * cell / samples, best_h = std::numeric_limits<double>::infinity();
    for (int j = 0; j < samples; ++j) {
      const double t = left + (j + 0.5) * cell / samples;
      const double v = h(t);
      if (!(v >= 0.0)) throw ParameterError("subdivision weight h must be finite and >= 0");
      if (v < best_h) {
        best_h = v;
        best_t = t;
      }
    }
    s.a.push_back(best_t);
    s.h_values.push_back(best_h);
  }
  s.a.push_back(T);
  return s;
}

/// The three structural properties of the construction.
struct SubdivisionCheck {
  bool first_node = false;  ///< a_0 < 1/n
  bool spacing = false;     ///< 1/4n < a_{i+1} - a_i < 1/n
  bool riemann = false;     ///< riemann_sum <= 3 int h + 3
  bool ok() const { return first_node && spacing && riemann; }
};

inline SubdivisionCheck check_subdivision(const Subdivision& s, double integral_h) {
  SubdivisionCheck c;
  const double n = s.n;
  c.first_node = !s.a.empty() && s.a[0] > 0.0 && s.a[0] < 1.0 / n;
  c.spacing = true;
  for (std::size_t i = 0; i + 1 < s.a.size(); ++i) {
    const double d = s.a[i + 1] - s.a[i];
    if (!(d > 1.0 / (4.0 * n) && d < 1.0 / n)) c.spacing = false;
  }
  c.riemann = s.riemann_sum() <= 3.0 * integral_h + 3.0;
  return c;
}

// ------------------------------------------------------------------- coupling

enum class CouplingLevel { kCommon, kGaussian };

inline std::string to_string(CouplingLevel l) { return l == CouplingLevel::kCommon ? "a" : "b"; }

inline CouplingLevel parse_coupling_level(const std::string& s) {
  if (s == "a" || s == "common") return CouplingLevel::kCommon;
  if (s == "b" || s == "gaussian") return CouplingLevel::kGaussian;
  throw ParameterError("unknown coupling level '" + s + "' (expected a or b)");
}

/// Shared randomness and slab structure for a Boltzmann/Landau pair of runs.
struct CouplingPlan {
  std::uint64_t seed = 1;
  Subdivision subdivision;
  CouplingLevel level = CouplingLevel::kGaussian;
  bool tanaka = true;
  double truncation = std::numeric_limits<double>::infinity();  ///< companions with |Y_j| >= M are not matched
  bool w2 = false;  ///< also compute w2_exact at every node
};

/// Exponent p/(2p+3) of the grazing rate.
inline double rate_exponent(double p) { return p / (2.0 * p + 3.0); }

/// Slab resolution n = ceil(n0 eps^(-2p/(2p+3))) and truncation M = sqrt(2 m2) eps^(-2/(2p+3)).
inline int default_resolution(double eps, double p, double n0) {
  return std::max(1, static_cast<int>(std::ceil(n0 * std::pow(eps, -2.0 * rate_exponent(p)))));
}

inline double default_truncation(double eps, double p, double m2) {
  return std::sqrt(2.0 * m2) * std::pow(eps, -2.0 / (2.0 * p + 3.0));
}

struct CoupledResult {
  std::vector<double> t;
  std::vector<double> paired_l2;
  std::vector<double> w2;  ///< NaN unless requested
  std::vector<double> m2_boltz;
  std::vector<double> m2_landau;
  std::size_t events = 0;
  std::vector<Vec3> V, Y;  ///< terminal clouds

  double terminal() const { return paired_l2.back(); }
  double sup() const { return *std::max_element(paired_l2.begin(), paired_l2.end()); }
};

inline double paired_l2(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += norm2(a[i] - b[i]);
  return std::sqrt(s / static_cast<double>(a.size()));
}

namespace detail {

// Symmetric square root and pseudo-inverse square root of a PSD 3x3 matrix.
struct PsdRoots {
  Eigen::Matrix3d root;
  Eigen::Matrix3d inv_root;
  int rank = 0;
};

inline PsdRoots psd_roots(const Eigen::Matrix3d& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es;
  es.computeDirect(m);
  const Eigen::Vector3d ev = es.eigenvalues();
  const double top = std::max(ev.maxCoeff(), 0.0);
  Eigen::Vector3d r, ir;
  PsdRoots out;
  for (int k = 0; k < 3; ++k) {
    if (ev(k) > 1e-10 * top && ev(k) > 0.0) {
      r(k) = std::sqrt(ev(k));
      ir(k) = 1.0 / r(k);
      ++out.rank;
    } else {
      r(k) = 0.0;
      ir(k) = 0.0;
    }
  }
  const Eigen::Matrix3d U = es.eigenvectors();
  out.root = U * r.asDiagonal() * U.transpose();
  out.inv_root = U * ir.asDiagonal() * U.transpose();
  return out;
}

inline Eigen::Matrix3d cross_projector(const Vec3& z) {
  const Eigen::Vector3d e = to_eigen(z);
  return e.squaredNorm() * Eigen::Matrix3d::Identity() - e * e.transpose();
}

// Replaces the radii of the whitened vectors by chi quantiles of their ranks,
// separately for each rank of the whitening, so the result is close to N(0, I_rank).
// Zero vectors (no jump in the slab) take the direction in `fallback`.
inline void gaussianize_radii(std::vector<Eigen::Vector3d>& w, const std::vector<int>& rank,
                              const std::vector<Eigen::Vector3d>& fallback) {
  for (int r = 1; r <= 3; ++r) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < w.size(); ++i)
      if (rank[i] == r) idx.push_back(i);
    if (idx.empty()) continue;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return w[a].norm() < w[b].norm(); });
    const boost::math::chi_squared_distribution<double> chi(r);
    const double m = static_cast<double>(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const double target = std::sqrt(boost::math::quantile(chi, (k + 0.5) / m));
      Eigen::Vector3d& x = w[idx[k]];
      if (x.norm() == 0.0) x = fallback[idx[k]];
      x *= target / x.norm();
    }
  }
}

}  // namespace detail

/// Runs Boltzmann (Nanbu mode) and Landau from the same cloud with shared companions.
///
/// Level a shares companion indices and the per-step streams. Level b also
/// matches, per particle and slab, the Landau Gaussian increment to the
/// aggregated small jumps of the Boltzmann particle: the jumps are projected
/// onto the Landau collision plane at the slab start (through the Tanaka
/// rotation when enabled), whitened, pushed to a Gaussian by ranks, coloured
/// with the Landau covariance and split over the steps of the slab.
inline CoupledResult coupled_run(const BoltzmannConfig& bc, const LandauConfig& lc, const CouplingPlan& plan,
                                 const ParticleCloud& initial) {
  if (bc.n != lc.n || initial.size() != bc.n) throw ParameterError("coupled configs must share N with the initial cloud");
  if (bc.mode != UpdateMode::kNanbu) throw ParameterError("coupled runs use the Nanbu update");
  if (bc.dt != lc.dt) throw ParameterError("coupled configs must share dt");
  const double m2 = moment(initial.v, 2.0);
  const BoltzmannSimulator bs(bc, m2);
  const LandauSimulator ls(lc, m2);
  if (bs.kernel().gamma() != lc.gamma) throw ParameterError("Landau gamma must match the Boltzmann kernel");
  const Subdivision& sub = plan.subdivision;
  if (sub.a.empty()) throw ParameterError("coupling plan has an empty subdivision");

  const auto n = static_cast<std::uint32_t>(bc.n);
  const double gamma = lc.gamma;
  const double delta = ls.reg_delta();
  const double r_band = bs.r_band();
  std::vector<Vec3> V = initial.v, Y = initial.v;

  CoupledResult res;
  auto record = [&](double t) {
    res.t.push_back(t);
    res.paired_l2.push_back(paired_l2(V, Y));
    res.w2.push_back(plan.w2 ? w2_exact(V, Y) : std::numeric_limits<double>::quiet_NaN());
    res.m2_boltz.push_back(moment(V, 2.0));
    res.m2_landau.push_back(moment(Y, 2.0));
  };
  record(0.0);

  std::uint32_t step = 0;
  double t0 = 0.0;
  std::vector<std::uint32_t> comp;
  std::vector<Vec3> Zs;
  std::vector<char> matched;
  std::vector<Vec3> xi;
  std::vector<double> hs;
  for (double t1 : sub.a) {
    const double len = t1 - t0;
    const auto ns = static_cast<std::uint32_t>(std::max(1.0, std::ceil(len / bc.dt * (1.0 - 1e-12))));
    const double h = len / ns;
    hs.assign(ns, h);
    comp.resize(static_cast<std::size_t>(ns) * n);
    Zs.resize(comp.size());
    matched.assign(comp.size(), 0);
    xi.assign(comp.size(), Vec3{});
    const std::vector<Vec3> Ya = Y;

    std::vector<Eigen::Vector3d> D(n, Eigen::Vector3d::Zero());
    std::vector<Eigen::Matrix3d> CD(n, Eigen::Matrix3d::Zero()), CL(n, Eigen::Matrix3d::Zero());

    // Boltzmann across the slab, recording the shadow of each jump in the Landau frame
    for (std::uint32_t s = 0; s < ns; ++s) {
      const std::vector<Vec3> old = V;
      for (std::uint32_t i = 0; i < n; ++i) {
        const std::size_t k = static_cast<std::size_t>(s) * n + i;
        const std::uint32_t j = BoltzmannSimulator::companion(plan.seed, step + s, i, n);
        comp[k] = j;
        const Vec3 Z = Ya[i] - Ya[j];
        Zs[k] = Z;
        CounterRng rng(plan.seed, Stream::kBoltzmann, step + s, i);
        const bool match = plan.level == CouplingLevel::kGaussian && norm2(Z) > 0.0 && norm(Ya[j]) < plan.truncation;
        if (!match) {
          V[i] = bs.advance(
              old[i], old[j], h, rng, [](const Vec3&, double u) { return 2.0 * kPi * u; },
              [](double, double, const Vec3&) {}, res.events);
          continue;
        }
        matched[k] = 1;
        const Frame fz = frame(Z);
        const bool tanaka = plan.tanaka;
        V[i] = bs.advance(
            old[i], old[j], h, rng,
            [&](const Vec3& X, double u) {
              const double psi = 2.0 * kPi * u;
              return tanaka ? psi - phi_zero(frame(X), fz) : psi;
            },
            [&](double theta, double u, const Vec3&) {
              D[i] += to_eigen(0.5 * theta * gamma_vec(fz, 2.0 * kPi * u));
            },
            res.events);
        const Eigen::Matrix3d P = detail::cross_projector(Z);
        const double r0 = norm(old[i] - old[j]);
        CD[i] += (h * bs.kernel().velocity_factor(std::max(r0, bs.v_floor())) * r_band) * P;
        CL[i] += (h * std::pow(std::max(norm(Z), delta), gamma)) * P;
      }
    }
    for (std::size_t k = 0; k < V.size(); ++k)
      if (!is_finite(V[k])) throw InstabilityError("non-finite Boltzmann velocity in coupled run", {k});

    // Landau increments: fresh Gaussians, then for matched particles conditioned on the target sum
    for (std::uint32_t s = 0; s < ns; ++s)
      for (std::uint32_t i = 0; i < n; ++i) {
        const std::size_t k = static_cast<std::size_t>(s) * n + i;
        CounterRng rng(plan.seed, Stream::kCouplingLandau, step + s, i);
        const Vec3 g{rng.normal(), rng.normal(), rng.normal()};
        const Vec3 Z = Zs[k];
        xi[k] = norm2(Z) > 0.0 ? std::sqrt(h) * sigma_apply(gamma, Z, g, delta) : std::sqrt(h) * g;
      }
    if (plan.level == CouplingLevel::kGaussian) {
      std::vector<Eigen::Vector3d> w(n);
      std::vector<int> rank(n);
      std::vector<Eigen::Vector3d> fallback(n);
      for (std::uint32_t i = 0; i < n; ++i) {
        const auto roots = detail::psd_roots(CD[i]);
        w[i] = roots.inv_root * D[i];
        rank[i] = roots.rank;
        // a direction inside the range of CD, used when no jump happened
        CounterRng rng(plan.seed, Stream::kCouplingMatch, step, n + i);
        const Eigen::Vector3d g(rng.normal(), rng.normal(), rng.normal());
        fallback[i] = roots.root * roots.root * roots.inv_root * roots.inv_root * g;
        if (fallback[i].norm() == 0.0) fallback[i] = g;
      }
      detail::gaussianize_radii(w, rank, fallback);
      for (std::uint32_t i = 0; i < n; ++i) {
        if (rank[i] == 0) continue;
        const auto lroots = detail::psd_roots(CL[i]);
        if (lroots.rank == 0) continue;
        const Eigen::Vector3d target = lroots.root * w[i];
        Eigen::Vector3d sum = Eigen::Vector3d::Zero();
        for (std::uint32_t s = 0; s < ns; ++s) {
          const std::size_t k = static_cast<std::size_t>(s) * n + i;
          if (matched[k]) sum += to_eigen(xi[k]);
        }
        const Eigen::Vector3d corr = lroots.inv_root * lroots.inv_root * (target - sum);
        for (std::uint32_t s = 0; s < ns; ++s) {
          const std::size_t k = static_cast<std::size_t>(s) * n + i;
          if (!matched[k]) continue;
          const Vec3 Z = Zs[k];
          const Eigen::Matrix3d l = (h * std::pow(std::max(norm(Z), delta), gamma)) * detail::cross_projector(Z);
          xi[k] += from_eigen(l * corr);
        }
      }
    }

    // Landau across the slab; planned increments are carried into the current collision plane
    for (std::uint32_t s = 0; s < ns; ++s) {
      const std::vector<Vec3> old = Y;
      for (std::uint32_t i = 0; i < n; ++i) {
        const std::size_t k = static_cast<std::size_t>(s) * n + i;
        const Vec3 z = old[i] - old[comp[k]];
        Vec3 noise;
        const double rz = norm(z);
        const double ra = norm(Zs[k]);
        if (ra > 0.0 && rz > 0.0) {
          const Frame fa = frame(Zs[k]);
          const double c1 = dot(xi[k], fa.I) / (ra * ra), c2 = dot(xi[k], fa.J) / (ra * ra);
          const double rho = std::hypot(c1, c2);
          const double alpha = std::atan2(c2, c1);
          const Frame fz = frame(z);
          const double scale = std::pow(std::max(rz, delta) / std::max(ra, delta), 0.5 * gamma);
          noise = (rho * scale) * gamma_vec(fz, alpha - phi_zero(fz, fa));
        } else if (rz > 0.0) {
          CounterRng rng(plan.seed, Stream::kCouplingMatch, step + s, i);
          noise = std::sqrt(h) * sigma_apply(gamma, z, {rng.normal(), rng.normal(), rng.normal()}, delta);
        }
        Y[i] = old[i] + h * b_eval(gamma, z, delta) + noise;
      }
    }
    for (std::size_t k = 0; k < Y.size(); ++k)
      if (!is_finite(Y[k])) throw InstabilityError("non-finite Landau velocity in coupled run", {k});

    step += ns;
    t0 = t1;
    record(t1);
  }
  res.V = std::move(V);
  res.Y = std::move(Y);
  return res;
}

// ---------------------------------------------------------------- rate sweep

struct SweepConfig {
  BoltzmannConfig boltzmann;  ///< kernel.eps is overridden per sweep point
  LandauConfig landau;
  std::string initial = "gaussian:1";
  std::vector<double> eps_list;
  std::vector<std::uint64_t> seeds;
  double p = 5.0;   ///< moment order fixing the slab and truncation schedules
  double n0 = 8.0;  ///< slab resolution prefactor
  CouplingLevel level = CouplingLevel::kGaussian;
  bool tanaka = true;
  bool w2 = false;
};

struct SweepRow {
  double eps;
  std::uint64_t seed;
  double t;
  double paired_l2;
  double w2;
  double m2_boltz;
  double m2_landau;
};

enum class Verdict { kDecreasing, kInconclusive };

inline std::string to_string(Verdict v) { return v == Verdict::kDecreasing ? "decreasing" : "inconclusive"; }

struct RateFit {
  double slope = 0.0;
  double slope_stderr = 0.0;
  double intercept = 0.0;
  std::string abscissa;  ///< "log(eps)" or "log(1/log(1/eps))"
  Verdict verdict = Verdict::kInconclusive;
  std::string reason;
};

struct SweepReport {
  Family family = Family::kGrazing;
  std::vector<double> eps_list;
  std::vector<double> mean_terminal;
  std::vector<double> stderr_terminal;
  std::vector<double> mean_sup;
  std::vector<SweepRow> rows;
  std::vector<double> m2_drift_boltz;  ///< max relative m2 drift over seeds, per eps
  std::vector<double> m2_drift_landau;
  RateFit fit;
  double proven_exponent = 0.0;  ///< p/(2p+3) for grazing kernels
  double conjectured_exponent = 1.0;
};

/// Ordinary least squares of y on x with the slope standard error.
inline RateFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw ParameterError("least squares needs at least two matched points");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw ParameterError("least squares needs distinct abscissae");
  RateFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (n > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = y[i] - f.intercept - f.slope * x[i];
      rss += e * e;
    }
    f.slope_stderr = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
  }
  return f;
}

/// Slope of log(distance) against log(eps) (soft families) or log(1/log(1/eps))
/// (Coulomb), with the monotonicity verdict.
///
/// Soft families: decreasing when the means fall strictly as eps shrinks and
/// the total drop exceeds twice the combined standard error. Coulomb: decreasing
/// when no step up exceeds twice its combined standard error.
inline RateFit fit_rate(Family family, const std::vector<double>& eps, const std::vector<double>& mean,
                        const std::vector<double>& se) {
  if (eps.size() != mean.size() || eps.size() != se.size()) throw ParameterError("fit inputs differ in length");
  if (eps.size() < 2) throw ParameterError("fit needs at least two eps values");
  for (std::size_t i = 0; i + 1 < eps.size(); ++i)
    if (!(eps[i + 1] < eps[i])) throw ParameterError("eps list must be strictly decreasing");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(mean[i] > 0.0)) throw ParameterError("distances must be positive to fit a log-log slope");
    if (family == Family::kCoulomb) {
      if (!(eps[i] < 1.0)) throw ParameterError("Coulomb eps must be < 1");
      x.push_back(std::log(1.0 / std::log(1.0 / eps[i])));
    } else {
      x.push_back(std::log(eps[i]));
    }
    y.push_back(std::log(mean[i]));
  }
  RateFit f = least_squares(x, y);
  f.abscissa = family == Family::kCoulomb ? "log(1/log(1/eps))" : "log(eps)";
  auto comb = [&](std::size_t a, std::size_t b) { return std::sqrt(se[a] * se[a] + se[b] * se[b]); };
  if (family == Family::kCoulomb) {
    f.verdict = Verdict::kDecreasing;
    f.reason = "non-increasing within 2 standard errors";
    for (std::size_t i = 0; i + 1 < mean.size(); ++i)
      if (mean[i + 1] > mean[i] + 2.0 * comb(i, i + 1)) {
        f.verdict = Verdict::kInconclusive;
        f.reason = "increase beyond 2 standard errors at eps=" + std::to_string(eps[i + 1]);
      }
  } else {
    bool strict = true;
    for (std::size_t i = 0; i + 1 < mean.size(); ++i)
      if (!(mean[i + 1] < mean[i])) strict = false;
    const std::size_t last = mean.size() - 1;
    const bool resolved = mean[0] - mean[last] > 2.0 * comb(0, last);
    f.verdict = strict && resolved ? Verdict::kDecreasing : Verdict::kInconclusive;
    f.reason = !strict ? "means not strictly decreasing" : (!resolved ? "drop within Monte Carlo error" : "strictly decreasing");
  }
  return f;
}

/// Plan for one sweep point: subdivision at n(eps) with a constant weight and truncation M(eps).
inline CouplingPlan make_plan(const SweepConfig& sc, double eps, std::uint64_t seed, double m2) {
  CouplingPlan plan;
  plan.seed = seed;
  plan.level = sc.level;
  plan.tanaka = sc.tanaka;
  plan.w2 = sc.w2;
  const double T = sc.boltzmann.T;
  plan.subdivision = build_subdivision([](double) { return 1.0; }, T, default_resolution(eps, sc.p, sc.n0));
  plan.truncation = default_truncation(eps, sc.p, m2);
  return plan;
}

/// Kernel-level facts behind the grazing sweep: with eta = eps the kernel has
/// no mass beyond eta and r_eta = 1.
inline void assert_grazing_support(const AngularKernel& k) {
  const double eps = k.eps();
  const double outside = angular_integral(k, [](double t) { return t * t; }, eps, kPi);
  if (outside != 0.0) throw NumericalError("grazing kernel has second moment beyond eps");
  if (std::abs(r_eta(k, eps) - 1.0) > 1e-8) throw NumericalError("r_eps differs from 1 for a grazing kernel");
}

inline SweepReport rate_sweep(const SweepConfig& sc, const std::function<void(const std::string&)>& log = {}) {
  if (sc.eps_list.size() < 4) throw ParameterError("rate sweep needs at least 4 eps values");
  if (sc.seeds.size() < 10) throw ParameterError("rate sweep needs at least 10 seeds");
  for (std::size_t i = 0; i + 1 < sc.eps_list.size(); ++i)
    if (!(sc.eps_list[i + 1] < sc.eps_list[i])) throw ParameterError("eps list must be strictly decreasing");
  SweepReport rep;
  rep.family = sc.boltzmann.kernel.family;
  rep.eps_list = sc.eps_list;
  rep.proven_exponent = rate_exponent(sc.p);
  const InitialSpec init = parse_initial(sc.initial);
  for (double eps : sc.eps_list) {
    BoltzmannConfig bc = sc.boltzmann;
    bc.kernel.eps = eps;
    if (rep.family == Family::kGrazing) assert_grazing_support(make_kernel(bc.kernel));
    std::vector<double> term, sup;
    double drift_b = 0.0, drift_l = 0.0;
    for (std::uint64_t seed : sc.seeds) {
      const ParticleCloud c = sample_initial(init, bc.n, seed);
      const double m2 = moment(c.v, 2.0);
      bc.seed = seed;
      LandauConfig lc = sc.landau;
      lc.seed = seed;
      const CoupledResult r = coupled_run(bc, lc, make_plan(sc, eps, seed, m2), c);
      for (std::size_t k = 0; k < r.t.size(); ++k) {
        rep.rows.push_back({eps, seed, r.t[k], r.paired_l2[k], r.w2[k], r.m2_boltz[k], r.m2_landau[k]});
        drift_b = std::max(drift_b, std::abs(r.m2_boltz[k] / m2 - 1.0));
        drift_l = std::max(drift_l, std::abs(r.m2_landau[k] / m2 - 1.0));
      }
      term.push_back(r.terminal());
      sup.push_back(r.sup());
      if (log) log("eps=" + std::to_string(eps) + " seed=" + std::to_string(seed) + " terminal=" + std::to_string(r.terminal()));
    }
    const double k = static_cast<double>(term.size());
    const double mean = std::accumulate(term.begin(), term.end(), 0.0) / k;
    double var = 0.0;
    for (double x : term) var += (x - mean) * (x - mean);
    var /= (k - 1.0);
    rep.mean_terminal.push_back(mean);
    rep.stderr_terminal.push_back(std::sqrt(var / k));
    rep.mean_sup.push_back(std::accumulate(sup.begin(), sup.end(), 0.0) / k);
    rep.m2_drift_boltz.push_back(drift_b);
    rep.m2_drift_landau.push_back(drift_l);
  }
  rep.fit = fit_rate(rep.family, rep.eps_list, rep.mean_terminal, rep.stderr_terminal);
  return rep;
}

}  // namespace grazing
