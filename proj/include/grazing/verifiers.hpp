#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "grazing/angular_kernels.hpp"
#include "grazing/appendix.hpp"
#include "grazing/collision_geometry.hpp"
#include "grazing/experiments.hpp"
#include "grazing/landau_coefficients.hpp"
#include "grazing/rng.hpp"

namespace grazing {

/// One row of a verifier pass table: measured value against its bound.
struct Check {
  std::string name;
  std::string label;
  double value = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct CheckTable {
  std::vector<Check> rows;

  void add(std::string name, std::string label, double value, double bound, bool pass) {
    rows.push_back({std::move(name), std::move(label), value, bound, pass});
  }
  /// Adds value <= bound; NaN fails.
  void at_most(std::string name, std::string label, double value, double bound) {
    add(std::move(name), std::move(label), value, bound, value <= bound);
  }
  void append(const CheckTable& o) { rows.insert(rows.end(), o.rows.begin(), o.rows.end()); }
  bool all_pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const Check& c) { return c.pass; });
  }
};

inline std::string fmt_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

namespace detail {

inline Vec3 normal_vec(CounterRng& r, double scale = 1.0) { return {scale * r.normal(), scale * r.normal(), scale * r.normal()}; }

/// int_0^zhi f(z) dz by double-exponential quadrature; zhi = inf goes through z = e^s.
template <class F>
double z_integral(F f, double zhi = kInf) {
  boost::math::quadrature::tanh_sinh<double> ts;
  if (std::isfinite(zhi)) return ts.integrate(f, 0.0, zhi, 1e-13);
  // panels of width 10 in s keep the error estimate honest near the kink where G saturates
  double sum = 0.0;
  for (double s0 = -80.0; s0 < 80.0; s0 += 10.0)
    sum += ts.integrate([&](double s) { return f(std::exp(s)) * std::exp(s); }, s0, s0 + 10.0, 1e-13);
  return sum;
}

inline std::vector<std::pair<double, double>> log_uniform_pairs(std::size_t n, std::uint64_t seed, std::uint32_t step) {
  std::vector<std::pair<double, double>> out;
  const double lo = std::log(1e-3), hi = std::log(1e3);
  for (std::size_t i = 0; i < n; ++i) {
    CounterRng r(seed, Stream::kVerifier, step, static_cast<std::uint32_t>(i));
    const double x = std::exp(lo + (hi - lo) * r.uniform());
    const double y = std::exp(lo + (hi - lo) * r.uniform());
    out.emplace_back(x, y);
  }
  return out;
}

}  // namespace detail

/// Momentum and energy conservation and |a|^2 = (1 - cos theta)/2 |v - v_star|^2 on random events.
inline CheckTable verify_collision_identities(std::size_t events = 1000000, std::uint64_t seed = 1) {
  double mom = 0.0, en = 0.0, disp = 0.0;
  for (std::size_t i = 0; i < events; ++i) {
    CounterRng r(seed, Stream::kVerifier, 10, static_cast<std::uint32_t>(i));
    const double scale = std::exp(4.0 * (2.0 * r.uniform() - 1.0));
    const Vec3 v = detail::normal_vec(r, scale), w = detail::normal_vec(r, scale);
    const double th = kPi * r.uniform(), phi = 2.0 * kPi * r.uniform();
    const Deviation d = deviate(v, w, th, phi);
    const double e = norm2(v) + norm2(w);
    mom = std::max(mom, norm(d.v_prime + d.v_star_prime - v - w) / std::sqrt(e));
    en = std::max(en, std::abs(norm2(d.v_prime) + norm2(d.v_star_prime) - e) / e);
    disp = std::max(disp, std::abs(norm2(d.a) - 0.5 * one_minus_cos(th) * norm2(v - w)) / e);
  }
  CheckTable t;
  const std::string label = std::to_string(events) + " events";
  t.at_most("momentum_conservation", label, mom, 1e-12);
  t.at_most("energy_conservation", label, en, 1e-12);
  t.at_most("displacement_norm", label, disp, 1e-12);
  return t;
}

/// Property suite of one kernel: normalization, tail inverse round trip, monotone
/// tail, and family-specific facts (support below eps, k <= 2).
inline CheckTable verify_kernel(const KernelSpec& spec) {
  const AngularKernel k = make_kernel(spec);
  const std::string label = to_string(spec.family) + (spec.family == Family::kSoft ? " nu=" + fmt_num(spec.nu)
                                                                                   : " eps=" + fmt_num(spec.eps));
  CheckTable t;
  t.at_most("normalization", label, std::abs(theta_moment(k, 2.0) - 4.0 / kPi), 1e-8);
  double worst = 0.0;
  bool monotone = true;
  double prev = kInf;
  for (int i = 0; i < 1000; ++i) {
    const double th = k.family() == Family::kCoulomb ? k.lo() + (k.hi() - k.lo()) * (i + 0.5) / 1000.0
                                                     : k.hi() * std::pow(1e-9, 1.0 - (i + 0.5) / 1000.0);
    const double h = k.tail(th);
    if (!(h < prev)) monotone = false;
    prev = h;
    worst = std::max(worst, std::abs(k.inverse(h) - th) / th);
  }
  t.at_most("tail_inverse_round_trip", label, worst, 1e-10);
  t.add("tail_monotone", label, monotone ? 1.0 : 0.0, 1.0, monotone);
  const double kc = k_constant(k);
  if (spec.family == Family::kCoulomb) {
    t.at_most("k_constant", label, kc, 2.0);
  } else {
    t.add("k_constant_finite", label, kc, kInf, std::isfinite(kc) && kc > 0.0);
  }
  if (spec.family == Family::kGrazing) {
    const double outside = angular_integral(k, [](double th) { return th * th; }, spec.eps, kPi);
    t.at_most("mass_beyond_eps", label, outside, 0.0);
    t.at_most("r_eps_unit", label, std::abs(r_eta(k, spec.eps) - 1.0), 1e-8);
  }
  return t;
}

/// Normalization over the reference grid plus the Coulomb normalizer limit.
inline CheckTable verify_kernel_normalization() {
  CheckTable t;
  for (double nu : {0.3, 0.6, 1.2}) t.append(verify_kernel({Family::kSoft, -0.5, nu, kPi, -1.0}));
  for (double e : {kPi / 2, kPi / 8, kPi / 32}) t.append(verify_kernel({Family::kGrazing, -0.5, 0.6, e, -1.0}));
  for (double e : {0.3, 0.1, 0.01}) t.append(verify_kernel({Family::kCoulomb, -3.0, 0.6, e, e}));
  t.at_most("coulomb_normalizer_limit", "eps=1e-4", std::abs(2.0 * kPi * coulomb_normalizer(1e-4) - 1.0), 0.05);
  return t;
}

/// int int |c|^2 dz dphi = k Phi |X|^2 and the c - d comparison against the fourth theta moment.
inline CheckTable verify_jump_moments(std::size_t pairs = 20, std::uint64_t seed = 1) {
  CheckTable t;
  auto ang = [](auto fn) {
    // 8-node trapezoid, exact for trigonometric polynomials of degree < 8
    double s = 0.0;
    for (int m = 0; m < 8; ++m) s += fn(2.0 * kPi * m / 8);
    return s * 2.0 * kPi / 8;
  };
  const std::vector<AngularKernel> soft = {SoftKernel::make(-0.5, 0.6), GrazingKernel::make(-0.5, 0.6, kPi / 4)};
  for (const AngularKernel& k : soft) {
    const double kc = k_constant(k), m4 = theta_moment(k, 4.0);
    double err = 0.0, ratio = 0.0;
    for (std::size_t i = 0; i < pairs; ++i) {
      CounterRng r(seed, Stream::kVerifier, 11, static_cast<std::uint32_t>(i));
      const Vec3 v = detail::normal_vec(r), w = detail::normal_vec(r);
      const double rr = norm(v - w);
      const double cc = detail::z_integral(
          [&](double z) { return ang([&](double phi) { return norm2(jump_c(k, v, w, z, phi)); }); });
      const double expect = kc * std::pow(rr, k.gamma() + 2.0);
      err = std::max(err, std::abs(cc - expect) / expect);
      const double cd = detail::z_integral([&](double z) {
        return ang([&](double phi) { return norm2(jump_c(k, v, w, z, phi) - jump_d(k, v, w, z, phi)); });
      });
      ratio = std::max(ratio, cd / (m4 * std::pow(rr, k.gamma() + 2.0)));
    }
    const std::string label = to_string(k.family()) + " eps=" + fmt_num(k.eps());
    t.at_most("jump_second_moment", label, err, 1e-6);
    t.at_most("jump_c_minus_d", label, ratio, 1.0);
  }
  for (double eps : {0.3, 0.05}) {
    const AngularKernel k(CoulombKernel::make(eps, 0.0));
    const double kc = k_constant(k);
    double err = 0.0;
    for (std::size_t i = 0; i < pairs; ++i) {
      CounterRng r(seed, Stream::kVerifier, 12, static_cast<std::uint32_t>(i));
      const Vec3 v = detail::normal_vec(r), w = detail::normal_vec(r);
      const double rr = norm(v - w);
      const double zhi = k.velocity_factor(rr) * k.z_max();
      // |c|^2 does not depend on phi
      const double cc = 2.0 * kPi * detail::z_integral([&](double z) { return norm2(jump_c(k, v, w, z, 0.0)); }, zhi);
      err = std::max(err, std::abs(cc - kc / rr) / (kc / rr));
    }
    const std::string label = "coulomb eps=" + fmt_num(eps);
    t.at_most("jump_second_moment", label, err, 1e-6);
    t.at_most("k_constant", label, kc, 2.0);
  }
  return t;
}

/// Tail gap integral: eps independence for grazing kernels, and a single bounding
/// constant for Coulomb kernels (sup ratios within a factor 2 of each other).
inline CheckTable verify_scaling(std::size_t pairs = 1000, std::uint64_t seed = 1, double gamma = -0.5, double nu = 0.6,
                                 std::vector<double> grazing_eps = {kPi / 4, kPi / 16},
                                 std::vector<double> coulomb_eps = {0.3, 0.1, 0.03}) {
  CheckTable t;
  if (!grazing_eps.empty()) {
    const auto xy = detail::log_uniform_pairs(pairs, seed, 13);
    const ScalingReport a4 = verify_scaling_A4(SoftKernel::make(gamma, nu), grazing_eps, xy);
    t.at_most("tail_gap_eps_independence", std::to_string(pairs) + " pairs", a4.max_rel_diff, 1e-6);
    t.add("tail_gap_ratio_bounded", "max over pairs", a4.max_ratio, kInf,
          std::isfinite(a4.max_ratio) && a4.min_ratio > 0.0);
  }
  if (!coulomb_eps.empty()) {
    const auto xy = detail::log_uniform_pairs(pairs, seed, 14);
    const A5Report a5 = verify_A5(coulomb_eps, xy);
    double lo = kInf, hi = 0.0;
    for (std::size_t i = 0; i < a5.eps.size(); ++i) {
      t.add("coulomb_gap_ratio", "eps=" + fmt_num(a5.eps[i]), a5.sup_ratio[i], kInf, std::isfinite(a5.sup_ratio[i]));
      lo = std::min(lo, a5.sup_ratio[i]);
      hi = std::max(hi, a5.sup_ratio[i]);
    }
    t.at_most("coulomb_gap_single_constant", "max/min over eps", hi / lo, 2.0);
  }
  return t;
}

/// max |Gamma(X, phi) - Gamma(Y, phi + phi0)| / |X - Y| over random pairs and a phi grid.
inline CheckTable verify_tanaka(std::size_t pairs = 100000, int angles = 32, std::uint64_t seed = 1) {
  double worst = 0.0;
  for (std::size_t i = 0; i < pairs; ++i) {
    CounterRng r(seed, Stream::kVerifier, 15, static_cast<std::uint32_t>(i));
    const Vec3 X = detail::normal_vec(r);
    // half far pairs, half near pairs down to 1e-6 separation
    const Vec3 Y = i % 2 == 0 ? detail::normal_vec(r) : X + detail::normal_vec(r, std::exp(-14.0 * r.uniform()));
    if (X == Y) continue;
    const Frame fx = frame(X), fy = frame(Y);
    const double p0 = phi_zero(fx, fy);
    const double d = norm(X - Y);
    for (int k = 0; k < angles; ++k) {
      const double phi = 2.0 * kPi * k / angles;
      worst = std::max(worst, norm(gamma_vec(fx, phi) - gamma_vec(fy, phi + p0)) / d);
    }
  }
  CheckTable t;
  t.at_most("tanaka_bound", std::to_string(pairs) + " pairs x " + std::to_string(angles) + " angles", worst, 3.0);
  return t;
}

/// sigma sigma* = l, sigma* z = 0, and b equal to the divergence of l by central differences.
inline CheckTable verify_landau_coefficients(std::size_t samples = 100000, std::uint64_t seed = 1) {
  CheckTable t;
  for (double gamma : {-3.0, -2.0, -0.5}) {
    double sq = 0.0, kern = 0.0, div_err = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
      CounterRng r(seed, Stream::kVerifier, 16, static_cast<std::uint32_t>(i));
      const Vec3 z = detail::normal_vec(r, std::exp(4.0 * (2.0 * r.uniform() - 1.0)));
      const double nz = norm(z);
      const Eigen::Matrix3d s = sigma_eval(gamma, z), l = l_eval(gamma, z);
      const double scale = std::pow(nz, gamma + 2.0);
      sq = std::max(sq, (s * s.transpose() - l).cwiseAbs().maxCoeff() / scale);
      kern = std::max(kern, (s.transpose() * to_eigen(z)).norm() / (std::sqrt(scale) * nz));
      if (i % 100 == 0) {
        Vec3 div{};
        const double h = 1e-4 * nz;
        for (int j = 0; j < 3; ++j) {
          Vec3 zp = z, zm = z;
          zp[j] += h;
          zm[j] -= h;
          const Eigen::Matrix3d d = (l_eval(gamma, zp) - l_eval(gamma, zm)) / (2.0 * h);
          for (int a = 0; a < 3; ++a) div[a] += d(a, j);
        }
        const Vec3 b = b_eval(gamma, z);
        div_err = std::max(div_err, norm(div - b) / norm(b));
      }
    }
    const std::string label = "gamma=" + fmt_num(gamma);
    t.at_most("sigma_square_root", label, sq, 1e-12);
    t.at_most("sigma_kernel", label, kern, 1e-12);
    t.at_most("drift_divergence", label, div_err, 1e-6);
  }
  return t;
}

/// Structural properties of the subdivision for h = 0, 1 and s^(-1/2).
inline CheckTable verify_subdivision(int n = 8, double T = 1.0) {
  struct Case {
    std::string label;
    std::function<double(double)> h;
    double integral;
  };
  const std::vector<Case> cases = {{"h=0", [](double) { return 0.0; }, 0.0},
                                   {"h=1", [](double) { return 1.0; }, T},
                                   {"h=s^-1/2", [](double s) { return 1.0 / std::sqrt(s); }, 2.0 * std::sqrt(T)}};
  CheckTable t;
  for (const Case& c : cases) {
    const Subdivision s = build_subdivision(c.h, T, n);
    const SubdivisionCheck k = check_subdivision(s, c.integral);
    const std::string label = c.label + " n=" + std::to_string(n);
    t.add("first_node", label, s.a.front() * n, 1.0, k.first_node);
    double lo = kInf, hi = 0.0;
    for (std::size_t i = 0; i + 1 < s.a.size(); ++i) {
      lo = std::min(lo, (s.a[i + 1] - s.a[i]) * n);
      hi = std::max(hi, (s.a[i + 1] - s.a[i]) * n);
    }
    t.add("spacing", label, hi, 1.0, k.spacing && lo > 0.25);
    t.add("riemann_sum", label, s.riemann_sum(), 3.0 * c.integral + 3.0, k.riemann);
  }
  return t;
}

/// psi subadditivity on a grid and the factor-2 comparison with psi_tilde.
inline CheckTable verify_psi(int grid = 200) {
  double sub = 0.0, lo = kInf, hi = 0.0;
  auto node = [grid](int i) { return std::pow(10.0, -6.0 + 8.0 * i / (grid - 1)); };
  for (int i = 0; i < grid; ++i) {
    const double x = node(i);
    lo = std::min(lo, psi_tilde(x) / psi(x));
    hi = std::max(hi, psi_tilde(x) / psi(x));
    for (int j = 0; j < grid; ++j) {
      const double y = node(j);
      sub = std::max(sub, (psi(x + y) - psi(x) - psi(y)) / (psi(x) + psi(y)));
    }
  }
  CheckTable t;
  t.at_most("psi_subadditive", std::to_string(grid) + "x" + std::to_string(grid) + " grid", sub, 1e-15);
  t.add("psi_tilde_comparison", "min ratio", lo, 0.5, lo >= 0.5);
  t.add("psi_tilde_comparison", "max ratio", hi, 2.0, hi <= 2.0);
  return t;
}

/// Saturated solutions stay below the envelope and the two integrators agree.
inline CheckTable verify_gronwall(const std::vector<double>& a_list = {1e-6, 1e-3, 0.5, 2.0}, double T = 1.0) {
  struct Case {
    std::string label;
    GammaFn g;
  };
  const std::vector<Case> cases = {{"gamma=0.5", {[](double) { return 0.5; }, {}}},
                                   {"gamma=1", {[](double) { return 1.0; }, {}}},
                                   {"gamma=piecewise", {[](double t) { return t < 0.5 ? 2.0 : 0.25; }, {0.5}}}};
  CheckTable t;
  for (const Case& c : cases)
    for (double a : a_list) {
      const GronwallReport r = gronwall_bound_check(a, c.g, T);
      const std::string label = c.label + " a=" + fmt_num(a);
      t.add("gronwall_envelope", label, std::max(r.rho_rk4, r.rho_dp), r.envelope, r.holds);
      t.at_most("integrator_agreement", label, r.rel_agreement, 1e-8);
    }
  return t;
}

/// Ratio of the empirical Poisson-Gaussian W2^2 to its envelope over a horizon sweep;
/// bounded means finite and max/min <= 4. Control ratios are reported alongside.
inline CheckTable verify_poisson_gaussian(const std::vector<double>& t_list = {1.0, 10.0, 100.0},
                                          std::size_t samples = 2048, std::uint64_t seed = 1) {
  CheckTable t;
  double lo = kInf, hi = 0.0;
  for (double h : t_list) {
    const PoissonGaussianReport r = poisson_gaussian_w2(orthogonal_atoms(h), samples, seed);
    const std::string label = "t=" + fmt_num(h);
    t.add("poisson_gaussian_ratio", label, r.ratio, kInf, std::isfinite(r.ratio) && r.ratio > 0.0);
    t.add("same_law_control_ratio", label, r.control_ratio, kInf, std::isfinite(r.control_ratio));
    lo = std::min(lo, r.ratio);
    hi = std::max(hi, r.ratio);
  }
  t.at_most("poisson_gaussian_bounded", "max/min over t", hi / lo, 4.0);
  return t;
}

}  // namespace grazing
