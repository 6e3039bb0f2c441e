#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "grazing/angular_kernels.hpp"
#include "grazing/collision_geometry.hpp"
#include "grazing/error.hpp"
#include "grazing/particle_cloud.hpp"
#include "grazing/rng.hpp"
#include "grazing/trajectory.hpp"

namespace grazing {

enum class UpdateMode { kNanbu, kSymmetric };

inline std::string to_string(UpdateMode m) { return m == UpdateMode::kNanbu ? "nanbu" : "symmetric"; }

inline UpdateMode parse_update_mode(const std::string& s) {
  if (s == "nanbu") return UpdateMode::kNanbu;
  if (s == "symmetric") return UpdateMode::kSymmetric;
  throw ParameterError("unknown update mode '" + s + "' (expected nanbu or symmetric)");
}

struct BoltzmannConfig {
  KernelSpec kernel;
  std::size_t n = 1024;
  double dt = 1e-3;
  double theta_min = -1.0;  ///< negative: eps / 64 for soft families; unused for Coulomb
  double v_floor = -1.0;    ///< negative: 1e-3 sqrt(m2) of the initial cloud
  UpdateMode mode = UpdateMode::kNanbu;
  std::uint64_t seed = 1;
  double T = 0.5;
  double rate_cap = 1e4;  ///< bound on expected candidates per particle per step
};

/// Poisson count from the particle's counter stream.
inline std::uint32_t poisson_draw(CounterRng& rng, double mean) {
  if (mean <= 0.0) return 0;
  return std::poisson_distribution<std::uint32_t>(mean)(rng);
}

/// Boltzmann particle stepper with small-angle truncation and analytic compensation.
class BoltzmannSimulator {
 public:
  BoltzmannSimulator(const BoltzmannConfig& cfg, double initial_m2)
      : cfg_(cfg), kernel_(make_kernel(cfg.kernel)) {
    if (!(cfg.dt > 0.0)) throw ParameterError("dt must be positive");
    if (cfg.n < 2) throw ParameterError("N must be at least 2");
    if (!(cfg.rate_cap > 0.0)) throw ParameterError("rate cap must be positive");
    v_floor_ = cfg.v_floor >= 0.0 ? cfg.v_floor : 1e-3 * std::sqrt(std::max(initial_m2, 0.0));
    if (kernel_.family() == Family::kCoulomb) {
      theta_min_ = kernel_.lo();
      band_ = kernel_.z_max();
      const auto& c = std::get<CoulombKernel>(kernel_.variant());
      if (c.h_eps == 0.0 && v_floor_ == 0.0)
        throw ParameterError("Coulomb simulation needs h_eps > 0 or v_floor > 0 to bound the collision rate");
      k_res_ = 0.0;
    } else {
      theta_min_ = cfg.theta_min > 0.0 ? cfg.theta_min : kernel_.eps() / 64.0;
      if (!(theta_min_ > 0.0 && theta_min_ <= kPi)) throw ParameterError("theta_min must lie in (0, pi]");
      band_ = kernel_.tail(theta_min_);
      k_res_ = k_residual(kernel_, theta_min_);
    }
    r_band_ = 0.25 * kPi * angular_integral(kernel_, [](double t) { return t * t; }, theta_min_, kPi);
  }

  const BoltzmannConfig& config() const { return cfg_; }
  const AngularKernel& kernel() const { return kernel_; }
  double theta_min() const { return theta_min_; }
  double v_floor() const { return v_floor_; }
  /// H(theta_min): jump coordinate range of the explicitly simulated band.
  double band() const { return band_; }
  /// pi int_0^theta_min (1 - cos) beta, carried by the drift.
  double k_res() const { return k_res_; }
  /// (pi/4) int_{theta_min}^pi theta^2 beta, the second moment carried by jumps.
  double r_band() const { return r_band_; }

  /// Phi at the floored speed used for rate majorization.
  double phi_major(double r) const { return kernel_.velocity_factor(std::max(r, v_floor_)); }

  /// Expected number of candidates for one particle against one companion.
  double candidate_rate(double r, double h) const { return 2.0 * kPi * band_ * phi_major(r) * h; }

  /// Companion of particle i at a step, uniform over the others.
  static std::uint32_t companion(std::uint64_t seed, std::uint32_t step, std::uint32_t i, std::uint32_t n) {
    CounterRng rng(seed, Stream::kBoltzmannPairing, step, i);
    const std::uint32_t j = rng.below(n - 1);
    return j >= i ? j + 1 : j;
  }

  /// Moves v against the frozen companion w for time h.
  ///
  /// angle(X, u) maps a base uniform to the azimuth used in the frame of X;
  /// on_event(theta, u, X) observes each accepted collision.
  template <class Angle, class OnEvent>
  Vec3 advance(Vec3 v, const Vec3& w, double h, CounterRng& rng, Angle&& angle, OnEvent&& on_event,
               std::size_t& events) const {
    const Vec3 X0 = v - w;
    const double r0 = norm(X0);
    const double phi_maj = phi_major(r0);
    const double lambda = 2.0 * kPi * band_ * phi_maj * h;
    if (!(lambda <= cfg_.rate_cap))
      throw StabilityError("expected collision candidates per step " + std::to_string(lambda) + " exceed the cap " +
                           std::to_string(cfg_.rate_cap) + "; reduce dt or raise v_floor");
    const std::uint32_t count = poisson_draw(rng, lambda);
    for (std::uint32_t e = 0; e < count; ++e) {
      const double uz = rng.uniform();
      const double uphi = rng.uniform();
      const Vec3 X = v - w;
      const double r = norm(X);
      if (r == 0.0) continue;
      // thinning: the candidate survives when its jump coordinate stays in the band
      const double zr = uz * band_ * phi_maj / kernel_.velocity_factor(std::max(r, v_floor_));
      if (zr > band_) continue;
      const double theta = kernel_.inverse(zr);
      if (theta == 0.0) continue;
      v += displacement(X, frame(X), theta, angle(X, uphi));
      on_event(theta, uphi, X);
      ++events;
    }
    v += h * residual_drift(kernel_, k_res_, X0);
    return v;
  }

  /// One step of length h; returns the number of accepted collisions.
  std::size_t step(ParticleCloud& c, double h) const {
    return cfg_.mode == UpdateMode::kNanbu ? step_nanbu(c, h) : step_symmetric(c, h);
  }

  std::size_t step_nanbu(ParticleCloud& c, double h) const {
    const auto n = static_cast<std::uint32_t>(c.size());
    const std::vector<Vec3> old = c.v;
    std::size_t events = 0;
    for (std::uint32_t i = 0; i < n; ++i) {
      const std::uint32_t j = companion(c.seed, c.step, i, n);
      CounterRng rng(c.seed, Stream::kBoltzmann, c.step, i);
      c.v[i] = advance(
          old[i], old[j], h, rng, [](const Vec3&, double u) { return 2.0 * kPi * u; },
          [](double, double, const Vec3&) {}, events);
    }
    check_finite(c);
    return events;
  }

  /// Disjoint random pairs; every event deviates both partners.
  std::size_t step_symmetric(ParticleCloud& c, double h) const {
    const auto n = static_cast<std::uint32_t>(c.size());
    std::vector<std::uint32_t> perm(n);
    for (std::uint32_t i = 0; i < n; ++i) perm[i] = i;
    CounterRng prng(c.seed, Stream::kBoltzmannPairing, c.step, n);
    for (std::uint32_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[prng.below(i)]);
    std::size_t events = 0;
    for (std::uint32_t p = 0; p + 1 < n; p += 2) {
      const std::uint32_t i = perm[p], j = perm[p + 1];
      CounterRng rng(c.seed, Stream::kBoltzmann, c.step, i);
      Vec3 v = c.v[i], w = c.v[j];
      const double r0 = norm(v - w);
      const double phi_maj = phi_major(r0);
      const double lambda = 2.0 * kPi * band_ * phi_maj * h;
      if (!(lambda <= cfg_.rate_cap))
        throw StabilityError("expected collision candidates per step " + std::to_string(lambda) +
                             " exceed the cap; reduce dt or raise v_floor");
      const std::uint32_t count = poisson_draw(rng, lambda);
      for (std::uint32_t e = 0; e < count; ++e) {
        const double uz = rng.uniform();
        const double uphi = rng.uniform();
        const double r = norm(v - w);
        if (r == 0.0) continue;
        const double zr = uz * band_ * phi_maj / kernel_.velocity_factor(std::max(r, v_floor_));
        if (zr > band_) continue;
        const double theta = kernel_.inverse(zr);
        if (theta == 0.0) continue;
        const Deviation d = deviate(v, w, theta, 2.0 * kPi * uphi);
        v = d.v_prime;
        w = d.v_star_prime;
        ++events;
      }
      // the truncated small angles act as one extra deviation with the same mean displacement
      if (k_res_ > 0.0 && r0 > 0.0) {
        const double s2 = std::min(1.0, k_res_ * kernel_.velocity_factor(r0) * h);
        const double theta = 2.0 * std::asin(std::sqrt(s2));
        const Deviation d = deviate(v, w, theta, 2.0 * kPi * rng.uniform());
        v = d.v_prime;
        w = d.v_star_prime;
      }
      c.v[i] = v;
      c.v[j] = w;
    }
    check_finite(c);
    return events;
  }

  Trajectory run(const ParticleCloud& initial, const std::vector<double>& schedule, bool with_entropy = true) const {
    if (initial.size() != cfg_.n) throw ParameterError("initial cloud size differs from config N");
    return drive(initial, check_schedule(schedule, cfg_.T), cfg_.dt,
                 [this](ParticleCloud& c, double h) { return step(c, h); }, with_entropy);
  }

 private:
  static void check_finite(const ParticleCloud& c) {
    std::vector<std::size_t> bad;
    for (std::size_t i = 0; i < c.size(); ++i)
      if (!is_finite(c.v[i])) bad.push_back(i);
    if (!bad.empty()) throw InstabilityError("non-finite velocity after a Boltzmann step", bad);
  }

  BoltzmannConfig cfg_;
  AngularKernel kernel_;
  double v_floor_ = 0.0;
  double theta_min_ = 0.0;
  double band_ = 0.0;
  double k_res_ = 0.0;
  double r_band_ = 0.0;
};

}  // namespace grazing
