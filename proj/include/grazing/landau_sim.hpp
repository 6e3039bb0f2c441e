#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "grazing/error.hpp"
#include "grazing/landau_coefficients.hpp"
#include "grazing/particle_cloud.hpp"
#include "grazing/rng.hpp"
#include "grazing/trajectory.hpp"

namespace grazing {

enum class Pairing { kFull, kSubsampled, kConservative };

inline std::string to_string(Pairing p) {
  switch (p) {
    case Pairing::kFull:
      return "full";
    case Pairing::kSubsampled:
      return "subsampled";
    case Pairing::kConservative:
      return "conservative";
  }
  return "?";
}

inline Pairing parse_pairing(const std::string& s) {
  if (s == "full") return Pairing::kFull;
  if (s == "subsampled") return Pairing::kSubsampled;
  if (s == "conservative") return Pairing::kConservative;
  throw ParameterError("unknown pairing '" + s + "' (expected full, subsampled or conservative)");
}

struct LandauConfig {
  double gamma = -0.5;
  std::size_t n = 1024;
  double dt = 1e-3;
  Pairing pairing = Pairing::kSubsampled;
  std::uint32_t m = 64;     ///< companions per particle (subsampled), matchings per step (conservative)
  double reg_delta = -1.0;  ///< negative: 1e-3 sqrt(m2) of the initial cloud
  std::uint64_t seed = 1;
  double T = 0.5;
};

/// Euler-Maruyama stepper for the pairwise Landau particle system.
class LandauSimulator {
 public:
  LandauSimulator(const LandauConfig& cfg, double initial_m2) : cfg_(cfg) {
    if (!(cfg.gamma >= -3.0 && cfg.gamma < 0.0)) throw ParameterError("gamma must lie in [-3, 0)");
    if (!(cfg.dt > 0.0)) throw ParameterError("dt must be positive");
    if (cfg.n < 2) throw ParameterError("N must be at least 2");
    if (cfg.pairing != Pairing::kFull && cfg.m < 1) throw ParameterError("m must be at least 1");
    if (cfg.pairing == Pairing::kFull && cfg.n > 2048)
      throw ParameterError("full pairing is limited to N <= 2048; use subsampled");
    delta_ = cfg.reg_delta >= 0.0 ? cfg.reg_delta : 1e-3 * std::sqrt(std::max(initial_m2, 0.0));
  }

  const LandauConfig& config() const { return cfg_; }
  double reg_delta() const { return delta_; }

  Vec3 b(const Vec3& z) const { return b_eval(cfg_.gamma, z, delta_); }
  Vec3 sigma(const Vec3& z, const Vec3& xi) const { return sigma_apply(cfg_.gamma, z, xi, delta_); }

  std::size_t step(ParticleCloud& c, double h) const {
    switch (cfg_.pairing) {
      case Pairing::kFull:
        step_full(c, h);
        break;
      case Pairing::kSubsampled:
        step_subsampled(c, h);
        break;
      case Pairing::kConservative:
        step_conservative(c, h);
        break;
    }
    check_finite(c);
    return 0;
  }

  /// Every ordered pair with its own increment; O(N^2) per step.
  void step_full(ParticleCloud& c, double h) const {
    const std::size_t n = c.size();
    const std::vector<Vec3> old = c.v;
    const double sq = std::sqrt(h);
    const double scale = 1.0 / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      CounterRng rng(c.seed, Stream::kLandau, c.step, static_cast<std::uint32_t>(i));
      Vec3 drift{}, noise{};
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const Vec3 z = old[i] - old[j];
        drift += b(z);
        noise += sigma(z, sq * Vec3{rng.normal(), rng.normal(), rng.normal()});
      }
      c.v[i] = old[i] + (h * scale) * drift + std::sqrt(scale) * noise;
    }
  }

  /// m companions drawn with replacement per particle.
  void step_subsampled(ParticleCloud& c, double h) const {
    const auto n = static_cast<std::uint32_t>(c.size());
    const std::vector<Vec3> old = c.v;
    const double sq = std::sqrt(h);
    const double scale = 1.0 / cfg_.m;
    for (std::uint32_t i = 0; i < n; ++i) {
      CounterRng pick(c.seed, Stream::kLandauPairing, c.step, i);
      CounterRng rng(c.seed, Stream::kLandau, c.step, i);
      Vec3 drift{}, noise{};
      for (std::uint32_t k = 0; k < cfg_.m; ++k) {
        std::uint32_t j = pick.below(n - 1);
        if (j >= i) ++j;
        const Vec3 z = old[i] - old[j];
        drift += b(z);
        noise += sigma(z, sq * Vec3{rng.normal(), rng.normal(), rng.normal()});
      }
      c.v[i] = old[i] + (h * scale) * drift + std::sqrt(scale) * noise;
    }
  }

  /// m random perfect matchings; each unordered pair shares one increment, so
  /// the pair contributions cancel in the total momentum.
  void step_conservative(ParticleCloud& c, double h) const {
    const auto n = static_cast<std::uint32_t>(c.size());
    const std::vector<Vec3> old = c.v;
    std::vector<Vec3> inc(n);
    std::vector<std::uint32_t> perm(n);
    const double sq = std::sqrt(h);
    const double scale = 1.0 / cfg_.m;
    for (std::uint32_t k = 0; k < cfg_.m; ++k) {
      for (std::uint32_t i = 0; i < n; ++i) perm[i] = i;
      CounterRng prng(c.seed, Stream::kLandauPairing, c.step, k);
      for (std::uint32_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[prng.below(i)]);
      for (std::uint32_t p = 0; p + 1 < n; p += 2) {
        const std::uint32_t i = perm[p], j = perm[p + 1];
        const Vec3 z = old[i] - old[j];
        if (norm2(z) == 0.0) continue;
        CounterRng rng(c.seed, Stream::kLandau, c.step, k * n + std::min(i, j));
        const Vec3 dB = sq * Vec3{rng.normal(), rng.normal(), rng.normal()};
        const Vec3 d = (h * scale) * b(z) + std::sqrt(scale) * sigma(z, dB);
        inc[i] += d;
        inc[j] -= d;
      }
    }
    for (std::uint32_t i = 0; i < n; ++i) c.v[i] = old[i] + inc[i];
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
    if (!bad.empty()) throw InstabilityError("non-finite velocity after a Landau step", bad);
  }

  LandauConfig cfg_;
  double delta_ = 0.0;
};

}  // namespace grazing
