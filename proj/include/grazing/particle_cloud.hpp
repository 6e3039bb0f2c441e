#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "grazing/error.hpp"
#include "grazing/rng.hpp"
#include "grazing/vec3.hpp"

namespace grazing {

/// Empirical measure of N velocities.
struct ParticleCloud {
  std::vector<Vec3> v;
  double time = 0.0;
  std::uint32_t step = 0;  ///< completed steps, used as the RNG step counter
  std::uint64_t seed = 0;

  std::size_t size() const { return v.size(); }
};

inline Vec3 total_momentum(const std::vector<Vec3>& v) {
  Vec3 s{};
  for (const Vec3& x : v) s += x;
  return s;
}

inline double total_energy(const std::vector<Vec3>& v) {
  double s = 0.0;
  for (const Vec3& x : v) s += norm2(x);
  return s;
}

/// Empirical moment m_p = mean |v|^p.
inline double moment(const std::vector<Vec3>& v, double p) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (const Vec3& x : v) s += p == 2.0 ? norm2(x) : std::pow(norm(x), p);
  return s / static_cast<double>(v.size());
}

inline double max_speed(const std::vector<Vec3>& v) {
  double m = 0.0;
  for (const Vec3& x : v) m = std::max(m, norm(x));
  return m;
}

enum class InitialKind { kGaussian, kMixture, kBall };

/// Initial distribution: isotropic Gaussian, two-temperature Gaussian mixture, or uniform ball.
struct InitialSpec {
  InitialKind kind = InitialKind::kGaussian;
  double sigma2 = 1.0;   ///< variance per component (first mixture component)
  double sigma2b = 1.0;  ///< second mixture component
  double weight = 0.5;   ///< probability of the first mixture component
  double radius = 1.0;
  bool recenter = true;
};

/// Parses "gaussian:s2", "mixture:w,s2a,s2b" or "ball:R".
inline InitialSpec parse_initial(const std::string& text, bool recenter = true) {
  InitialSpec s;
  s.recenter = recenter;
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  std::vector<double> args;
  if (colon != std::string::npos) {
    std::string rest = text.substr(colon + 1);
    std::size_t pos = 0;
    while (pos <= rest.size()) {
      const auto comma = rest.find(',', pos);
      const std::string tok = rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      try {
        std::size_t used = 0;
        args.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ParameterError("bad number '" + tok + "' in initial distribution '" + text + "'");
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }
  auto need = [&](std::size_t n) {
    if (args.size() != n) throw ParameterError("initial distribution '" + text + "' expects " + std::to_string(n) + " parameter(s)");
  };
  if (kind == "gaussian") {
    need(1);
    s.kind = InitialKind::kGaussian;
    s.sigma2 = args[0];
  } else if (kind == "mixture") {
    need(3);
    s.kind = InitialKind::kMixture;
    s.weight = args[0];
    s.sigma2 = args[1];
    s.sigma2b = args[2];
    if (!(s.weight >= 0.0 && s.weight <= 1.0)) throw ParameterError("mixture weight must lie in [0, 1]");
  } else if (kind == "ball") {
    need(1);
    s.kind = InitialKind::kBall;
    s.radius = args[0];
  } else {
    throw ParameterError("unknown initial distribution '" + kind + "' (expected gaussian, mixture or ball)");
  }
  if (!(s.sigma2 > 0.0 && s.sigma2b > 0.0 && s.radius > 0.0)) throw ParameterError("initial distribution scale must be positive");
  return s;
}

/// Second moment m_2 of the law described by the spec.
inline double law_m2(const InitialSpec& s) {
  switch (s.kind) {
    case InitialKind::kGaussian:
      return 3.0 * s.sigma2;
    case InitialKind::kMixture:
      return 3.0 * (s.weight * s.sigma2 + (1.0 - s.weight) * s.sigma2b);
    case InitialKind::kBall:
      return 0.6 * s.radius * s.radius;
  }
  return 0.0;
}

namespace detail {

// Velocities are snapped to multiples of 2^-30 so that, after recentring with
// integer arithmetic, every floating-point summation order of the cloud gives
// exactly zero momentum.
inline void recenter_exact(std::vector<Vec3>& v) {
  constexpr double kGrid = 0x1.0p30;
  const auto n = static_cast<std::int64_t>(v.size());
  for (int c = 0; c < 3; ++c) {
    std::vector<std::int64_t> q(v.size());
    std::int64_t sum = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      q[i] = std::llround(v[i][c] * kGrid);
      sum += q[i];
    }
    std::int64_t mean = sum / n;
    std::int64_t rem = sum - mean * n;
    for (std::size_t i = 0; i < v.size(); ++i) {
      q[i] -= mean;
      if (rem > 0) {
        --q[i];
        --rem;
      } else if (rem < 0) {
        ++q[i];
        ++rem;
      }
      v[i][c] = static_cast<double>(q[i]) / kGrid;
    }
  }
}

}  // namespace detail

/// Draws N independent velocities; particle i uses its own counter stream.
inline ParticleCloud sample_initial(const InitialSpec& spec, std::size_t n, std::uint64_t seed) {
  if (n < 2) throw ParameterError("a particle cloud needs N >= 2");
  ParticleCloud cloud;
  cloud.seed = seed;
  cloud.v.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    CounterRng rng(seed, Stream::kInitial, 0, static_cast<std::uint32_t>(i));
    Vec3 g{rng.normal(), rng.normal(), rng.normal()};
    switch (spec.kind) {
      case InitialKind::kGaussian:
        cloud.v[i] = std::sqrt(spec.sigma2) * g;
        break;
      case InitialKind::kMixture: {
        const double s2 = rng.uniform() < spec.weight ? spec.sigma2 : spec.sigma2b;
        cloud.v[i] = std::sqrt(s2) * g;
        break;
      }
      case InitialKind::kBall: {
        const double r = spec.radius * std::cbrt(rng.uniform());
        cloud.v[i] = (r / norm(g)) * g;
        break;
      }
    }
  }
  if (spec.recenter && spec.kind == InitialKind::kBall) {
    // Shifting by the mean could leave the ball; use antipodal pairs instead.
    for (std::size_t i = 0; i < n / 2; ++i) {
      for (int c = 0; c < 3; ++c) cloud.v[i][c] = std::trunc(cloud.v[i][c] * 0x1.0p30) / 0x1.0p30;
      cloud.v[n / 2 + i] = -cloud.v[i];
    }
    if (n % 2 == 1) cloud.v[n - 1] = {};
  } else if (spec.recenter) {
    detail::recenter_exact(cloud.v);
  }
  return cloud;
}

}  // namespace grazing
