#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "grazing/landau_sim.hpp"

using namespace grazing;

namespace {

Vec3 random_vec(std::mt19937_64& g) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  const double s = std::exp(u(g));
  return {s * n(g), s * n(g), s * n(g)};
}

}  // namespace

TEST(LandauCoefficients, UnitAxisExample) {
  const Eigen::Matrix3d s = sigma_eval(-1.0, {1, 0, 0});
  const Eigen::Matrix3d l = l_eval(-1.0, {1, 0, 0});
  const Eigen::Matrix3d expect = Eigen::Vector3d(0, 1, 1).asDiagonal();
  EXPECT_LE((s * s.transpose() - expect).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE((l - expect).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(LandauCoefficients, SigmaSquareRootOfL) {
  std::mt19937_64 g(1);
  for (double gamma : {-3.0, -2.0, -1.0, -0.5}) {
    for (int k = 0; k < 20000; ++k) {
      const Vec3 z = random_vec(g);
      const Eigen::Matrix3d s = sigma_eval(gamma, z);
      const Eigen::Matrix3d l = l_eval(gamma, z);
      const double scale = std::pow(norm(z), gamma + 2.0);
      EXPECT_LE((s * s.transpose() - l).cwiseAbs().maxCoeff(), 1e-12 * scale);
      const Eigen::Vector3d sz = s.transpose() * to_eigen(z);
      EXPECT_LE(sz.norm(), 1e-12 * std::pow(norm(z), 1.0 + 0.5 * gamma) * norm(z));
      EXPECT_LE((l * to_eigen(z)).norm(), 1e-12 * scale * norm(z));
      EXPECT_TRUE(sigma_eval(gamma, -z) == -s);
    }
  }
}

TEST(LandauCoefficients, SigmaApplyMatchesMatrix) {
  std::mt19937_64 g(2);
  for (int k = 0; k < 1000; ++k) {
    const Vec3 z = random_vec(g), xi = random_vec(g);
    const Vec3 a = sigma_apply(-1.5, z, xi);
    const Vec3 b = from_eigen(sigma_eval(-1.5, z) * to_eigen(xi));
    EXPECT_LE(norm(a - b), 1e-14 * (norm(b) + 1e-300) + 1e-300);
  }
}

TEST(LandauCoefficients, PositiveSemidefinite) {
  std::mt19937_64 g(3);
  for (int k = 0; k < 10000; ++k) {
    const Vec3 z = random_vec(g), xi = random_vec(g);
    const Eigen::Matrix3d l = l_eval(-2.0, z);
    EXPECT_GE(to_eigen(xi).dot(l * to_eigen(xi)), -1e-12 * l.norm() * norm2(xi));
  }
}

TEST(LandauCoefficients, DriftClosedForm) {
  const Vec3 b = b_eval(-2.0, {1, 0, 0});
  EXPECT_DOUBLE_EQ(b.x, -2.0);
  EXPECT_DOUBLE_EQ(b.y, 0.0);
  EXPECT_DOUBLE_EQ(b.z, 0.0);
  std::mt19937_64 g(4);
  for (int k = 0; k < 1000; ++k) {
    const Vec3 z = random_vec(g);
    EXPECT_TRUE(b_eval(-1.0, -z) == -b_eval(-1.0, z));
  }
}

// Central differences of the rows of l reproduce b = div l.
TEST(LandauCoefficients, DriftIsDivergenceOfL) {
  std::mt19937_64 g(5);
  std::normal_distribution<double> n(0.0, 1.0);
  for (double gamma : {-3.0, -1.0, -0.5}) {
    for (int k = 0; k < 200; ++k) {
      const Vec3 z{n(g), n(g), n(g)};
      if (norm(z) < 0.2) continue;
      Vec3 div{};
      for (int j = 0; j < 3; ++j) {
        const double h = 1e-4 * norm(z);
        Vec3 zp = z, zm = z;
        zp[j] += h;
        zm[j] -= h;
        const Eigen::Matrix3d d = (l_eval(gamma, zp) - l_eval(gamma, zm)) / (2.0 * h);
        for (int i = 0; i < 3; ++i) div[i] += d(i, j);
      }
      const Vec3 b = b_eval(gamma, z);
      EXPECT_LE(norm(div - b), 1e-6 * norm(b));
    }
  }
}

TEST(LandauCoefficients, ZeroArgument) {
  EXPECT_THROW(sigma_eval(-1.0, {}), DegenerateInputError);
  EXPECT_THROW(b_eval(-1.0, {}), DegenerateInputError);
  EXPECT_EQ(b_eval(-1.0, {}, 1e-3), Vec3{});
  const Vec3 tiny{1e-9, 0, 0};
  // regularized power stays bounded
  EXPECT_LE(norm(b_eval(-3.0, tiny, 1e-3)), 2.0 * 1e9 * 1e-9);
}

namespace {

ParticleCloud gaussian_cloud(std::size_t n, std::uint64_t seed) {
  return sample_initial(parse_initial("gaussian:1"), n, seed);
}

}  // namespace

TEST(LandauSim, ConservativeMomentumPerStep) {
  LandauConfig cfg;
  cfg.gamma = -1.0;
  cfg.n = 512;
  cfg.dt = 1e-2;
  cfg.pairing = Pairing::kConservative;
  cfg.m = 8;
  ParticleCloud c = gaussian_cloud(cfg.n, 3);
  c.v[0] += Vec3{0.25, -0.5, 1.0};  // nonzero total momentum
  const LandauSimulator sim(cfg, moment(c.v, 2.0));
  const Vec3 p0 = total_momentum(c.v);
  for (int s = 0; s < 20; ++s) {
    sim.step(c, cfg.dt);
    ++c.step;
    EXPECT_LE(norm(total_momentum(c.v) - p0), 1e-10 * std::sqrt(total_energy(c.v)));
  }
}

TEST(LandauSim, CoincidentPair) {
  LandauConfig cfg;
  cfg.n = 2;
  cfg.pairing = Pairing::kConservative;
  cfg.m = 1;
  cfg.reg_delta = 1e-3;
  ParticleCloud c;
  c.v = {{1, 2, 3}, {1, 2, 3}};
  const LandauSimulator sim(cfg, 14.0);
  sim.step(c, cfg.dt);
  EXPECT_TRUE(is_finite(c.v[0]) && is_finite(c.v[1]));
  EXPECT_EQ(c.v[0] + c.v[1], (Vec3{2, 4, 6}));
  for (Pairing p : {Pairing::kFull, Pairing::kSubsampled}) {
    cfg.pairing = p;
    ParticleCloud d;
    d.v = {{1, 2, 3}, {1, 2, 3}};
    LandauSimulator(cfg, 14.0).step(d, cfg.dt);
    EXPECT_EQ(d.v[0], (Vec3{1, 2, 3}));
  }
}

TEST(LandauSim, RunAtZeroHorizon) {
  LandauConfig cfg;
  cfg.n = 64;
  cfg.T = 0.0;
  const ParticleCloud c = gaussian_cloud(cfg.n, 1);
  const auto tr = LandauSimulator(cfg, 3.0).run(c, {0.0});
  ASSERT_EQ(tr.size(), 1u);
  EXPECT_EQ(tr[0].v, c.v);
}

TEST(LandauSim, Deterministic) {
  LandauConfig cfg;
  cfg.n = 128;
  cfg.T = 0.05;
  cfg.dt = 0.01;
  cfg.m = 4;
  const ParticleCloud c = gaussian_cloud(cfg.n, 9);
  for (Pairing p : {Pairing::kFull, Pairing::kSubsampled, Pairing::kConservative}) {
    cfg.pairing = p;
    const auto a = LandauSimulator(cfg, 3.0).run(c, {0.0, 0.05}, false);
    const auto b = LandauSimulator(cfg, 3.0).run(c, {0.0, 0.05}, false);
    EXPECT_EQ(a.back().v, b.back().v);
    EXPECT_NE(a.back().v, c.v);
  }
}

TEST(LandauSim, SnapshotsOnSchedule) {
  LandauConfig cfg;
  cfg.n = 32;
  cfg.T = 0.1;
  cfg.dt = 0.03;
  const auto tr = LandauSimulator(cfg, 3.0).run(gaussian_cloud(cfg.n, 2), {0.0, 0.05, 0.1}, false);
  ASSERT_EQ(tr.size(), 3u);
  EXPECT_EQ(tr[1].t, 0.05);
  EXPECT_EQ(tr[2].t, 0.1);
}

// A single pair with its own Gaussian increment: the variance of one step is
// trace(l(z)) dt / 1 and the mean moves by b(z) dt.
TEST(LandauSim, OneStepMoments) {
  LandauConfig cfg;
  cfg.gamma = -1.0;
  cfg.n = 2;
  cfg.pairing = Pairing::kSubsampled;
  cfg.m = 1;
  cfg.dt = 0.01;
  cfg.reg_delta = 0.0;
  const Vec3 v0{1, 0, 0}, w0{-1, 0.5, 0};
  const LandauSimulator sim(cfg, 1.0);
  const int trials = 20000;
  Vec3 mean{};
  double var = 0.0;
  for (int t = 0; t < trials; ++t) {
    ParticleCloud c;
    c.v = {v0, w0};
    c.seed = 1000 + t;
    sim.step(c, cfg.dt);
    const Vec3 d = c.v[0] - v0;
    mean += d / trials;
    var += norm2(d) / trials;
  }
  const Vec3 z = v0 - w0;
  const double tr = l_eval(cfg.gamma, z).trace() * cfg.dt;
  const Vec3 b = cfg.dt * b_eval(cfg.gamma, z);
  const double se = std::sqrt(tr / trials);
  EXPECT_LE(norm(mean - b), 4.0 * se);
  EXPECT_NEAR(var, tr, 4.0 * tr * std::sqrt(2.0 / trials));
}

TEST(LandauSim, ConfigErrors) {
  LandauConfig cfg;
  cfg.gamma = 0.5;
  EXPECT_THROW(LandauSimulator(cfg, 3.0), ParameterError);
  cfg.gamma = -1.0;
  cfg.dt = 0.0;
  EXPECT_THROW(LandauSimulator(cfg, 3.0), ParameterError);
  cfg.dt = 1e-3;
  cfg.m = 0;
  EXPECT_THROW(LandauSimulator(cfg, 3.0), ParameterError);
}
