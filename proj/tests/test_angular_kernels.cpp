#include <cmath>
#include <random>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include "grazing/angular_kernels.hpp"

using namespace grazing;

namespace {

// Independent integrator for the oracles: double-exponential quadrature.
template <class F>
double ts_integrate(F f, double a, double b) {
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate(f, a, b, 1e-13);
}

double oracle_second_moment(const AngularKernel& k) {
  // start just off zero so that theta^2 and beta stay representable
  return ts_integrate([&](double th) { return th * th * k.beta(th); }, std::max(k.lo(), 1e-100), k.hi());
}

std::vector<std::pair<double, double>> random_pairs(int n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> lg(std::log(1e-3), std::log(1e3));
  std::vector<std::pair<double, double>> out;
  for (int i = 0; i < n; ++i) out.emplace_back(std::exp(lg(gen)), std::exp(lg(gen)));
  return out;
}

}  // namespace

TEST(SoftNormalizer, NuOneClosedForm) { EXPECT_NEAR(soft_normalizer(1.0), 4.0 / (M_PI * M_PI), 1e-15); }

TEST(SoftNormalizer, VanishesAsNuToTwo) { EXPECT_LT(soft_normalizer(2.0 - 1e-9), 1e-8); }

TEST(SoftNormalizer, RejectsOutOfRange) {
  EXPECT_THROW(soft_normalizer(0.0), ParameterError);
  EXPECT_THROW(soft_normalizer(2.0), ParameterError);
  EXPECT_THROW(SoftKernel::make(-3.0, 0.5), ParameterError);
}

TEST(Normalization, SoftFamily) {
  for (double nu : {0.3, 0.6, 1.2}) {
    const AngularKernel k(SoftKernel::make(-0.5, nu));
    EXPECT_NEAR(oracle_second_moment(k), 4.0 / M_PI, 1e-8) << nu;
    EXPECT_NEAR(theta_moment(k, 2.0), 4.0 / M_PI, 1e-8) << nu;
  }
}

TEST(Normalization, GrazingFamily) {
  for (double eps : {M_PI / 2, M_PI / 8, M_PI / 32}) {
    const AngularKernel k(GrazingKernel::make(-0.5, 0.6, eps));
    EXPECT_NEAR(oracle_second_moment(k), 4.0 / M_PI, 1e-8) << eps;
    EXPECT_NEAR(theta_moment(k, 2.0), 4.0 / M_PI, 1e-8) << eps;
  }
}

TEST(Normalization, CoulombFamily) {
  for (double eps : {0.3, 0.1, 0.01}) {
    const AngularKernel k(CoulombKernel::make(eps, eps));
    EXPECT_NEAR(oracle_second_moment(k), 4.0 / M_PI, 1e-8) << eps;
    EXPECT_NEAR(theta_moment(k, 2.0), 4.0 / M_PI, 1e-8) << eps;
  }
}

TEST(CoulombNormalizer, LimitIsOneOverTwoPi) {
  EXPECT_NEAR(2.0 * M_PI * coulomb_normalizer(1e-4), 1.0, 0.05);
  // The approach to the limit is monotone on this grid.
  double prev = 0.0;
  for (double eps : {1e-2, 1e-4, 1e-8, 1e-16}) {
    const double v = 2.0 * M_PI * coulomb_normalizer(eps);
    EXPECT_GT(v, prev);
    prev = v;
  }
  EXPECT_NEAR(prev, 1.0, 0.03);
}

TEST(CoulombNormalizer, RejectsOutOfRange) {
  EXPECT_THROW(coulomb_normalizer(0.0), ParameterError);
  EXPECT_THROW(coulomb_normalizer(1.0), ParameterError);
}

TEST(TailInverse, RoundTripAllFamilies) {
  const std::vector<AngularKernel> kernels = {SoftKernel::make(-0.5, 0.6), SoftKernel::make(-2.0, 1.7),
                                              GrazingKernel::make(-0.5, 0.6, M_PI / 8),
                                              CoulombKernel::make(0.01, 0.01), CoulombKernel::make(0.3, 0.0)};
  for (const auto& k : kernels) {
    const TailInverse t = tail_inverse(k);
    double prev_h = kInf;
    for (int i = 0; i < 1000; ++i) {
      // grid strictly inside the support, log-spaced for soft kernels
      const double th = k.family() == Family::kCoulomb
                            ? k.lo() + (k.hi() - k.lo()) * (i + 0.5) / 1000.0
                            : k.hi() * std::pow(1e-9, 1.0 - (i + 0.5) / 1000.0);
      const double h = t.H(th);
      EXPECT_LT(h, prev_h);
      prev_h = h;
      EXPECT_NEAR(t.G(h), th, 1e-10 * th) << to_string(k.family()) << " theta " << th;
    }
  }
}

TEST(TailInverse, Endpoints) {
  EXPECT_DOUBLE_EQ(tail_inverse(SoftKernel::make(-0.5, 0.6)).G(0.0), M_PI);
  const TailInverse c = tail_inverse(CoulombKernel::make(0.1, 0.1));
  EXPECT_NEAR(c.G(0.0), M_PI / 2, 1e-15);
  EXPECT_EQ(c.G(c.z_max() * 1.0001), 0.0);
  EXPECT_NEAR(c.G(c.z_max() * 0.9999999), 0.1, 1e-6);
  EXPECT_EQ(tail_inverse(SoftKernel::make(-0.5, 0.6)).z_max(), kInf);
}

TEST(TailInverse, GrazingScalingHalfPi) {
  const SoftKernel base = SoftKernel::make(-0.5, 0.6);
  const GrazingKernel g = GrazingKernel::make(-0.5, 0.6, M_PI / 2);
  for (double z : {1e-3, 0.1, 1.0, 7.0, 1e4}) EXPECT_NEAR(g.inverse(z), 0.5 * base.inverse(z / 4.0), 1e-15);
}

TEST(TailInverse, CoulombMonotoneAndBounded) {
  const TailInverse c = tail_inverse(CoulombKernel::make(0.03, 0.03));
  double prev = M_PI / 2;
  for (int i = 0; i <= 2000; ++i) {
    const double z = c.z_max() * 1.2 * i / 2000.0;
    const double g = c.G(z);
    EXPECT_LE(g, prev);
    EXPECT_GE(g, 0.0);
    EXPECT_LE(g, M_PI / 2);
    if (z > c.z_max()) EXPECT_EQ(g, 0.0);
    prev = g;
  }
}

TEST(ThetaMoment, SoftClosedForm) {
  const SoftKernel s = SoftKernel::make(-0.5, 0.6);
  for (double p : {1.0, 2.0, 4.0}) {
    const double closed = s.c_nu * std::pow(M_PI, p - s.nu) / (p - s.nu);
    EXPECT_NEAR(theta_moment(AngularKernel(s), p), closed, 1e-9 * closed);
  }
  EXPECT_THROW(theta_moment(AngularKernel(s), 0.5), ParameterError);
}

TEST(ThetaMoment, GrazingFourthBelowEpsSquaredSecond) {
  for (double eps : {M_PI / 2, M_PI / 8}) {
    const AngularKernel k(GrazingKernel::make(-0.5, 0.6, eps));
    EXPECT_LE(theta_moment(k, 4.0), eps * eps * theta_moment(k, 2.0));
  }
}

TEST(ThetaMoment, CoulombFourthDecaysLikeInverseLog) {
  double prev = kInf;
  std::vector<double> products;
  for (double eps : {0.1, 0.01, 0.001}) {
    const double m4 = theta_moment(AngularKernel(CoulombKernel::make(eps, eps)), 4.0);
    EXPECT_LT(m4, prev);
    prev = m4;
    products.push_back(m4 * std::log(1.0 / eps));
  }
  for (double p : products) EXPECT_LT(p, 2.0 * products.front());
}

TEST(KConstant, CoulombAtMostTwo) {
  for (double eps : {0.9, 0.5, 0.3, 0.1, 0.01, 1e-4}) {
    const AngularKernel k(CoulombKernel::make(eps, eps));
    const double kc = k_constant(k);
    EXPECT_GT(kc, 0.0);
    EXPECT_LE(kc, 2.0) << eps;
    EXPECT_LE(std::abs(kc - 2.0), M_PI / 24.0 * theta_moment(k, 4.0));
  }
}

TEST(KConstant, GrazingTendsToTwo) {
  double prev_gap = kInf;
  for (double eps : {M_PI, M_PI / 2, M_PI / 8, M_PI / 32, M_PI / 128}) {
    const AngularKernel k(GrazingKernel::make(-0.5, 0.6, eps));
    const double kc = k_constant(k);
    const double gap = std::abs(kc - 2.0);
    EXPECT_LE(gap, M_PI / 24.0 * theta_moment(k, 4.0));
    EXPECT_LE(kc, 2.0);
    EXPECT_LT(gap, prev_gap);
    prev_gap = gap;
  }
  EXPECT_LT(prev_gap, 1e-4);
}

TEST(KConstant, ZeroKernel) { EXPECT_EQ(k_constant(AngularKernel(SoftKernel{-0.5, 0.6, 0.0})), 0.0); }

TEST(REta, Limits) {
  const AngularKernel soft(SoftKernel::make(-0.5, 0.6));
  EXPECT_NEAR(r_eta(soft, M_PI), 1.0, 1e-8);
  const AngularKernel g(GrazingKernel::make(-0.5, 0.6, M_PI / 8));
  EXPECT_NEAR(r_eta(g, M_PI / 8), 1.0, 1e-8);
  EXPECT_NEAR(r_eta(g, M_PI), 1.0, 1e-8);
  EXPECT_LT(r_eta(soft, 1e-12), 1e-10);
  const AngularKernel c(CoulombKernel::make(0.1, 0.1));
  EXPECT_NEAR(r_eta(c, M_PI / 2), 1.0, 1e-8);
  EXPECT_EQ(r_eta(c, 0.05), 0.0);
  EXPECT_THROW(r_eta(soft, 0.0), ParameterError);
}

TEST(ScalingA4, EqualArgumentsGiveZero) {
  const AngularKernel k(GrazingKernel::make(-0.5, 0.6, M_PI / 4));
  EXPECT_EQ(tail_gap_integral(k, 1.3, 1.3), 0.0);
}

TEST(ScalingA4, MatchesDirectIntegralOverZ) {
  // oracle: integrate (G(z/x) - G(z/y))^2 over z in [0, inf) after z = e^s
  const AngularKernel k(GrazingKernel::make(-0.5, 0.6, M_PI / 4));
  const double x = 0.7, y = 2.5;
  const double direct = ts_integrate(
      [&](double s) {
        const double z = std::exp(s);
        const double d = k.inverse(z / x) - k.inverse(z / y);
        return d * d * z;
      },
      -60.0, 200.0);
  EXPECT_NEAR(tail_gap_integral(k, x, y), direct, 1e-8 * direct);
}

TEST(ScalingA4, EpsIndependentAndRatioBounded) {
  const auto xy = random_pairs(1000, 11);
  const ScalingReport rep = verify_scaling_A4(SoftKernel::make(-0.5, 0.6), {M_PI / 4, M_PI / 16}, xy);
  EXPECT_EQ(rep.pairs, 1000u);
  EXPECT_LE(rep.max_rel_diff, 1e-6);
  EXPECT_TRUE(std::isfinite(rep.max_ratio));
  EXPECT_GT(rep.min_ratio, 0.0);
  // x/y -> 0 limit of the ratio is int G^2 = int theta^2 beta = 4/pi
  EXPECT_GE(rep.max_ratio, 0.99 * 4.0 / M_PI);
}

TEST(CoulombA5, DualQuadratureAtOneTwo) {
  const AngularKernel k(CoulombKernel::make(0.1, 0.0));
  const double zm = k.z_max();
  auto f = [&](double z) {
    const double d = k.inverse(z) - k.inverse(z / 2.0);
    return d * d;
  };
  // G(z) jumps to 0 at z_max, so split there; second pass at half step.
  const double coarse = quad::simpson(f, 0.0, zm * (1 - 1e-15), 20000) + quad::simpson(f, zm * (1 + 1e-15), 2 * zm * (1 - 1e-15), 20000);
  const double fine = quad::simpson(f, 0.0, zm * (1 - 1e-15), 40000) + quad::simpson(f, zm * (1 + 1e-15), 2 * zm * (1 - 1e-15), 40000);
  EXPECT_NEAR(coarse, fine, 1e-7 * fine);
  EXPECT_NEAR(tail_gap_integral(k, 1.0, 2.0), fine, 1e-6 * fine);
}

TEST(CoulombA5, RatioBoundedAcrossEps) {
  const auto xy = random_pairs(1000, 12);
  const A5Report rep = verify_A5({0.3, 0.1, 0.03}, xy);
  ASSERT_EQ(rep.sup_ratio.size(), 3u);
  for (double s : rep.sup_ratio) {
    EXPECT_TRUE(std::isfinite(s));
    EXPECT_GT(s, 0.0);
  }
}
