#include <cmath>
#include <random>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include "grazing/collision_geometry.hpp"

using namespace grazing;

namespace {

struct Gen {
  std::mt19937_64 g;
  explicit Gen(unsigned s) : g(s) {}
  Vec3 vec(double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    return {n(g), n(g), n(g)};
  }
  double uni(double a, double b) { return std::uniform_real_distribution<double>(a, b)(g); }
};

double rel(const Vec3& a, const Vec3& b, double scale) { return norm(a - b) / scale; }

// int_0^inf f(z) dz through z = e^s with double-exponential quadrature.
template <class F>
double z_integral(F f, double z_hi = kInf) {
  boost::math::quadrature::tanh_sinh<double> ts;
  if (std::isfinite(z_hi)) return ts.integrate(f, 0.0, z_hi, 1e-13);
  return ts.integrate([&](double s) { return f(std::exp(s)) * std::exp(s); }, -80.0, 80.0, 1e-13);
}

}  // namespace

TEST(Frame, UnitAxis) {
  const Vec3 X{1, 0, 0};
  const Frame f = frame(X);
  EXPECT_NEAR(dot(f.I, X), 0.0, 1e-12);
  EXPECT_NEAR(dot(f.J, X), 0.0, 1e-12);
  EXPECT_NEAR(dot(f.I, f.J), 0.0, 1e-12);
  EXPECT_NEAR(norm(f.I), 1.0, 1e-12);
  EXPECT_NEAR(norm(f.J), 1.0, 1e-12);
}

TEST(Frame, NormsScaleWithX) {
  const Frame f = frame({3, 0, 4});
  EXPECT_NEAR(norm(f.I), 5.0, 5e-12);
  EXPECT_NEAR(norm(f.J), 5.0, 5e-12);
}

TEST(Frame, RandomInvariants) {
  Gen g(1);
  for (int i = 0; i < 10000; ++i) {
    const Vec3 X = g.vec(std::exp(g.uni(-5, 5)));
    const double r = norm(X);
    const Frame f = frame(X);
    EXPECT_LE(std::abs(dot(f.I, X)), 1e-12 * r * r);
    EXPECT_LE(std::abs(dot(f.J, X)), 1e-12 * r * r);
    EXPECT_LE(std::abs(dot(f.I, f.J)), 1e-12 * r * r);
    EXPECT_NEAR(norm(f.I), r, 1e-12 * r);
    EXPECT_NEAR(norm(f.J), r, 1e-12 * r);
    // positively oriented
    EXPECT_GT(dot(cross(X, f.I), f.J), 0.0);
  }
}

TEST(Frame, IOddBitwise) {
  Gen g(2);
  for (int i = 0; i < 10000; ++i) {
    const Vec3 X = g.vec();
    const Frame a = frame(X);
    const Frame b = frame(-X);
    EXPECT_EQ(b.I, -a.I);
    EXPECT_EQ(b.J, a.J);
  }
}

TEST(Frame, OddVariantFullyAntisymmetric) {
  Gen g(3);
  for (int i = 0; i < 10000; ++i) {
    const Vec3 X = g.vec();
    const Frame a = frame_odd(X);
    const Frame b = frame_odd(-X);
    EXPECT_EQ(b.I, -a.I);
    EXPECT_EQ(b.J, -a.J);
  }
}

TEST(Frame, OddVariantBreaksTanakaAlignment) {
  // Nearby vectors on both sides of the orientation flip: no rotation aligns the frames.
  const double d = 1e-6;
  const Vec3 X{d, 1, 0}, Y{-d, 1, 0};
  const Frame fx = frame_odd(X), fy = frame_odd(Y);
  const double p0 = phi_zero(fx, fy);
  double worst = 0.0;
  for (int k = 0; k < 32; ++k) {
    const double phi = 2 * M_PI * k / 32;
    worst = std::max(worst, norm(gamma_vec(fx, phi) - gamma_vec(fy, phi + p0)) / norm(X - Y));
  }
  EXPECT_GT(worst, 1e5);
  // The oriented frame keeps the ratio small on the same pair.
  const Frame gx = frame(X), gy = frame(Y);
  const double q0 = phi_zero(gx, gy);
  worst = 0.0;
  for (int k = 0; k < 32; ++k) {
    const double phi = 2 * M_PI * k / 32;
    worst = std::max(worst, norm(gamma_vec(gx, phi) - gamma_vec(gy, phi + q0)) / norm(X - Y));
  }
  EXPECT_LE(worst, 3.0);
}

TEST(Frame, ZeroRejected) {
  EXPECT_THROW(frame({0, 0, 0}), DegenerateInputError);
  EXPECT_THROW(gamma_vec(Vec3{0, 0, 0}, 0.3), DegenerateInputError);
  EXPECT_THROW(phi_zero(Vec3{1, 0, 0}, Vec3{0, 0, 0}), DegenerateInputError);
}

TEST(Frame, Deterministic) {
  Gen g(4);
  for (int i = 0; i < 100; ++i) {
    const Vec3 X = g.vec(), Y = g.vec();
    EXPECT_EQ(frame(X).I, frame(X).I);
    EXPECT_EQ(frame(X).J, frame(X).J);
    EXPECT_EQ(phi_zero(X, Y), phi_zero(X, Y));
  }
}

TEST(GammaVec, BasicIdentities) {
  Gen g(5);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 X = g.vec(3.0);
    const double phi = g.uni(0, 2 * M_PI);
    const Vec3 G = gamma_vec(X, phi);
    EXPECT_LE(std::abs(dot(G, X)), 1e-12 * norm2(X));
    EXPECT_NEAR(norm(G), norm(X), 1e-12 * norm(X));
  }
  const Vec3 X{0.3, -1.2, 2.0};
  EXPECT_EQ(gamma_vec(X, 0.0), frame(X).I);
}

TEST(GammaVec, AngularMeanAndSecondMoment) {
  const Vec3 X{0.3, -1.2, 2.0};
  const int n = 10000;
  Vec3 mean{};
  Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
  for (int k = 0; k < n; ++k) {
    const Vec3 G = gamma_vec(X, 2 * M_PI * k / n);
    mean += G;
    M += to_eigen(G) * to_eigen(G).transpose();
  }
  mean *= 2 * M_PI / n;
  M *= 2 * M_PI / n;
  EXPECT_LE(norm(mean), 1e-10 * norm(X));
  const Eigen::Vector3d x = to_eigen(X);
  const Eigen::Matrix3d expect = M_PI * (x.squaredNorm() * Eigen::Matrix3d::Identity() - x * x.transpose());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(M(i, j), expect(i, j), 1e-8 * expect.norm());
}

TEST(Deviate, Endpoints) {
  const Vec3 v{1, 2, 3}, w{-0.5, 0.25, 4};
  const Deviation d0 = deviate(v, w, 0.0, 1.0);
  EXPECT_EQ(d0.v_prime, v);
  EXPECT_EQ(d0.v_star_prime, w);
  const Deviation dpi = deviate(v, w, M_PI, 1.0);
  EXPECT_LE(norm(dpi.v_prime - w), 1e-14 * norm(v));
  EXPECT_LE(norm(dpi.v_star_prime - v), 1e-14 * norm(v));
  const Deviation same = deviate(v, v, 1.0, 1.0);
  EXPECT_EQ(same.a, Vec3{});
}

TEST(Deviate, ConservationOnRandomEvents) {
  Gen g(6);
  for (int i = 0; i < 100000; ++i) {
    const Vec3 v = g.vec(), w = g.vec();
    const double th = g.uni(0, M_PI), phi = g.uni(0, 2 * M_PI);
    const Deviation d = deviate(v, w, th, phi);
    const double e = norm2(v) + norm2(w);
    ASSERT_LE(norm(d.v_prime + d.v_star_prime - v - w), 1e-12 * std::sqrt(e));
    ASSERT_NEAR(norm2(d.v_prime) + norm2(d.v_star_prime), e, 1e-12 * e);
    ASSERT_NEAR(norm2(d.a), 0.5 * (1 - std::cos(th)) * norm2(v - w), 1e-12 * e);
  }
}

TEST(Deviate, AngularMeanOfDisplacement) {
  // int_0^{2 pi} a dphi = -pi (1 - cos theta)(v - v_star)
  const Vec3 v{1, 2, 3}, w{-0.5, 0.25, 4};
  for (double th : {0.01, 0.7, 2.5}) {
    Vec3 s{};
    const int n = 4096;
    for (int k = 0; k < n; ++k) s += deviate(v, w, th, 2 * M_PI * k / n).a;
    s *= 2 * M_PI / n;
    const Vec3 expect = -M_PI * (1 - std::cos(th)) * (v - w);
    EXPECT_LE(norm(s - expect), 1e-12 * norm(v - w));
  }
}

TEST(PhiZero, IdentityPair) {
  const Vec3 X{0.4, -2, 1};
  EXPECT_NEAR(phi_zero(X, X), 0.0, 1e-15);
}

TEST(PhiZero, TanakaBoundRandomPairs) {
  Gen g(7);
  double worst = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const Vec3 X = g.vec();
    // mix of far and near pairs
    const Vec3 Y = (i % 2 == 0) ? g.vec() : X + g.vec(std::exp(g.uni(-12, 0)));
    const Frame fx = frame(X), fy = frame(Y);
    const double p0 = phi_zero(fx, fy);
    for (int k = 0; k < 32; ++k) {
      const double phi = 2 * M_PI * k / 32;
      worst = std::max(worst, norm(gamma_vec(fx, phi) - gamma_vec(fy, phi + p0)) / norm(X - Y));
    }
  }
  EXPECT_LE(worst, 3.0);
}

TEST(PhiZero, OppositeVectors) {
  Gen g(8);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 X = g.vec();
    const double p0 = phi_zero(X, -X);
    for (int k = 0; k < 32; ++k) {
      const double phi = 2 * M_PI * k / 32;
      const double d = norm(gamma_vec(X, phi) - gamma_vec(-X, phi + p0));
      EXPECT_LE(d, 2 * norm(X) * (1 + 1e-12));
    }
  }
}

TEST(JumpC, DegenerateAndCoulombSupport) {
  const AngularKernel k(GrazingKernel::make(-0.5, 0.6, M_PI / 4));
  EXPECT_EQ(jump_c(k, {1, 1, 1}, {1, 1, 1}, 0.3, 0.2), Vec3{});
  EXPECT_EQ(jump_d(k, {1, 1, 1}, {1, 1, 1}, 0.3, 0.2), Vec3{});
  const AngularKernel c(CoulombKernel::make(0.1, 0.1));
  const Vec3 v{1, 0, 0}, w{0, 0.5, 0};
  const double phi_v = c.velocity_factor(norm(v - w));
  EXPECT_EQ(jump_c(c, v, w, 1.001 * phi_v * c.z_max(), 0.3), Vec3{});
  EXPECT_NE(jump_c(c, v, w, 0.999 * phi_v * c.z_max(), 0.3), Vec3{});
}

TEST(JumpC, SecondMomentIdentitySoft) {
  Gen g(9);
  for (const AngularKernel& k : {AngularKernel(GrazingKernel::make(-0.5, 0.6, M_PI / 4)),
                                 AngularKernel(SoftKernel::make(-1.5, 1.2))}) {
    const double kc = k_constant(k);
    const double m4 = theta_moment(k, 4.0);
    for (int i = 0; i < 20; ++i) {
      const Vec3 v = g.vec(), w = g.vec();
      const double r = norm(v - w);
      // angular integral by an 8-node trapezoid (exact for trigonometric degree < 8)
      auto ang = [&](auto fn, double z) {
        double s = 0.0;
        for (int m = 0; m < 8; ++m) s += fn(z, 2 * M_PI * m / 8);
        return s * 2 * M_PI / 8;
      };
      const double cc = z_integral([&](double z) {
        return ang([&](double zz, double phi) { return norm2(jump_c(k, v, w, zz, phi)); }, z);
      });
      const double expect = kc * std::pow(r, k.gamma() + 2);
      EXPECT_NEAR(cc, expect, 1e-6 * expect);
      const double cd = z_integral([&](double z) {
        return ang([&](double zz, double phi) { return norm2(jump_c(k, v, w, zz, phi) - jump_d(k, v, w, zz, phi)); },
                   z);
      });
      EXPECT_LE(cd / (m4 * std::pow(r, k.gamma() + 2)), 1.0);
    }
  }
}

TEST(JumpC, SecondMomentIdentityCoulomb) {
  Gen g(10);
  for (double eps : {0.3, 0.05}) {
    const AngularKernel k(CoulombKernel::make(eps, 0.0));
    const double kc = k_constant(k);
    EXPECT_LE(kc, 2.0);
    for (int i = 0; i < 20; ++i) {
      const Vec3 v = g.vec(), w = g.vec();
      const double r = norm(v - w);
      const double zhi = k.velocity_factor(r) * k.z_max();
      const double cc = 2 * M_PI * z_integral([&](double z) { return norm2(jump_c(k, v, w, z, 0.0)); }, zhi);
      const double expect = kc / r;
      EXPECT_NEAR(cc, expect, 1e-6 * expect);
    }
  }
}

TEST(JumpD, ZeroAngularMean) {
  const AngularKernel k(GrazingKernel::make(-0.5, 0.6, M_PI / 4));
  const Vec3 v{0.2, 1, -1}, w{1, 0, 0.5};
  for (double z : {0.01, 1.0, 100.0}) {
    Vec3 s{};
    for (int m = 0; m < 64; ++m) s += jump_d(k, v, w, z, 2 * M_PI * m / 64);
    EXPECT_LE(norm(s), 1e-12 * 64 * norm(v - w));
  }
}

TEST(JumpC, CoulombRegularizationPerturbation) {
  Gen g(11);
  const double eps = 0.1;
  const AngularKernel pure(CoulombKernel::make(eps, 0.0));
  std::vector<double> sup;
  for (double h : {1e-1, 1e-2, 1e-3}) {
    const AngularKernel reg(CoulombKernel::make(eps, h));
    double s = 0.0;
    for (int i = 0; i < 20; ++i) {
      const Vec3 v = g.vec(), w = g.vec();
      const double r = norm(v - w);
      const double zhi = pure.velocity_factor(r) * pure.z_max();
      const double gap = 2 * M_PI * z_integral(
                                        [&](double z) {
                                          return norm2(jump_c(reg, v, w, z, 0.0) - jump_c(pure, v, w, z, 0.0));
                                        },
                                        zhi);
      s = std::max(s, gap / (h / (r * r)));
    }
    EXPECT_TRUE(std::isfinite(s));
    sup.push_back(s);
  }
  // no blow-up as h decreases
  EXPECT_LE(sup[2], 2.0 * sup[0]);
  EXPECT_LE(sup[1], 2.0 * sup[0]);
}

TEST(Compensator, Limits) {
  const Vec3 v{0.5, -1, 2}, w{0, 0.3, -0.2};
  const AngularKernel soft(SoftKernel::make(-0.5, 0.6));
  const Vec3 full = compensator_drift(soft, v, w, M_PI);
  const Vec3 expect = -k_constant(soft) * soft.velocity_factor(norm(v - w)) * (v - w);
  EXPECT_LE(norm(full - expect), 1e-10 * norm(expect));
  EXPECT_LE(norm(compensator_drift(soft, v, w, 1e-12)), 1e-6 * norm(expect));
  const AngularKernel g(GrazingKernel::make(-0.5, 0.6, M_PI / 8));
  const Vec3 gfull = -k_constant(g) * g.velocity_factor(norm(v - w)) * (v - w);
  EXPECT_LE(norm(compensator_drift(g, v, w, M_PI / 8) - gfull), 1e-10 * norm(gfull));
  EXPECT_THROW(compensator_drift(g, v, w, 0.0), ParameterError);
  const AngularKernel c(CoulombKernel::make(0.1, 0.1));
  EXPECT_EQ(compensator_drift(c, v, w, 0.05), Vec3{});
}
