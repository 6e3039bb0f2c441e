#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>
#include <boost/math/special_functions/digamma.hpp>

#include "grazing/error.hpp"
#include "grazing/landau_coefficients.hpp"
#include "grazing/vec3.hpp"

namespace grazing {

inline constexpr std::size_t kExactW2Guard = 4096;

/// Optimal assignment for the squared Euclidean cost (Hungarian method with
/// potentials, O(N^3)); returns perm with A[i] matched to B[perm[i]].
inline std::vector<std::size_t> optimal_assignment(const std::vector<Vec3>& A, const std::vector<Vec3>& B) {
  const std::size_t n = A.size();
  if (B.size() != n) throw ParameterError("assignment needs clouds of equal size");
  constexpr double inf = std::numeric_limits<double>::infinity();
  // 1-based arrays as in the textbook formulation; column 0 is a sentinel.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      const Vec3 a = A[i0 - 1];
      const double ui0 = u[i0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = norm2(a - B[j - 1]) - ui0 - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> perm(n);
  for (std::size_t j = 1; j <= n; ++j) perm[p[j] - 1] = j - 1;
  return perm;
}

/// Squared W2 between the empirical measures of two equal-size clouds.
inline double w2_squared_exact(const std::vector<Vec3>& A, const std::vector<Vec3>& B) {
  if (A.size() != B.size()) throw ParameterError("w2_exact needs clouds of equal size");
  if (A.size() > kExactW2Guard)
    throw ParameterError("w2_exact is limited to N <= " + std::to_string(kExactW2Guard) + "; use w2_entropic");
  if (A.empty()) return 0.0;
  const auto perm = optimal_assignment(A, B);
  double s = 0.0;
  for (std::size_t i = 0; i < A.size(); ++i) s += norm2(A[i] - B[perm[i]]);
  return s / static_cast<double>(A.size());
}

inline double w2_exact(const std::vector<Vec3>& A, const std::vector<Vec3>& B) {
  return std::sqrt(w2_squared_exact(A, B));
}

struct EntropicResult {
  double value = 0.0;        ///< sqrt of the debiased divergence
  double divergence = 0.0;   ///< OT_reg(A,B) - (OT_reg(A,A) + OT_reg(B,B)) / 2
  double residual = 0.0;     ///< worst L1 marginal violation over the three solves
  bool converged = true;
};

namespace detail {

struct SinkhornOut {
  double value;
  double residual;
  bool converged;
};

// Log-domain Sinkhorn between uniform measures with reg-annealing.
inline SinkhornOut sinkhorn(const std::vector<Vec3>& A, const std::vector<Vec3>& B, double reg, int iters,
                            double tol) {
  const std::size_t n = A.size(), m = B.size();
  std::vector<double> C(n * m);
  double cmax = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      C[i * m + j] = norm2(A[i] - B[j]);
      cmax = std::max(cmax, C[i * m + j]);
    }
  const double log_n = std::log(static_cast<double>(n)), log_m = std::log(static_cast<double>(m));
  std::vector<double> f(n, 0.0), g(m, 0.0), buf(std::max(n, m));
  auto update_f = [&](double e) {
    for (std::size_t i = 0; i < n; ++i) {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < m; ++j) mx = std::max(mx, (g[j] - C[i * m + j]) / e);
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) s += std::exp((g[j] - C[i * m + j]) / e - mx);
      f[i] = -e * (mx + std::log(s) - log_m);
    }
  };
  auto update_g = [&](double e) {
    for (std::size_t j = 0; j < m; ++j) {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, (f[i] - C[i * m + j]) / e);
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += std::exp((f[i] - C[i * m + j]) / e - mx);
      g[j] = -e * (mx + std::log(s) - log_n);
    }
  };
  // row-marginal violation after a g-update (columns are then exact)
  auto residual = [&](double e) {
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) s += std::exp((f[i] + g[j] - C[i * m + j]) / e);
      r += std::abs(s / static_cast<double>(n * m) - 1.0 / static_cast<double>(n));
    }
    return r;
  };
  // anneal the regularization, solving each level loosely before the next
  double e = std::max(reg, cmax);
  while (e > reg) {
    for (int k = 0; k < 50; ++k) {
      update_f(e);
      update_g(e);
      if (k % 5 == 4 && residual(e) < 1e-3) break;
    }
    e = std::max(reg, 0.25 * e);
  }
  double res = 1.0;
  for (int it = 0; it < iters; ++it) {
    update_f(reg);
    update_g(reg);
    if (it % 5 == 4 || it + 1 == iters) {
      res = residual(reg);
      if (res < tol) break;
    }
  }
  double value = 0.0;
  for (double x : f) value += x / static_cast<double>(n);
  for (double x : g) value += x / static_cast<double>(m);
  return {value, res, res < tol};
}

}  // namespace detail

/// Debiased entropic OT (Sinkhorn divergence) with squared Euclidean cost.
inline EntropicResult w2_entropic(const std::vector<Vec3>& A, const std::vector<Vec3>& B, double reg,
                                  int iters = 1000, double tol = 2e-3) {
  if (!(reg > 0.0)) throw ParameterError("entropic regularization must be positive");
  if (A.empty() || B.empty()) throw ParameterError("w2_entropic needs nonempty clouds");
  if (A.size() > kExactW2Guard || B.size() > kExactW2Guard)
    throw ParameterError("w2_entropic stores the dense cost matrix; N is limited to " + std::to_string(kExactW2Guard));
  const auto ab = detail::sinkhorn(A, B, reg, iters, tol);
  const auto aa = detail::sinkhorn(A, A, reg, iters, tol);
  const auto bb = detail::sinkhorn(B, B, reg, iters, tol);
  EntropicResult r;
  r.divergence = ab.value - 0.5 * (aa.value + bb.value);
  r.value = std::sqrt(std::max(0.0, r.divergence));
  r.residual = std::max({ab.residual, aa.residual, bb.residual});
  r.converged = ab.converged && aa.converged && bb.converged;
  return r;
}

/// Kozachenko-Leonenko estimate of H(f) = int f log f (negative differential entropy).
inline double entropy_knn(const std::vector<Vec3>& v, int k = 4) {
  namespace bg = boost::geometry;
  namespace bgi = boost::geometry::index;
  using Point = bg::model::point<double, 3, bg::cs::cartesian>;
  using Value = std::pair<Point, std::size_t>;
  const std::size_t n = v.size();
  if (n < static_cast<std::size_t>(k) + 1) throw ParameterError("kNN entropy needs N >= k + 1");
  std::vector<Value> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) pts.emplace_back(Point(v[i].x, v[i].y, v[i].z), i);
  const bgi::rtree<Value, bgi::rstar<16>> tree(pts.begin(), pts.end());
  double sum_log = 0.0;
  std::vector<Value> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.clear();
    tree.query(bgi::nearest(pts[i].first, static_cast<unsigned>(k + 1)), std::back_inserter(out));
    double kth = 0.0;
    std::vector<double> d;
    for (const auto& o : out)
      if (o.second != i) d.push_back(bg::distance(pts[i].first, o.first));
    std::sort(d.begin(), d.end());
    kth = d.size() >= static_cast<std::size_t>(k) ? d[k - 1] : d.back();
    sum_log += std::log(std::max(kth, 1e-300));
  }
  const double dn = static_cast<double>(n);
  const double h_diff = boost::math::digamma(dn) - boost::math::digamma(static_cast<double>(k)) +
                        std::log(4.0 * std::numbers::pi / 3.0) + 3.0 * sum_log / dn;
  return -h_diff;
}

/// Histogram estimate of int f log f on a cubic grid covering the cloud.
inline double entropy_histogram(const std::vector<Vec3>& v, int bins_per_axis = 24) {
  if (v.empty()) throw ParameterError("histogram entropy of an empty cloud");
  Vec3 lo = v[0], hi = v[0];
  for (const Vec3& x : v)
    for (int c = 0; c < 3; ++c) {
      lo[c] = std::min(lo[c], x[c]);
      hi[c] = std::max(hi[c], x[c]);
    }
  const int b = bins_per_axis;
  std::vector<double> w(3);
  for (int c = 0; c < 3; ++c) w[c] = std::max((hi[c] - lo[c]) / b, 1e-12) * (1 + 1e-12);
  std::vector<std::size_t> count(static_cast<std::size_t>(b) * b * b, 0);
  for (const Vec3& x : v) {
    std::size_t idx = 0;
    for (int c = 0; c < 3; ++c) idx = idx * b + std::min<std::size_t>(b - 1, static_cast<std::size_t>((x[c] - lo[c]) / w[c]));
    ++count[idx];
  }
  const double vol = w[0] * w[1] * w[2];
  const double n = static_cast<double>(v.size());
  double h = 0.0;
  for (std::size_t c : count)
    if (c > 0) {
      const double p = static_cast<double>(c) / n;
      h += p * std::log(p / vol);
    }
  return h;
}

/// J_alpha = max over cloud points v of mean_{v_* != v} |v - v_*|^alpha (diagonal excluded).
inline double j_alpha(const std::vector<Vec3>& v, double alpha) {
  if (!(alpha > -3.0 && alpha <= 0.0)) throw ParameterError("alpha must lie in (-3, 0]");
  if (alpha == 0.0) return 1.0;
  const std::size_t n = v.size();
  if (n < 2) throw ParameterError("J_alpha needs at least two points");
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double r = norm(v[i] - v[j]);
      s += r == 0.0 ? std::numeric_limits<double>::infinity() : std::pow(r, alpha);
    }
    best = std::max(best, s / static_cast<double>(n - 1));
  }
  return best;
}

/// Mean Landau matrix of the cloud seen from v: (1/N) sum_j l(v - v_j).
inline Eigen::Matrix3d mean_landau_matrix(const std::vector<Vec3>& cloud, double gamma, const Vec3& v) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  for (const Vec3& w : cloud) {
    const Vec3 z = v - w;
    if (norm2(z) > 0.0) m += l_eval(gamma, z);
  }
  return m / static_cast<double>(cloud.size());
}

/// min over the grids of xi . lbar(v) xi / (1 + |v|)^gamma with |xi| = 1.
inline double ellipticity_certificate(const std::vector<Vec3>& cloud, double gamma, const std::vector<Vec3>& v_grid,
                                      const std::vector<Vec3>& xi_grid) {
  if (!(gamma >= -3.0 && gamma < 0.0)) throw ParameterError("gamma must lie in [-3, 0)");
  if (cloud.empty() || v_grid.empty() || xi_grid.empty()) throw ParameterError("ellipticity grids must be nonempty");
  double best = std::numeric_limits<double>::infinity();
  for (const Vec3& v : v_grid) {
    const Eigen::Matrix3d m = mean_landau_matrix(cloud, gamma, v);
    const double w = std::pow(1.0 + norm(v), gamma);
    for (const Vec3& x : xi_grid) {
      const double r = norm(x);
      if (r == 0.0) throw ParameterError("ellipticity direction must be nonzero");
      const Eigen::Vector3d e = to_eigen(x) / r;
      best = std::min(best, e.dot(m * e) / w);
    }
  }
  return best;
}

/// Default grids: speeds {0, 0.5, 1, 2, 4} along 13 directions; the same 13 directions for xi.
inline std::vector<Vec3> default_directions() {
  std::vector<Vec3> d = {{1, 0, 0},  {0, 1, 0},  {0, 0, 1},  {1, 1, 0},  {1, -1, 0}, {1, 0, 1},  {1, 0, -1},
                         {0, 1, 1},  {0, 1, -1}, {1, 1, 1},  {1, 1, -1}, {1, -1, 1}, {-1, 1, 1}};
  for (Vec3& x : d) x = x / norm(x);
  return d;
}

inline std::vector<Vec3> default_velocity_grid() {
  std::vector<Vec3> g = {{0, 0, 0}};
  for (double s : {0.5, 1.0, 2.0, 4.0})
    for (const Vec3& d : default_directions()) g.push_back(s * d);
  return g;
}

struct FunctionalReport {
  std::vector<double> p_list;
  std::vector<double> moments;
  double m0 = 1.0;
  double entropy = 0.0;
  double alpha = 0.0;
  double j_alpha = 1.0;
  std::optional<double> ellipticity;
};

inline FunctionalReport functionals(const std::vector<Vec3>& cloud, const std::vector<double>& p_list, double alpha,
                                    std::optional<double> gamma = std::nullopt) {
  FunctionalReport r;
  r.p_list = p_list;
  for (double p : p_list) {
    double s = 0.0;
    for (const Vec3& x : cloud) s += p == 0.0 ? 1.0 : std::pow(norm(x), p);
    r.moments.push_back(s / static_cast<double>(cloud.size()));
  }
  r.entropy = entropy_knn(cloud);
  r.alpha = alpha;
  r.j_alpha = j_alpha(cloud, alpha);
  if (gamma) r.ellipticity = ellipticity_certificate(cloud, *gamma, default_velocity_grid(), default_directions());
  return r;
}

}  // namespace grazing
