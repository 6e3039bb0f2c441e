#pragma once

#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "grazing/error.hpp"

namespace grazing::quad {

inline constexpr double kAbsTol = 1e-10;
inline constexpr double kRelTol = 1e-12;

/// Which endpoints of [a, b] may carry an integrable singularity.
enum class Singular { kNone, kLeft, kRight, kBoth };

struct Result {
  double value = 0.0;
  double error = 0.0;
};

namespace detail {

// One 15-point Kronrod panel with its embedded 7-point Gauss error estimate.
template <class F>
Result gk15_panel(F& f, double a, double b) {
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0, &err);
  // boost reports the panel error on the reference interval [-1, 1]
  return {v, err * 0.5 * (b - a)};
}

// Global adaptive bisection (QAG style): split the panel with the largest error
// until the summed error estimate meets the tolerance.
template <class F>
Result gk15(F&& f, double a, double b, double abs_tol = 1e-3 * kAbsTol, int max_panels = 2000) {
  struct Panel {
    double a, b;
    Result r;
    bool operator<(const Panel& o) const { return r.error < o.r.error; }
  };
  std::priority_queue<Panel> heap;
  Result total = gk15_panel(f, a, b);
  heap.push({a, b, total});
  while (static_cast<int>(heap.size()) < max_panels &&
         total.error > std::max(abs_tol, 1e-3 * kRelTol * std::abs(total.value))) {
    const Panel p = heap.top();
    heap.pop();
    const double m = 0.5 * (p.a + p.b);
    if (!(m > p.a && m < p.b)) {
      heap.push(p);
      break;
    }
    const Result l = gk15_panel(f, p.a, m);
    const Result r = gk15_panel(f, m, p.b);
    total.value += l.value + r.value - p.r.value;
    total.error += l.error + r.error - p.r.error;
    heap.push({p.a, m, l});
    heap.push({m, p.b, r});
  }
  // re-sum to shed the drift from incremental updates
  Result sum;
  while (!heap.empty()) {
    sum.value += heap.top().r.value;
    sum.error += heap.top().r.error;
    heap.pop();
  }
  return sum;
}

// Integrates over [a, b] with the singular endpoint at a (toward_left) or b by
// splitting into dyadic pieces whose width halves toward the singular endpoint;
// each piece is smooth on its own scale.
template <class F>
Result dyadic(F&& f, double a, double b, bool toward_left) {
  Result total;
  const double w = b - a;
  double prev = 0.0;
  double last = 0.0;
  int quiet = 0;
  // Near a nonzero endpoint the abscissae lose relative precision, so stop
  // while pieces are still resolved and extrapolate the rest.
  const double floor = 1e-10 * std::abs(toward_left ? a : b);
  for (int k = 0; k < 1100; ++k) {
    if (k > 2 && std::ldexp(w, -k) < floor) break;
    const double lo = toward_left ? a + std::ldexp(w, -k - 1) : b - std::ldexp(w, -k);
    const double hi = toward_left ? a + std::ldexp(w, -k) : b - std::ldexp(w, -k - 1);
    if (!(lo > a && hi < b) && k > 0) break;
    const Result piece = gk15(f, lo, hi);
    total.value += piece.value;
    total.error += piece.error;
    if (std::abs(piece.value) <= 1e-17 + 1e-16 * std::abs(total.value)) {
      if (++quiet >= 3) return total;
    } else {
      quiet = 0;
    }
    prev = last;
    last = piece.value;
  }
  // Ran out of resolvable pieces. For a power-law singularity the pieces
  // decay geometrically, so the remainder is summed in closed form.
  const double r = prev != 0.0 ? last / prev : 0.0;
  if (r > 0.0 && r < 0.95) {
    const double tail = last * r / (1.0 - r);
    total.value += tail;
    total.error += 1e-6 * std::abs(tail);
    return total;
  }
  total.error = std::numeric_limits<double>::infinity();
  return total;
}

}  // namespace detail

/// Adaptive Gauss-Kronrod (7/15) integral of f over [a, b].
///
/// Integrable endpoint singularities are handled by dyadic splitting toward
/// the flagged endpoint(s). Throws NumericalError when the error estimate
/// exceeds max(abs_tol, kRelTol * |value|).
template <class F>
double integrate(F&& f, double a, double b, Singular sing = Singular::kNone, double abs_tol = kAbsTol) {
  if (!(b > a)) return 0.0;
  Result r;
  switch (sing) {
    case Singular::kNone:
      r = detail::gk15(f, a, b);
      break;
    case Singular::kLeft:
      r = detail::dyadic(f, a, b, true);
      break;
    case Singular::kRight:
      r = detail::dyadic(f, a, b, false);
      break;
    case Singular::kBoth: {
      const double m = 0.5 * (a + b);
      const Result left = detail::dyadic(f, a, m, true);
      const Result right = detail::dyadic(f, m, b, false);
      r = {left.value + right.value, left.error + right.error};
      break;
    }
  }
  if (!std::isfinite(r.value) || r.error > std::max(abs_tol, kRelTol * std::abs(r.value))) {
    std::ostringstream os;
    os << "quadrature did not converge on [" << a << ", " << b << "]: value " << r.value << ", error estimate "
       << r.error;
    throw NumericalError(os.str());
  }
  return r.value;
}

/// Composite Simpson rule with n panels (n rounded up to even).
template <class F>
double simpson(F&& f, double a, double b, int n) {
  if (n % 2 != 0) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 == 1 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

}  // namespace grazing::quad
