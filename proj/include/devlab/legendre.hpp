#ifndef DEVLAB_LEGENDRE_HPP
#define DEVLAB_LEGENDRE_HPP

#include <cmath>
#include <limits>
#include <vector>

#include "devlab/cgf.hpp"
#include "devlab/errors.hpp"
#include "devlab/extended_real.hpp"

namespace devlab {

struct ConjugateResult {
  enum class Boundary { interior, lower_edge, upper_edge, unbounded };

  ExtReal value;          // sup_theta { theta x - Lambda(theta) }
  double argmax_theta = 0.0;
  Boundary boundary = Boundary::interior;
  int iterations = 0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
};

struct ConjugateOptions {
  double expansion_factor = 2.0;
  double initial_step = 1.0;
  int max_expansions = 200;
  double relative_width = 1e-10;
};

/// Legendre-Fenchel conjugate sup_theta { theta x - Lambda(theta) } of a
/// convex Lambda with Lambda(0) = 0, searched inside `hint`.
///
/// The concave objective is bracketed by geometric expansion from 0 and the
/// bracket is refined by golden-section search. The supremum is reported as
/// +inf when the expansion runs out, or when the objective keeps a slope of
/// at least 90% of its value ten doublings earlier (three decades of theta).
template <class Lambda>
ConjugateResult conjugate(const Lambda& lambda, double x, ThetaDomain hint, const ConjugateOptions& opt = {}) {
  if (!std::isfinite(x)) throw ArgumentError("conjugate: x must be finite");
  if (!(hint.lower < ExtReal(0.0) && ExtReal(0.0) < hint.upper))
    throw ArgumentError("conjugate: domain hint must contain 0 in its interior");

  ConjugateResult res;
  double best_theta = 0.0;
  double best_value = -std::numeric_limits<double>::infinity();
  auto clip = [&](double t) {
    if (hint.upper.is_finite() && t > hint.upper.value()) return hint.upper.value();
    if (hint.lower.is_finite() && t < hint.lower.value()) return hint.lower.value();
    return t;
  };
  auto objective = [&](double t) {
    const ExtReal l = lambda(t);
    const double v = l.is_finite() ? t * x - l.value() : -std::numeric_limits<double>::infinity();
    ++res.iterations;
    if (v > best_value || (v == best_value && std::abs(t) < std::abs(best_theta))) {
      best_value = v;
      best_theta = t;
    }
    return v;
  };

  const double f0 = objective(0.0);
  if (!std::isfinite(f0)) throw ArgumentError("conjugate: Lambda must be finite at 0");
  const double tp = clip(opt.initial_step), tm = clip(-opt.initial_step);
  const double fp = objective(tp);
  const double fm = tp == 0.0 ? f0 : objective(tm);

  double lo = tm, hi = tp;
  if (fp > f0 || fm > f0) {
    const double dir = fp > f0 ? 1.0 : -1.0;
    double prev = 0.0, cur = dir > 0 ? tp : tm;
    double fprev = f0, fcur = dir > 0 ? fp : fm;
    std::vector<double> slopes{(fcur - fprev) / std::abs(cur - prev)};
    bool closed = false;
    for (int k = 0; k < opt.max_expansions; ++k) {
      const double next = clip(cur * opt.expansion_factor);
      if (next == cur) {  // pinned at a finite edge of the hint
        lo = std::min(prev, cur);
        hi = std::max(prev, cur);
        closed = true;
        break;
      }
      const double fnext = objective(next);
      if (fnext < fcur) {
        lo = std::min(prev, next);
        hi = std::max(prev, next);
        closed = true;
        break;
      }
      slopes.push_back((fnext - fcur) / std::abs(next - cur));
      prev = cur;
      fprev = fcur;
      cur = next;
      fcur = fnext;
      const std::size_t s = slopes.size();
      if (s > 10 && std::abs(cur) >= 1e3 && slopes[s - 1] > 0.0 && slopes[s - 1] >= 0.9 * slopes[s - 11]) break;
    }
    (void)fprev;
    if (!closed) {
      res.value = ExtReal::pos_inf();
      res.argmax_theta = cur;
      res.boundary = ConjugateResult::Boundary::unbounded;
      res.bracket_lo = std::min(prev, cur);
      res.bracket_hi = std::max(prev, cur);
      return res;
    }
  }

  // Golden-section refinement of the concave objective on [lo, hi].
  res.bracket_lo = lo;
  res.bracket_hi = hi;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = objective(c), fd = objective(d);
  while (b - a > opt.relative_width * std::max(1.0, std::abs(0.5 * (a + b)))) {
    if (fc > fd || (fc == fd && std::abs(c) <= std::abs(d))) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = objective(d);
    }
  }
  // The edges themselves are candidates (a supremum attained at a finite edge).
  if (hint.lower.is_finite() && lo == hint.lower.value()) objective(lo);
  if (hint.upper.is_finite() && hi == hint.upper.value()) objective(hi);

  res.value = ExtReal(best_value);
  res.argmax_theta = best_theta;
  const double tol = opt.relative_width * std::max(1.0, std::abs(best_theta)) * 10.0;
  if (hint.lower.is_finite() && std::abs(best_theta - hint.lower.value()) <= tol)
    res.boundary = ConjugateResult::Boundary::lower_edge;
  else if (hint.upper.is_finite() && std::abs(best_theta - hint.upper.value()) <= tol)
    res.boundary = ConjugateResult::Boundary::upper_edge;
  return res;
}

/// Conjugate of kappa(.|z) at y, searched over the effective domain of kappa.
inline ConjugateResult conjugate_kappa(const ConditionalCgf& cgf, double y, ExtReal z,
                                       const ConjugateOptions& opt = {}) {
  return conjugate([&](double t) { return cgf.kappa(t, z); }, y, cgf.domain(z), opt);
}

}  // namespace devlab

#endif  // DEVLAB_LEGENDRE_HPP
