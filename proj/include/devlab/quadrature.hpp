#ifndef DEVLAB_QUADRATURE_HPP
#define DEVLAB_QUADRATURE_HPP

// Adaptive Gauss-Kronrod (7/15) quadrature on finite or half-infinite
// intervals, plus a log-space variant for integrands that span hundreds of
// orders of magnitude.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "devlab/errors.hpp"
#include "devlab/extended_real.hpp"

namespace devlab::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;
  int panels = 0;
};

namespace detail {

// Kronrod abscissae on [0, 1] (symmetric), with Kronrod and embedded Gauss weights.
inline constexpr std::array<double, 8> kXk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel kronrod15(const F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = fc * kWk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXk[j];
    const double s = f(c - dx) + f(c + dx);
    kronrod += kWk[j] * s;
    if (j % 2 == 1) gauss += kWg[j / 2] * s;
  }
  kronrod *= h;
  gauss *= h;
  return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace detail

/// Adaptive GK15 over [breaks.front(), breaks.back()], starting from the
/// panels delimited by `breaks` and bisecting the worst panel until the total
/// error estimate is below max(abs_tol, rel_tol * |value|).
template <class F>
Result gauss_kronrod(const F& f, std::vector<double> breaks, double rel_tol, double abs_tol = 0.0,
                     int max_panels = 4000) {
  if (breaks.size() < 2) throw ArgumentError("gauss_kronrod: need at least two breakpoints");
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  std::priority_queue<detail::Panel> heap;
  double total = 0.0, err = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    auto p = detail::kronrod15(f, breaks[i], breaks[i + 1]);
    total += p.value;
    err += p.error;
    heap.push(p);
  }
  int panels = static_cast<int>(heap.size());
  while (err > std::max(abs_tol, rel_tol * std::abs(total)) && panels < max_panels) {
    const auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      heap.push(worst);
      break;
    }
    const auto left = detail::kronrod15(f, worst.a, mid);
    const auto right = detail::kronrod15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++panels;
  }
  // Re-sum to shed the cancellation accumulated by the running updates.
  total = 0.0;
  err = 0.0;
  std::vector<detail::Panel> all;
  all.reserve(heap.size());
  while (!heap.empty()) {
    all.push_back(heap.top());
    heap.pop();
  }
  std::sort(all.begin(), all.end(), [](const auto& l, const auto& r) { return l.a < r.a; });
  for (const auto& p : all) {
    total += p.value;
    err += p.error;
  }
  return {total, err, panels};
}

/// Change of variables that maps an interval with possibly infinite ends
/// onto a finite parameter range.
struct IntervalMap {
  ExtReal lo, hi;

  IntervalMap(ExtReal l, ExtReal h) : lo(l), hi(h) {
    if (!(lo < hi)) throw ArgumentError("integrate: empty interval");
  }

  double t_lo() const { return (lo.is_finite() && hi.is_finite()) ? lo.value() : (!lo.is_finite() && !hi.is_finite() ? -1.0 : 0.0); }
  double t_hi() const { return (lo.is_finite() && hi.is_finite()) ? hi.value() : 1.0; }

  /// x(t) and log|dx/dt|.
  std::pair<double, double> operator()(double t) const {
    if (lo.is_finite() && hi.is_finite()) return {t, 0.0};
    if (lo.is_finite()) {
      const double u = 1.0 - t;
      return {lo.value() + t / u, -2.0 * std::log(u)};
    }
    if (hi.is_finite()) {
      const double u = 1.0 - t;
      return {hi.value() - t / u, -2.0 * std::log(u)};
    }
    const double u = 1.0 - t * t;
    return {t / u, std::log1p(t * t) - 2.0 * std::log(u)};
  }
};

/// Integral of f over (lo, hi); infinite ends are mapped to a finite range.
template <class F>
Result integrate(const F& f, ExtReal lo, ExtReal hi, double rel_tol = 1e-10, double abs_tol = 0.0) {
  const IntervalMap map(lo, hi);
  auto g = [&](double t) {
    const auto [x, logjac] = map(t);
    const double fx = f(x);
    return fx == 0.0 ? 0.0 : fx * std::exp(logjac);
  };
  std::vector<double> breaks;
  const int initial = 8;
  for (int i = 0; i <= initial; ++i)
    breaks.push_back(map.t_lo() + (map.t_hi() - map.t_lo()) * i / initial);
  return gauss_kronrod(g, breaks, rel_tol, abs_tol);
}

/// log of the integral of exp(log_f) over (lo, hi). The integrand is shifted
/// by its largest probed value before exponentiation, and the interval is
/// split at the probed peak. Returns -inf for a vanishing integral.
template <class LogF>
ExtReal log_integrate(const LogF& log_f, ExtReal lo, ExtReal hi, double rel_tol = 1e-10) {
  const IntervalMap map(lo, hi);
  auto log_g = [&](double t) {
    const auto [x, logjac] = map(t);
    const double v = log_f(x);
    return v == -std::numeric_limits<double>::infinity() ? v : v + logjac;
  };
  const double a = map.t_lo(), b = map.t_hi();
  constexpr int probes = 512;
  double shift = -std::numeric_limits<double>::infinity();
  double peak = 0.5 * (a + b);
  for (int i = 0; i < probes; ++i) {
    const double t = a + (b - a) * (i + 0.5) / probes;
    const double v = log_g(t);
    if (v > shift) {
      shift = v;
      peak = t;
    }
  }
  if (shift == -std::numeric_limits<double>::infinity()) return ExtReal::neg_inf();
  auto g = [&](double t) {
    const double v = log_g(t);
    return v == -std::numeric_limits<double>::infinity() ? 0.0 : std::exp(v - shift);
  };
  std::vector<double> breaks{peak};
  const int initial = 8;
  for (int i = 0; i <= initial; ++i) breaks.push_back(a + (b - a) * i / initial);
  const auto r = gauss_kronrod(g, breaks, rel_tol);
  if (!(r.value > 0.0)) return ExtReal::neg_inf();
  return ExtReal(shift + std::log(r.value));
}

}  // namespace devlab::quad

#endif  // DEVLAB_QUADRATURE_HPP
