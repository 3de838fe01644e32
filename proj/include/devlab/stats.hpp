#ifndef DEVLAB_STATS_HPP
#define DEVLAB_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "devlab/errors.hpp"

namespace devlab::stats {

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Upper tail of chi-square with one degree of freedom.
inline double chi2_1dof_sf(double x) { return x <= 0.0 ? 1.0 : std::erfc(std::sqrt(0.5 * x)); }

/// Kolmogorov asymptotic critical constant c(alpha) for alpha = 0.01.
inline constexpr double kKsCritical99 = 1.628;

/// One-sample critical value at the 99% level: 1.63/sqrt(N).
inline double ks_critical_one_sample_99(std::size_t n) { return 1.63 / std::sqrt(static_cast<double>(n)); }

/// Two-sample critical value at the 99% level.
inline double ks_critical_two_sample_99(std::size_t n, std::size_t m) {
  const double dn = static_cast<double>(n), dm = static_cast<double>(m);
  return kKsCritical99 * std::sqrt((dn + dm) / (dn * dm));
}

/// sup |F_n - F| for a sample against a continuous reference CDF.
template <class Cdf>
double ks_one_sample(std::vector<double> sample, const Cdf& cdf) {
  if (sample.empty()) throw ArgumentError("ks_one_sample: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

/// sup |F_n - G_m| between two empirical distributions.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ArgumentError("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

/// Wilson score interval for a binomial proportion.
inline std::pair<double, double> wilson_interval(std::size_t hits, std::size_t trials, double z = 1.959963984540054) {
  if (trials == 0) throw ArgumentError("wilson_interval: zero trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  const double lo = hits == 0 ? 0.0 : std::max(0.0, centre - half);
  const double hi = hits == trials ? 1.0 : std::min(1.0, centre + half);
  return {lo, hi};
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw ArgumentError("median: empty sample");
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

struct QuadrantTest {
  double statistic;
  double p_value;
};

/// 2x2 contingency chi-square for independence, with each coordinate split
/// at its sample median.
inline QuadrantTest quadrant_independence(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 4) throw ArgumentError("quadrant_independence: bad sizes");
  const double mx = median({x.begin(), x.end()});
  const double my = median({y.begin(), y.end()});
  double c[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < x.size(); ++i) c[x[i] > mx][y[i] > my] += 1.0;
  const double n = static_cast<double>(x.size());
  double stat = 0.0;
  for (int r = 0; r < 2; ++r) {
    for (int s = 0; s < 2; ++s) {
      const double expected = (c[r][0] + c[r][1]) * (c[0][s] + c[1][s]) / n;
      if (expected > 0.0) stat += (c[r][s] - expected) * (c[r][s] - expected) / expected;
    }
  }
  return {stat, chi2_1dof_sf(stat)};
}

}  // namespace devlab::stats

#endif  // DEVLAB_STATS_HPP
