#ifndef DEVLAB_SIMULATE_HPP
#define DEVLAB_SIMULATE_HPP

// Seeded Monte Carlo engines: (mean, max) pairs of i.i.d. draws, the sum
// conditioned on the maximum, and normalized sums of partial minima of
// exponentials. Replicate r always draws from rng.stream(r), so outputs are
// independent of the worker count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "devlab/distmodel.hpp"
#include "devlab/errors.hpp"
#include "devlab/extended_real.hpp"
#include "devlab/parallel.hpp"
#include "devlab/rng.hpp"
#include "devlab/stats.hpp"

namespace devlab {

inline constexpr std::size_t kReplicateBlock = 256;

/// Speed v_n (n or log n) with a power scaling a_n = v_n^{-beta}.
class ScalingFamily {
public:
  enum class SpeedKind { n, log_n };
  enum class Regime { moderate, reference_ldp, weak_convergence };

  ScalingFamily(SpeedKind speed, double beta, std::string label = {})
      : speed_(speed), beta_(beta), label_(std::move(label)) {
    if (!(beta >= 0.0 && beta <= 1.0)) throw ArgumentError("ScalingFamily: beta must lie in [0, 1]");
    if (label_.empty()) label_ = std::string("a_n = (") + (speed == SpeedKind::n ? "n" : "log n") + ")^-" + fmt(beta);
  }

  SpeedKind speed_kind() const { return speed_; }
  double beta() const { return beta_; }
  const std::string& label() const { return label_; }

  double speed(std::int64_t n) const {
    return speed_ == SpeedKind::n ? static_cast<double>(n) : std::log(static_cast<double>(n));
  }
  double scaling(std::int64_t n) const { return std::pow(speed(n), -beta_); }

  /// beta = 1 gives a_n = 1/v_n (the reference LDP), beta = 0 gives a_n = 1
  /// (the weak-convergence normalization).
  Regime regime() const {
    if (beta_ == 1.0) return Regime::reference_ldp;
    if (beta_ == 0.0) return Regime::weak_convergence;
    return Regime::moderate;
  }
  bool at_regime_boundary() const { return regime() != Regime::moderate; }

  /// Numerical check of a_n -> 0 and a_n v_n -> infinity between the first
  /// and last configured n.
  bool satisfies_md_conditions(std::int64_t n_first, std::int64_t n_last) const {
    const double a1 = scaling(n_first), aN = scaling(n_last);
    return aN < 0.1 * a1 && aN * speed(n_last) > 10.0 * a1 * speed(n_first);
  }

private:
  static std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
  }
  SpeedKind speed_;
  double beta_;
  std::string label_;
};

struct SumMaxSample {
  double y;  // (W_1 + ... + W_n) / n
  double z;  // max W_i
  std::int64_t n;
};

struct MinimaSample {
  double x;  // sum_{k<=n} min(W_1..W_k) / log n
  std::int64_t n;
};

inline SumMaxSample draw_sum_max(const DistributionModel& model, std::int64_t n, Stream& s) {
  stats::CompensatedSum sum;
  double z = kNegInf;
  for (std::int64_t i = 0; i < n; ++i) {
    const double w = model.quantile(s.uniform());
    sum.add(w);
    z = std::max(z, w);
  }
  return {sum.value() / static_cast<double>(n), z, n};
}

inline std::vector<SumMaxSample> sample_sum_max(const DistributionModel& model, std::int64_t n, std::size_t reps,
                                                const Rng& rng) {
  if (n < 1) throw ArgumentError("sample_sum_max: n must be >= 1");
  if (reps < 1) throw ArgumentError("sample_sum_max: reps must be >= 1");
  std::vector<SumMaxSample> out(reps);
  parallel_blocks(reps, kReplicateBlock, [&](std::size_t b, std::size_t e) {
    for (std::size_t r = b; r < e; ++r) {
      Stream s = rng.stream(r);
      out[r] = draw_sum_max(model, n, s);
    }
  });
  return out;
}

/// Draws of n * Y_n given Z_n = z: z plus n - 1 independent draws from the
/// law truncated below z.
inline std::vector<double> sample_sum_given_max(const DistributionModel& model, std::int64_t n, double z,
                                                std::size_t reps, const Rng& rng) {
  if (n < 2) throw ArgumentError("sample_sum_given_max: n must be >= 2");
  const DistributionModel below = truncate(model, z);
  std::vector<double> out(reps);
  parallel_blocks(reps, kReplicateBlock, [&](std::size_t b, std::size_t e) {
    for (std::size_t r = b; r < e; ++r) {
      Stream s = rng.stream(r);
      stats::CompensatedSum sum;
      sum.add(z);
      for (std::int64_t i = 1; i < n; ++i) sum.add(below.quantile(s.uniform()));
      out[r] = sum.value();
    }
  });
  return out;
}

/// Running sums of partial minima along one path, recorded at each n in
/// `n_grid` (increasing). The path consumes one uniform per step; a step
/// only needs the logarithm when the uniform falls below the current
/// record threshold 1 - exp(-lambda * min).
inline std::vector<double> partial_minima_path(double lambda, const std::vector<std::int64_t>& n_grid, Stream& s) {
  std::vector<double> out;
  out.reserve(n_grid.size());
  stats::CompensatedSum sum;
  double current = kPosInf;
  double threshold = 1.0;
  std::size_t next = 0;
  const std::int64_t n_max = n_grid.back();
  for (std::int64_t k = 1; k <= n_max; ++k) {
    const double u = s.uniform();
    if (u < threshold) {
      const double w = -std::log1p(-u) / lambda;
      if (w < current) {
        current = w;
        threshold = -std::expm1(-lambda * current);
      }
    }
    sum.add(current);
    if (k == n_grid[next]) {
      out.push_back(sum.value() / std::log(static_cast<double>(k)));
      ++next;
    }
  }
  return out;
}

inline void check_minima_grid(double lambda, const std::vector<std::int64_t>& n_grid) {
  if (!(lambda > 0.0)) throw ArgumentError("partial minima: lambda must be > 0");
  if (n_grid.empty() || n_grid.front() < 2) throw ArgumentError("partial minima: n must be >= 2");
  if (!std::is_sorted(n_grid.begin(), n_grid.end()) ||
      std::adjacent_find(n_grid.begin(), n_grid.end()) != n_grid.end())
    throw ArgumentError("partial minima: n grid must be strictly increasing");
}

/// X_n for every n of the grid, from the same path per replicate:
/// result[g][r] is X_{n_grid[g]} of replicate r.
inline std::vector<std::vector<double>> sample_partial_minima_grid(double lambda, const std::vector<std::int64_t>& n_grid,
                                                                   std::size_t reps, const Rng& rng) {
  check_minima_grid(lambda, n_grid);
  std::vector<std::vector<double>> out(n_grid.size(), std::vector<double>(reps));
  parallel_blocks(reps, 16, [&](std::size_t b, std::size_t e) {
    for (std::size_t r = b; r < e; ++r) {
      Stream s = rng.stream(r);
      const auto path = partial_minima_path(lambda, n_grid, s);
      for (std::size_t g = 0; g < n_grid.size(); ++g) out[g][r] = path[g];
    }
  });
  return out;
}

inline std::vector<MinimaSample> sample_partial_minima(double lambda, std::int64_t n, std::size_t reps,
                                                       const Rng& rng) {
  const auto grid = sample_partial_minima_grid(lambda, {n}, reps, rng);
  std::vector<MinimaSample> out;
  out.reserve(reps);
  for (double x : grid[0]) out.push_back({x, n});
  return out;
}

/// log E[exp(s * sum_{k<=n} min(W_1..W_k))] = sum_k log(1 + u / (k (1 - u)))
/// with u = s / lambda; +inf when u >= 1.
inline ExtReal minima_log_mgf(double lambda, std::int64_t n, double s) {
  if (n < 1) throw ArgumentError("minima_log_mgf: n must be >= 1");
  if (!(lambda > 0.0)) throw ArgumentError("minima_log_mgf: lambda must be > 0");
  const double u = s / lambda;
  if (u >= 1.0) return ExtReal::pos_inf();
  const double c = u / (1.0 - u);
  stats::CompensatedSum sum;
  for (std::int64_t k = 1; k <= n; ++k) sum.add(std::log1p(c / static_cast<double>(k)));
  return ExtReal(sum.value());
}

struct Log1pBound {
  bool holds;
  double delta;  // log(1+x) >= x - v x^2 on |x| < delta
};

/// Certifies log(1+x) >= x - v x^2 near 0 for v > 1/2. With
/// g(x) = log(1+x) - x + v x^2, g is increasing on x > 0 and decreasing on
/// (1/(2v) - 1, 0); delta is the negative root of g found by bisection, and
/// the inequality is re-checked on a grid of `grid_points` over (-delta, delta).
inline Log1pBound log1p_lower_bound_check(double v, int grid_points = 20001) {
  if (!(v > 0.5)) throw ArgumentError("log1p_lower_bound_check: v must exceed 1/2");
  auto g = [v](double x) { return std::log1p(x) - x + v * x * x; };
  double lo = -1.0 + 1e-15;  // g -> -inf as x -> -1
  double hi = 1.0 / (2.0 * v) - 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  const double delta = -hi;
  bool holds = delta > 0.0;
  for (int i = 1; i < grid_points - 1 && holds; ++i) {
    const double x = -delta + 2.0 * delta * i / (grid_points - 1);
    if (g(x) < -1e-15) holds = false;
  }
  return {holds, delta};
}

}  // namespace devlab

#endif  // DEVLAB_SIMULATE_HPP
