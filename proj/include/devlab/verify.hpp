#ifndef DEVLAB_VERIFY_HPP
#define DEVLAB_VERIFY_HPP

// Checks that put each limit statement against exact formulas or Monte
// Carlo: normalized log-probabilities, slope fits, weak-convergence
// distances and the closed-form prelimits.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "devlab/cgf.hpp"
#include "devlab/distmodel.hpp"
#include "devlab/errors.hpp"
#include "devlab/extended_real.hpp"
#include "devlab/parallel.hpp"
#include "devlab/rates.hpp"
#include "devlab/rng.hpp"
#include "devlab/simulate.hpp"
#include "devlab/stats.hpp"

namespace devlab {

enum class Method { exact, monte_carlo };

inline std::string to_string(Method m) { return m == Method::exact ? "exact" : "monte-carlo"; }

/// (1/v_n) log P(event). A Monte Carlo estimate with no hits is
/// right-censored: value and ci_low are -inf, ci_high stays finite.
struct LogProbEstimate {
  ExtReal value;
  ExtReal ci_low;
  ExtReal ci_high;
  std::int64_t n = 0;
  double speed_value = 1.0;
  Method method = Method::exact;
  std::size_t hits = 0;
  std::size_t reps = 0;

  bool censored() const { return method == Method::monte_carlo && hits == 0; }
};

inline ExtReal log_ext(double p) { return p > 0.0 ? ExtReal(std::log(p)) : ExtReal::neg_inf(); }

inline ExtReal scale_ext(ExtReal v, double s) { return v.is_finite() ? ExtReal(v.value() / s) : v; }

inline LogProbEstimate make_exact_estimate(ExtReal log_p, std::int64_t n, double v_n) {
  const ExtReal v = scale_ext(log_p, v_n);
  return {v, v, v, n, v_n, Method::exact, 0, 0};
}

inline LogProbEstimate make_mc_estimate(std::size_t hits, std::size_t reps, std::int64_t n, double v_n) {
  const auto [lo, hi] = stats::wilson_interval(hits, reps);
  const double p = static_cast<double>(hits) / static_cast<double>(reps);
  return {scale_ext(log_ext(p), v_n),
          scale_ext(log_ext(lo), v_n),
          scale_ext(log_ext(hi), v_n),
          n,
          v_n,
          Method::monte_carlo,
          hits,
          reps};
}

/// Monte Carlo frequency of `event(sampler(stream))` over reps replicates,
/// replicate r drawing from rng.stream(r).
template <class Sampler, class Event>
LogProbEstimate estimate_log_prob(Sampler&& sampler, Event&& event, std::int64_t n, double v_n, std::size_t reps,
                                  const Rng& rng) {
  if (reps < 1000) throw ArgumentError("estimate_log_prob: reps must be >= 1000");
  if (!(v_n > 0.0)) throw ArgumentError("estimate_log_prob: v_n must be > 0");
  const std::size_t blocks = (reps + kReplicateBlock - 1) / kReplicateBlock;
  std::vector<std::size_t> counts(blocks, 0);
  parallel_blocks(reps, kReplicateBlock, [&](std::size_t b, std::size_t e) {
    std::size_t c = 0;
    for (std::size_t r = b; r < e; ++r) {
      Stream s = rng.stream(r);
      if (event(sampler(s))) ++c;
    }
    counts[b / kReplicateBlock] = c;
  });
  std::size_t hits = 0;
  for (std::size_t c : counts) hits += c;
  return make_mc_estimate(hits, reps, n, v_n);
}

/// Same as above on precomputed samples.
template <class T, class Event>
LogProbEstimate estimate_log_prob_from(const std::vector<T>& samples, Event&& event, std::int64_t n, double v_n) {
  std::size_t hits = 0;
  for (const T& s : samples)
    if (event(s)) ++hits;
  return make_mc_estimate(hits, samples.size(), n, v_n);
}

/// Exact (1/v_n) log P(a < Z_n <= b) = (1/v_n) log(F(b)^n - F(a)^n),
/// computed as n log F(b) + log(-expm1(n (log F(a) - log F(b)))).
inline LogProbEstimate exact_log_prob_max(const DistributionModel& model, std::int64_t n, double v_n, ExtReal a,
                                          ExtReal b) {
  if (!(a < b)) throw ArgumentError("exact_log_prob_max: need a < b");
  if (n < 1) throw ArgumentError("exact_log_prob_max: n must be >= 1");
  const double nn = static_cast<double>(n);
  auto log_fn = [&](ExtReal x) -> ExtReal {
    if (x == ExtReal::pos_inf()) return ExtReal(0.0);
    if (x == ExtReal::neg_inf()) return ExtReal::neg_inf();
    const double lf = model.log_cdf(x.value());
    return std::isfinite(lf) ? ExtReal(nn * lf) : ExtReal::neg_inf();
  };
  const ExtReal lb = log_fn(b);
  const ExtReal la = log_fn(a);
  if (!lb.is_finite()) return make_exact_estimate(ExtReal::neg_inf(), n, v_n);
  if (!la.is_finite()) return make_exact_estimate(lb, n, v_n);
  const double d = la.value() - lb.value();
  if (d >= 0.0) return make_exact_estimate(ExtReal::neg_inf(), n, v_n);
  return make_exact_estimate(ExtReal(lb.value() + std::log(-std::expm1(d))), n, v_n);
}

struct SlopeFitReport {
  std::vector<std::int64_t> n_grid;
  std::vector<LogProbEstimate> estimates;
  ExtReal predicted;
  ExtReal extrapolated;              // estimate at the largest n
  std::optional<double> intercept;   // regression of the estimate on 1/v_n
  std::optional<double> slope;       // least-squares slope of log P on v_n
  double relative_gap = 0.0;         // |extrapolated - predicted| / max(|predicted|, 0.1)
  std::optional<double> slope_gap;   // |slope - predicted|
};

inline double relative_gap(ExtReal estimate, ExtReal predicted) {
  if (!estimate.is_finite() || !predicted.is_finite())
    return estimate == predicted ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(estimate.value() - predicted.value()) / std::max(std::abs(predicted.value()), 0.1);
}

namespace detail {

/// Ordinary least squares y = c0 + c1 x; nullopt with fewer than two
/// distinct abscissae.
inline std::optional<std::pair<double, double>> least_squares(const std::vector<double>& x,
                                                              const std::vector<double>& y) {
  if (x.size() < 2) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) return std::nullopt;
  const double c1 = sxy / sxx;
  return std::make_pair(my - c1 * mx, c1);
}

}  // namespace detail

/// Fills the derived fields of a report from its estimates. Censored and
/// infinite estimates are left out of both regressions.
inline void finish_slope_fit(SlopeFitReport& r) {
  if (r.estimates.empty()) throw ArgumentError("slope fit: empty n grid");
  r.extrapolated = r.estimates.back().value;
  r.relative_gap = relative_gap(r.extrapolated, r.predicted);
  std::vector<double> inv_v, est, v, logp;
  for (const auto& e : r.estimates) {
    if (!e.value.is_finite()) continue;
    inv_v.push_back(1.0 / e.speed_value);
    est.push_back(e.value.value());
    v.push_back(e.speed_value);
    logp.push_back(e.value.value() * e.speed_value);
  }
  if (auto fit = detail::least_squares(inv_v, est)) r.intercept = fit->first;
  if (auto fit = detail::least_squares(v, logp)) {
    r.slope = fit->second;
    if (r.predicted.is_finite()) r.slope_gap = std::abs(*r.slope - r.predicted.value());
  }
}

enum class LChoice { density, quantile };

/// L(n) for the normalization n L(n) (Z_n - M): the right density f(M), or
/// 1 / (n (M - F^{-1}(1 - 1/n))).
inline double l_of_n(const DistributionModel& model, std::int64_t n, LChoice choice) {
  const ExtReal m = model.support().upper;
  if (!m.is_finite()) throw UnsupportedRegime("L(n) needs a finite right endpoint");
  if (choice == LChoice::density) {
    const auto f = model.right_density();
    if (!f || !(*f > 0.0) || !std::isfinite(*f)) throw UnsupportedRegime("L(n) needs a positive finite density at M");
    return *f;
  }
  const double nn = static_cast<double>(n);
  return 1.0 / (nn * (m.value() - model.quantile(1.0 - 1.0 / nn)));
}

inline void require_ncmd_regime(const DistributionModel& model) {
  if (!model.support().upper.is_finite()) throw UnsupportedRegime(model.name() + ": right endpoint is infinite");
  const auto f = model.right_density();
  if (!f || !(*f > 0.0) || !std::isfinite(*f)) throw UnsupportedRegime(model.name() + ": density at M is not positive");
  if (!std::isfinite(model.variance())) throw UnsupportedRegime(model.name() + ": infinite variance");
}

/// Exact a_n log P(a_n n L(n) (Z_n - M) <= z) along the grid against
/// -J_Z(z) = z.
inline SlopeFitReport ncmd_z_rate_check(const DistributionModel& model, const ScalingFamily& scaling, double z,
                                        const std::vector<std::int64_t>& n_grid, LChoice choice = LChoice::density) {
  require_ncmd_regime(model);
  if (z > 0.0) throw ArgumentError("ncmd_z_rate_check: z must be <= 0");
  const double m = model.support().upper.value();
  SlopeFitReport r;
  r.n_grid = n_grid;
  r.predicted = -rates::j_z()(z);
  for (std::int64_t n : n_grid) {
    const double a = scaling.scaling(n);
    const double x = m + z / (a * static_cast<double>(n) * l_of_n(model, n, choice));
    r.estimates.push_back(exact_log_prob_max(model, n, 1.0 / a, ExtReal::neg_inf(), ExtReal(x)));
  }
  finish_slope_fit(r);
  return r;
}

struct WeibullLimitPoint {
  std::int64_t n;
  double z;
  double exact;  // P(n L (Z_n - M) <= z)
  double limit;  // min(e^z, 1)
  double gap;
  double bound;  // 1.1 z^2 e^z / n
};

inline WeibullLimitPoint weibull_limit_point(const DistributionModel& model, std::int64_t n, double z) {
  require_ncmd_regime(model);
  const double m = model.support().upper.value();
  const double nl = static_cast<double>(n) * *model.right_density();
  const double x = m + z / nl;
  const double exact = z >= 0.0 ? 1.0 : std::exp(static_cast<double>(n) * model.log_cdf(x));
  const double limit = std::min(std::exp(z), 1.0);
  return {n, z, exact, limit, std::abs(exact - limit), 1.1 * z * z * std::exp(z) / static_cast<double>(n)};
}

/// Exact (1/log n) log P(Z_n / h_n > z) with H(h_n) = log n, against
/// -H_Z(z) = -(z^alpha - 1).
inline LogProbEstimate scaled_max_log_prob(const DistributionModel& model, std::int64_t n, double z) {
  if (model.support().upper.is_finite()) throw UnsupportedRegime(model.name() + ": right endpoint is finite");
  if (!model.tail_index()) throw UnsupportedRegime(model.name() + ": no regularly varying tail index");
  if (n < 2) throw ArgumentError("scaled_max_log_prob: n must be >= 2");
  const double ln = std::log(static_cast<double>(n));
  const auto h_opt = model.inverse_log_survival(ln);
  if (!h_opt) throw UnsupportedRegime(model.name() + ": no closed-form inverse of -log(1 - F)");
  const double h = *h_opt;
  return exact_log_prob_max(model, n, ln, ExtReal(z * h), ExtReal::pos_inf());
}

inline SlopeFitReport scaled_max_ldp_check(const DistributionModel& model, double z,
                                           const std::vector<std::int64_t>& n_grid) {
  SlopeFitReport r;
  r.n_grid = n_grid;
  r.predicted = -rates::h_z(*model.tail_index())(z);
  for (std::int64_t n : n_grid) r.estimates.push_back(scaled_max_log_prob(model, n, z));
  finish_slope_fit(r);
  return r;
}

struct DarlingPoint {
  double theta;
  bool skipped = false;  // theta outside the domain of kappa
  double estimate = 0.0;  // log of the MC mean of exp(theta n Y_n)
  double std_error = 0.0;
  double predicted = 0.0;  // (n-1) kappa(theta|z) + theta z
  double gap_in_se = 0.0;
};

struct DarlingReport {
  std::vector<DarlingPoint> points;
  double max_gap = 0.0;
};

/// Conditional log-MGF of n Y_n given Z_n = z by Monte Carlo against the
/// CGF identity. The standard error of the log estimate is the delta-method
/// one, SE(mean) / mean.
inline DarlingReport darling_identity_check(const DistributionModel& model, std::int64_t n, double z,
                                            const std::vector<double>& theta_grid, std::size_t reps, const Rng& rng,
                                            CgfMode mode = CgfMode::quadrature) {
  if (n < 2) throw ArgumentError("darling_identity_check: n must be >= 2");
  if (!(model.cdf(z) > 0.0)) throw DomainError("darling_identity_check: F(z) must be > 0");
  const ConditionalCgf cgf(model, mode);
  const auto sums = sample_sum_given_max(model, n, z, reps, rng);
  DarlingReport rep;
  for (double theta : theta_grid) {
    DarlingPoint p{theta};
    const ExtReal k = cgf.kappa(theta, z);
    if (!k.is_finite()) {
      p.skipped = true;
      rep.points.push_back(p);
      continue;
    }
    p.predicted = static_cast<double>(n - 1) * k.value() + theta * z;
    if (theta != 0.0) {
      double shift = -std::numeric_limits<double>::infinity();
      for (double s : sums) shift = std::max(shift, theta * s);
      stats::CompensatedSum m1, m2;
      for (double s : sums) {
        const double e = std::exp(theta * s - shift);
        m1.add(e);
        m2.add(e * e);
      }
      const double nn = static_cast<double>(sums.size());
      const double mean = m1.value() / nn;
      const double var = std::max(m2.value() / nn - mean * mean, 0.0) * nn / (nn - 1.0);
      p.estimate = shift + std::log(mean);
      p.std_error = std::sqrt(var / nn) / mean;
      p.gap_in_se = p.std_error > 0.0 ? std::abs(p.estimate - p.predicted) / p.std_error
                                      : (p.estimate == p.predicted ? 0.0 : std::numeric_limits<double>::infinity());
    }
    rep.max_gap = std::max(rep.max_gap, p.gap_in_se);
    rep.points.push_back(p);
  }
  return rep;
}

struct ConditionalLawReport {
  double ks = 0.0;
  double critical = 0.0;
  std::size_t direct_draws = 0;  // pairs drawn to fill the bin
  bool pass() const { return ks < critical; }
};

/// Two-sample KS between n Y_n from direct draws with Z_n in [z, z + eps]
/// and the constructive sampler at the bin midpoint z + eps/2.
inline ConditionalLawReport conditional_law_check(const DistributionModel& model, std::int64_t n, double z,
                                                  double eps, std::size_t count, const Rng& rng) {
  if (!(eps > 0.0)) throw ArgumentError("conditional_law_check: eps must be > 0");
  const Rng direct_rng = rng.child(1);
  std::vector<double> direct;
  direct.reserve(count);
  constexpr std::size_t kBatch = 1 << 16;
  std::size_t drawn = 0;
  while (direct.size() < count) {
    std::vector<double> batch(kBatch, std::numeric_limits<double>::quiet_NaN());
    parallel_blocks(kBatch, kReplicateBlock, [&](std::size_t b, std::size_t e) {
      for (std::size_t r = b; r < e; ++r) {
        Stream s = direct_rng.stream(drawn + r);
        const SumMaxSample p = draw_sum_max(model, n, s);
        if (p.z >= z && p.z <= z + eps) batch[r] = p.y * static_cast<double>(n);
      }
    });
    drawn += kBatch;
    for (double v : batch)
      if (!std::isnan(v) && direct.size() < count) direct.push_back(v);
    if (drawn > (std::size_t{1} << 36)) throw UnsupportedRegime("conditional_law_check: bin is too rare");
  }
  const auto built = sample_sum_given_max(model, n, z + 0.5 * eps, count, rng.child(2));
  return {stats::ks_two_sample(direct, built), stats::ks_critical_two_sample_99(count, count), drawn};
}

struct BivariatePoint {
  std::int64_t n;
  double ks_normal;
  double ks_weibull;
  double chi2;
  double p_value;
};

/// Weak convergence of (sqrt(n)(Y_n - mu)/sigma, n L(n)(Z_n - M)) to a
/// standard normal times an independent Weibull(1).
inline std::vector<BivariatePoint> bivariate_weak_convergence_check(const DistributionModel& model,
                                                                    const std::vector<std::int64_t>& n_grid,
                                                                    std::size_t reps, const Rng& rng,
                                                                    LChoice choice = LChoice::density) {
  require_ncmd_regime(model);
  const double mu = model.mean();
  const double sigma = std::sqrt(model.variance());
  const double m = model.support().upper.value();
  std::vector<BivariatePoint> out;
  for (std::size_t g = 0; g < n_grid.size(); ++g) {
    const std::int64_t n = n_grid[g];
    const auto pairs = sample_sum_max(model, n, reps, rng.child(g));
    const double nl = static_cast<double>(n) * l_of_n(model, n, choice);
    std::vector<double> u1(reps), u2(reps);
    for (std::size_t r = 0; r < reps; ++r) {
      u1[r] = std::sqrt(static_cast<double>(n)) * (pairs[r].y - mu) / sigma;
      u2[r] = nl * (pairs[r].z - m);
    }
    const auto q = stats::quadrant_independence(u1, u2);
    out.push_back({n, stats::ks_one_sample(u1, stats::normal_cdf),
                   stats::ks_one_sample(u2, [](double u) { return u >= 0.0 ? 1.0 : std::exp(u); }), q.statistic,
                   q.p_value});
  }
  return out;
}

struct DerivativeReport {
  KappaPartials partials;
  double mu;
  double sigma2;
  bool mean_ok;
  bool variance_ok;
  bool zero_ok;
  bool pass() const { return mean_ok && variance_ok && zero_ok; }
};

inline DerivativeReport derivative_identities_check(const DistributionModel& model, double tol = 1e-3) {
  require_ncmd_regime(model);
  const ConditionalCgf cgf(model);
  const KappaPartials p = cgf.partials_at_origin();
  const double mu = model.mean(), s2 = model.variance();
  auto rel = [](double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); };
  return {p, mu, s2, rel(p.d_theta, mu) <= tol, rel(p.d_theta_theta, s2) <= tol, std::abs(p.d_z) <= tol};
}

struct MinimaMdPoint {
  double theta;
  std::int64_t n;
  ExtReal value;
  double target;  // theta^2 / lambda^2
};

/// a_n (-theta sqrt(a_n log n) / (lambda a_n)) + a_n log E[exp(s S_n)] with
/// s = theta / sqrt(a_n log n), S_n the sum of partial minima.
inline std::vector<MinimaMdPoint> minima_md_prelimit(double lambda, const ScalingFamily& scaling,
                                                     const std::vector<double>& theta_grid,
                                                     const std::vector<std::int64_t>& n_grid) {
  if (scaling.speed_kind() != ScalingFamily::SpeedKind::log_n)
    throw ArgumentError("minima_md_prelimit: scaling must use v_n = log n");
  std::vector<MinimaMdPoint> out;
  for (double theta : theta_grid) {
    if (!std::isfinite(theta)) throw ArgumentError("minima_md_prelimit: theta must be finite");
    for (std::int64_t n : n_grid) {
      const double a = scaling.scaling(n);
      const double root = std::sqrt(a * std::log(static_cast<double>(n)));
      const ExtReal mgf = minima_log_mgf(lambda, n, theta / root);
      const ExtReal value = mgf.is_finite() ? ExtReal(-theta * root / lambda + a * mgf.value()) : mgf;
      out.push_back({theta, n, value, theta * theta / (lambda * lambda)});
    }
  }
  return out;
}

/// (1/log n) log P(X_n >= x) for x >= 1/lambda, P(X_n <= x) otherwise,
/// against -I_X(x). All n of the grid come from the same paths.
inline SlopeFitReport minima_ldp_slope(double lambda, double x, const std::vector<std::int64_t>& n_grid,
                                       std::size_t reps, const Rng& rng) {
  if (!(x > 0.0)) throw ArgumentError("minima_ldp_slope: x must be > 0");
  const bool upper = x >= 1.0 / lambda;
  const auto paths = sample_partial_minima_grid(lambda, n_grid, reps, rng);
  SlopeFitReport r;
  r.n_grid = n_grid;
  r.predicted = -rates::i_x(lambda)(x);
  for (std::size_t g = 0; g < n_grid.size(); ++g) {
    const double ln = std::log(static_cast<double>(n_grid[g]));
    r.estimates.push_back(
        estimate_log_prob_from(paths[g], [&](double v) { return upper ? v >= x : v <= x; }, n_grid[g], ln));
  }
  finish_slope_fit(r);
  return r;
}

struct HoglundReport {
  std::vector<std::int64_t> n_grid;
  std::vector<double> ks;
  double sigma2;  // 2 / lambda^2
  bool nonincreasing_trend() const { return ks.size() < 2 || ks.back() < ks.front(); }
};

/// KS distance of (X_n - 1/lambda) sqrt(log n / sigma^2) to N(0,1).
inline HoglundReport hoglund_clt_check(double lambda, const std::vector<std::int64_t>& n_grid, std::size_t reps,
                                       const Rng& rng) {
  const auto paths = sample_partial_minima_grid(lambda, n_grid, reps, rng);
  HoglundReport rep{n_grid, {}, 2.0 / (lambda * lambda)};
  for (std::size_t g = 0; g < n_grid.size(); ++g) {
    const double scale = std::sqrt(std::log(static_cast<double>(n_grid[g])) / rep.sigma2);
    std::vector<double> u(reps);
    for (std::size_t r = 0; r < reps; ++r) u[r] = (paths[g][r] - 1.0 / lambda) * scale;
    rep.ks.push_back(stats::ks_one_sample(u, stats::normal_cdf));
  }
  return rep;
}

struct BallProbe {
  double x;
  double radius;
};

struct TwoSpeedReport {
  std::vector<BallProbe> probes;
  std::vector<std::vector<LogProbEstimate>> estimates;  // [probe][n]
};

/// (1/log n) log P(|Y_n - x| < R) at speed log n; away from the mean this
/// runs off to -inf, at the mean it tends to 0.
inline TwoSpeedReport two_speed_degeneracy_check(const DistributionModel& model, const std::vector<BallProbe>& probes,
                                                 const std::vector<std::int64_t>& n_grid, std::size_t reps,
                                                 const Rng& rng) {
  TwoSpeedReport rep{probes, std::vector<std::vector<LogProbEstimate>>(probes.size())};
  for (std::size_t g = 0; g < n_grid.size(); ++g) {
    const std::int64_t n = n_grid[g];
    if (n < 2) throw ArgumentError("two_speed_degeneracy_check: n must be >= 2");
    const auto pairs = sample_sum_max(model, n, reps, rng.child(g));
    const double ln = std::log(static_cast<double>(n));
    for (std::size_t k = 0; k < probes.size(); ++k) {
      const BallProbe b = probes[k];
      rep.estimates[k].push_back(
          estimate_log_prob_from(pairs, [b](const SumMaxSample& s) { return std::abs(s.y - b.x) < b.radius; }, n, ln));
    }
  }
  return rep;
}

}  // namespace devlab

#endif  // DEVLAB_VERIFY_HPP
