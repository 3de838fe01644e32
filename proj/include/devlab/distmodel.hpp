#ifndef DEVLAB_DISTMODEL_HPP
#define DEVLAB_DISTMODEL_HPP

// Distribution models for the i.i.d. sequence, the truncated family f(.|z)
// obtained by conditioning below a level z, inverse-CDF sampling and the
// exact law of the sample maximum.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "devlab/errors.hpp"
#include "devlab/extended_real.hpp"
#include "devlab/quadrature.hpp"
#include "devlab/rng.hpp"

namespace devlab {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

/// Closure of the interval where the density is positive.
struct Support {
  ExtReal lower;
  ExtReal upper;

  Support(ExtReal lo, ExtReal hi) : lower(lo), upper(hi) {
    if (!(lower < upper)) throw ArgumentError("Support: lower endpoint must be below upper endpoint");
  }

  bool contains(double x) const { return ExtReal(x) >= lower && ExtReal(x) <= upper; }

  /// "[m,M]", "(-inf,M]" or "[m,inf)".
  std::string classification() const {
    auto fmt = [](double v) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%g", v);
      return std::string(buf);
    };
    std::string lo = lower.is_finite() ? "[" + fmt(lower.value()) : "(-inf";
    std::string hi = upper.is_finite() ? fmt(upper.value()) + "]" : "inf)";
    return lo + "," + hi;
  }
};

namespace detail {

// log(1 - e^{-t}) for t > 0
inline double log1m_exp(double t) { return t > 0.6931471805599453 ? std::log1p(-std::exp(-t)) : std::log(-std::expm1(-t)); }

/// log((e^{a z} - 1) / a) for z > 0 without overflow; a = 0 gives log z.
inline double log_expm1_ratio(double a, double z) {
  const double x = a * z;
  if (a == 0.0) return std::log(z);
  if (x > 0.0) return x + std::log(-std::expm1(-x)) - std::log(a);
  return std::log(-std::expm1(x)) - std::log(-a);
}

class Family {
public:
  virtual ~Family() = default;
  virtual std::string name() const = 0;
  virtual Support support() const = 0;
  virtual double log_density(double w) const = 0;
  virtual double cdf(double w) const = 0;
  virtual double log_cdf(double w) const = 0;
  /// -log(1 - F(w)).
  virtual double log_survival(double w) const = 0;
  virtual double quantile(double p) const = 0;
  virtual double mean() const = 0;
  virtual double variance() const = 0;
  virtual std::optional<double> right_density() const { return std::nullopt; }
  virtual std::optional<double> tail_index() const { return std::nullopt; }
  /// r such that the MGF diverges for theta <= -r (only meaningful when m = -inf).
  virtual ExtReal lower_tail_decay() const { return ExtReal::pos_inf(); }
  /// r such that the MGF diverges for theta >= r (only meaningful when M = +inf).
  virtual ExtReal upper_tail_decay() const { return ExtReal::pos_inf(); }
  virtual std::optional<ExtReal> closed_form_kappa(double /*theta*/, ExtReal /*z*/) const { return std::nullopt; }
  /// Solves -log(1 - F(x)) = h for x.
  virtual std::optional<double> inverse_log_survival(double /*h*/) const { return std::nullopt; }
  virtual nlohmann::json to_json() const = 0;
};

class NegExpFamily final : public Family {
public:
  std::string name() const override { return "neg_exp"; }
  Support support() const override { return {ExtReal::neg_inf(), ExtReal(0.0)}; }
  double log_density(double w) const override { return w <= 0.0 ? w : kNegInf; }
  double cdf(double w) const override { return w >= 0.0 ? 1.0 : std::exp(w); }
  double log_cdf(double w) const override { return std::min(w, 0.0); }
  double log_survival(double w) const override { return w >= 0.0 ? kPosInf : -std::log(-std::expm1(w)); }
  double quantile(double p) const override { return std::log(p); }
  double mean() const override { return -1.0; }
  double variance() const override { return 1.0; }
  std::optional<double> right_density() const override { return 1.0; }
  ExtReal lower_tail_decay() const override { return ExtReal(1.0); }
  std::optional<ExtReal> closed_form_kappa(double theta, ExtReal z) const override {
    if (theta <= -1.0) return ExtReal::pos_inf();
    const double zz = z.is_finite() ? std::min(z.value(), 0.0) : 0.0;
    return ExtReal(theta * zz - std::log1p(theta));
  }
  std::optional<double> inverse_log_survival(double h) const override { return std::log(-std::expm1(-h)); }
  nlohmann::json to_json() const override { return {{"family", "neg_exp"}}; }
};

class Uniform01Family final : public Family {
public:
  std::string name() const override { return "uniform01"; }
  Support support() const override { return {ExtReal(0.0), ExtReal(1.0)}; }
  double log_density(double w) const override { return (w >= 0.0 && w <= 1.0) ? 0.0 : kNegInf; }
  double cdf(double w) const override { return std::clamp(w, 0.0, 1.0); }
  double log_cdf(double w) const override { return w <= 0.0 ? kNegInf : (w >= 1.0 ? 0.0 : std::log(w)); }
  double log_survival(double w) const override { return w >= 1.0 ? kPosInf : (w <= 0.0 ? 0.0 : -std::log1p(-w)); }
  double quantile(double p) const override { return p; }
  double mean() const override { return 0.5; }
  double variance() const override { return 1.0 / 12.0; }
  std::optional<double> right_density() const override { return 1.0; }
  std::optional<double> inverse_log_survival(double h) const override { return -std::expm1(-h); }
  nlohmann::json to_json() const override { return {{"family", "uniform01"}}; }
};

class ExponentialFamily final : public Family {
public:
  explicit ExponentialFamily(double lambda) : lambda_(lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ArgumentError("exponential: lambda must be finite and > 0");
  }
  std::string name() const override { return "exponential"; }
  Support support() const override { return {ExtReal(0.0), ExtReal::pos_inf()}; }
  double log_density(double w) const override { return w >= 0.0 ? std::log(lambda_) - lambda_ * w : kNegInf; }
  double cdf(double w) const override { return w <= 0.0 ? 0.0 : -std::expm1(-lambda_ * w); }
  double log_cdf(double w) const override { return w <= 0.0 ? kNegInf : log1m_exp(lambda_ * w); }
  double log_survival(double w) const override { return w <= 0.0 ? 0.0 : lambda_ * w; }
  double quantile(double p) const override { return -std::log1p(-p) / lambda_; }
  double mean() const override { return 1.0 / lambda_; }
  double variance() const override { return 1.0 / (lambda_ * lambda_); }
  std::optional<double> tail_index() const override { return 1.0; }
  ExtReal upper_tail_decay() const override { return ExtReal(lambda_); }
  std::optional<ExtReal> closed_form_kappa(double theta, ExtReal z) const override {
    if (!z.is_finite()) {
      if (theta >= lambda_) return ExtReal::pos_inf();
      return ExtReal(-std::log1p(-theta / lambda_));
    }
    const double zz = z.value();
    if (zz <= 0.0) return ExtReal(0.0);
    return ExtReal(std::log(lambda_) + log_expm1_ratio(theta - lambda_, zz) - log_cdf(zz));
  }
  std::optional<double> inverse_log_survival(double h) const override { return h / lambda_; }
  nlohmann::json to_json() const override { return {{"family", "exponential"}, {"lambda", lambda_}}; }
  double lambda() const { return lambda_; }

private:
  double lambda_;
};

class StretchedTailFamily final : public Family {
public:
  explicit StretchedTailFamily(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ArgumentError("stretched_tail: alpha must be finite and > 0");
  }
  std::string name() const override { return "stretched_tail"; }
  Support support() const override { return {ExtReal(0.0), ExtReal::pos_inf()}; }
  double log_density(double w) const override {
    if (w < 0.0) return kNegInf;
    if (w == 0.0) return alpha_ == 1.0 ? 0.0 : (alpha_ > 1.0 ? kNegInf : kPosInf);
    return std::log(alpha_) + (alpha_ - 1.0) * std::log(w) - std::pow(w, alpha_);
  }
  double cdf(double w) const override { return w <= 0.0 ? 0.0 : -std::expm1(-std::pow(w, alpha_)); }
  double log_cdf(double w) const override { return w <= 0.0 ? kNegInf : log1m_exp(std::pow(w, alpha_)); }
  double log_survival(double w) const override { return w <= 0.0 ? 0.0 : std::pow(w, alpha_); }
  double quantile(double p) const override { return std::pow(-std::log1p(-p), 1.0 / alpha_); }
  double mean() const override { return std::tgamma(1.0 + 1.0 / alpha_); }
  double variance() const override {
    const double m = mean();
    return std::tgamma(1.0 + 2.0 / alpha_) - m * m;
  }
  std::optional<double> tail_index() const override { return alpha_; }
  ExtReal upper_tail_decay() const override {
    if (alpha_ > 1.0) return ExtReal::pos_inf();
    return ExtReal(alpha_ == 1.0 ? 1.0 : 0.0);
  }
  std::optional<double> inverse_log_survival(double h) const override { return std::pow(h, 1.0 / alpha_); }
  nlohmann::json to_json() const override { return {{"family", "stretched_tail"}, {"alpha", alpha_}}; }
  double alpha() const { return alpha_; }

private:
  double alpha_;
};

struct Truncation {
  double level;
  double log_mass;  // log F(level) under the parent family
  double mean;
  double variance;
};

}  // namespace detail

/// An immutable distribution of W, optionally conditioned on W < z.
/// Copies share state and are safe to use from several threads.
class DistributionModel {
public:
  explicit DistributionModel(std::shared_ptr<const detail::Family> family) : family_(std::move(family)) {}

  std::string name() const { return family_->name(); }

  Support support() const {
    auto s = family_->support();
    if (trunc_) s.upper = ExtReal(trunc_->level);
    return s;
  }

  bool is_truncated() const { return static_cast<bool>(trunc_); }
  std::optional<double> truncation_level() const {
    return trunc_ ? std::optional<double>(trunc_->level) : std::nullopt;
  }

  double log_density(double w) const {
    if (!trunc_) return family_->log_density(w);
    if (w > trunc_->level) return kNegInf;
    const double v = family_->log_density(w);
    return v == kNegInf ? v : v - trunc_->log_mass;
  }
  double density(double w) const {
    const double v = log_density(w);
    return v == kNegInf ? 0.0 : std::exp(v);
  }

  double cdf(double w) const {
    if (!trunc_) return family_->cdf(w);
    if (w >= trunc_->level) return 1.0;
    return std::exp(family_->log_cdf(w) - trunc_->log_mass);
  }

  double log_cdf(double w) const {
    if (!trunc_) return family_->log_cdf(w);
    if (w >= trunc_->level) return 0.0;
    return family_->log_cdf(w) - trunc_->log_mass;
  }

  /// -log(1 - F(w)), the survival scale on which F(x)^n is evaluated near M.
  double log_survival(double w) const {
    if (!trunc_) return family_->log_survival(w);
    if (w >= trunc_->level) return kPosInf;
    const double fz = std::exp(trunc_->log_mass);
    return trunc_->log_mass - std::log(fz - family_->cdf(w));
  }

  double quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) {
      if (p == 0.0) return support().lower.to_double();
      if (p == 1.0) return support().upper.to_double();
      throw ArgumentError("quantile: level must lie in [0, 1]");
    }
    if (!trunc_) return family_->quantile(p);
    return family_->quantile(p * std::exp(trunc_->log_mass));
  }

  double mean() const { return trunc_ ? trunc_->mean : family_->mean(); }
  double variance() const { return trunc_ ? trunc_->variance : family_->variance(); }

  /// F'(M-) when the right endpoint is finite.
  std::optional<double> right_density() const {
    if (!trunc_) return family_->right_density();
    return density(trunc_->level);
  }

  /// Regular-variation index of -log(1 - F) when M = +inf.
  std::optional<double> tail_index() const { return trunc_ ? std::nullopt : family_->tail_index(); }

  ExtReal lower_tail_decay() const { return family_->lower_tail_decay(); }
  ExtReal upper_tail_decay() const { return trunc_ ? ExtReal::pos_inf() : family_->upper_tail_decay(); }

  /// Analytic conditional CGF, when the family has one.
  std::optional<ExtReal> closed_form_kappa(double theta, ExtReal z) const {
    if (trunc_ && (!z.is_finite() || z.value() > trunc_->level)) z = ExtReal(trunc_->level);
    return family_->closed_form_kappa(theta, z);
  }

  std::optional<double> inverse_log_survival(double h) const {
    return trunc_ ? std::nullopt : family_->inverse_log_survival(h);
  }

  nlohmann::json to_json() const { return family_->to_json(); }

  const std::shared_ptr<const detail::Family>& family() const { return family_; }

private:
  friend DistributionModel truncate(const DistributionModel&, double);

  DistributionModel(std::shared_ptr<const detail::Family> family, std::shared_ptr<const detail::Truncation> t)
      : family_(std::move(family)), trunc_(std::move(t)) {}

  std::shared_ptr<const detail::Family> family_;
  std::shared_ptr<const detail::Truncation> trunc_;
};

inline DistributionModel neg_exp() { return DistributionModel(std::make_shared<detail::NegExpFamily>()); }
inline DistributionModel uniform01() { return DistributionModel(std::make_shared<detail::Uniform01Family>()); }
inline DistributionModel exponential(double lambda) {
  return DistributionModel(std::make_shared<detail::ExponentialFamily>(lambda));
}
inline DistributionModel stretched_tail(double alpha) {
  return DistributionModel(std::make_shared<detail::StretchedTailFamily>(alpha));
}

/// Conditions the model on W < z: density f(w)1{w<z}/F(z).
inline DistributionModel truncate(const DistributionModel& model, double z) {
  if (!std::isfinite(z)) throw ArgumentError("truncate: level must be finite");
  const Support s = model.support();
  if (ExtReal(z) <= s.lower) throw DomainError("truncate: level must exceed the lower endpoint");
  if (s.upper.is_finite() && z >= s.upper.value()) return model;
  const auto& fam = *model.family();
  const double log_mass = fam.log_cdf(z);
  if (log_mass == kNegInf) throw DomainError("truncate: F(z) = 0");

  auto log_f = [&](double w) {
    const double v = fam.log_density(w);
    return v == kNegInf ? v : v - log_mass;
  };
  const ExtReal lo = s.lower;
  const ExtReal hi(z);
  const double mean = quad::integrate([&](double w) { return w * std::exp(log_f(w)); }, lo, hi, 1e-12).value;
  const double var =
      quad::integrate([&](double w) { return (w - mean) * (w - mean) * std::exp(log_f(w)); }, lo, hi, 1e-12).value;
  return DistributionModel(model.family(),
                           std::make_shared<const detail::Truncation>(detail::Truncation{z, log_mass, mean, var}));
}

/// `count` inverse-CDF draws consuming one uniform each from `stream`.
inline std::vector<double> sample(const DistributionModel& model, Stream& stream, std::size_t count) {
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(model.quantile(stream.uniform()));
  return out;
}

/// n * log F(x): the log-CDF of the maximum of n draws.
inline double log_max_cdf(const DistributionModel& model, std::int64_t n, double x) {
  if (n < 1) throw ArgumentError("log_max_cdf: n must be >= 1");
  const double lf = model.log_cdf(x);
  return lf == kNegInf ? kNegInf : static_cast<double>(n) * lf;
}

/// P(max(W_1..W_n) <= x) = F(x)^n.
inline double exact_max_cdf(const DistributionModel& model, std::int64_t n, double x) {
  return std::exp(log_max_cdf(model, n, x));
}

/// {"family": "neg_exp" | "uniform01" | "exponential" | "stretched_tail",
///  "lambda": number?, "alpha": number?}
inline DistributionModel model_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("family") || !j["family"].is_string())
    throw ArgumentError("distribution: expected an object with a string \"family\"");
  const auto family = j["family"].get<std::string>();
  auto number = [&](const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw ArgumentError(std::string("distribution: \"") + key + "\" must be a number");
    return j[key].get<double>();
  };
  if (family == "neg_exp") return neg_exp();
  if (family == "uniform01") return uniform01();
  if (family == "exponential") return exponential(number("lambda", 1.0));
  if (family == "stretched_tail") {
    if (!j.contains("alpha")) throw ArgumentError("distribution: stretched_tail requires \"alpha\"");
    return stretched_tail(number("alpha", 1.0));
  }
  throw ArgumentError("distribution: unknown family \"" + family + "\"");
}

}  // namespace devlab

#endif  // DEVLAB_DISTMODEL_HPP
