#ifndef DEVLAB_CGF_HPP
#define DEVLAB_CGF_HPP

#include <cmath>
#include <limits>

#include "devlab/distmodel.hpp"
#include "devlab/errors.hpp"
#include "devlab/extended_real.hpp"
#include "devlab/quadrature.hpp"

namespace devlab {

enum class CgfMode { quadrature, closed_form };

/// Open interval (lower, upper) of theta on which kappa(.|z) is finite.
struct ThetaDomain {
  ExtReal lower = ExtReal::neg_inf();
  ExtReal upper = ExtReal::pos_inf();

  bool contains(double theta) const { return ExtReal(theta) > lower && ExtReal(theta) < upper; }
};

struct KappaPartials {
  double d_theta;
  double d_theta_theta;
  double d_z;
  double d_theta_z;
  double d_zz;
};

/// Conditional cumulant generating function
///   kappa(theta | z) = log( int_{-inf}^z e^{theta w} f(w) dw / F(z) ),
/// with kappa(theta | m) = theta * m at a finite lower endpoint.
class ConditionalCgf {
public:
  explicit ConditionalCgf(DistributionModel model, CgfMode mode = CgfMode::quadrature, double rel_tol = 1e-10)
      : model_(std::move(model)), mode_(mode), rel_tol_(rel_tol) {
    if (mode_ == CgfMode::closed_form && !model_.closed_form_kappa(0.0, model_.support().upper))
      throw UnsupportedRegime("ConditionalCgf: " + model_.name() + " has no closed-form CGF");
  }

  const DistributionModel& model() const { return model_; }
  CgfMode mode() const { return mode_; }
  double tolerance() const { return rel_tol_; }

  /// Effective domain of kappa(.|z). Divergence can only come from an
  /// infinite end of the integration range, and each family declares the
  /// exponential decay rate of its infinite tails.
  ThetaDomain domain(ExtReal z) const {
    ThetaDomain d;
    const Support s = model_.support();
    if (!s.lower.is_finite()) d.lower = -model_.lower_tail_decay();
    if (!z.is_finite()) d.upper = model_.upper_tail_decay();
    return d;
  }

  ExtReal kappa(double theta, double z) const { return kappa(theta, ExtReal(z)); }

  ExtReal kappa(double theta, ExtReal z) const {
    if (!std::isfinite(theta)) throw ArgumentError("kappa: theta must be finite");
    const Support s = model_.support();
    if (z < s.lower || z > s.upper) throw DomainError("kappa: z outside the closed support");
    if (s.lower.is_finite() && z == s.lower) return ExtReal(theta * s.lower.value());
    const double log_mass = z.is_finite() ? model_.log_cdf(z.value()) : 0.0;
    if (log_mass == kNegInf) throw DomainError("kappa: F(z) = 0");
    if (theta == 0.0) return ExtReal(0.0);
    if (!domain(z).contains(theta)) return ExtReal::pos_inf();
    if (mode_ == CgfMode::closed_form) return *model_.closed_form_kappa(theta, z);
    const ExtReal log_integral = log_partition(theta, s.lower, z);
    if (log_integral.is_pos_inf()) return log_integral;
    return ExtReal(log_integral.value() - log_mass);
  }

  /// Unconditional log-MGF log E[e^{theta W}] = kappa(theta | M).
  ExtReal kappa_global(double theta) const { return kappa(theta, model_.support().upper); }

  /// Partial derivatives of kappa at (theta, z) = (0, M) by fixed-step finite
  /// differences (one-sided in z) with one Richardson extrapolation.
  KappaPartials partials_at_origin() const {
    const Support s = model_.support();
    const auto fm = model_.right_density();
    if (!s.upper.is_finite() || !fm || !(*fm > 0.0))
      throw UnsupportedRegime("partials_at_origin: needs a finite right endpoint with positive density");
    const double M = s.upper.value();
    const double h = 1e-4 * std::max(1.0, std::abs(M));
    auto k = [&](double t, double z) { return kappa(t, z).value(); };

    auto d_theta = [&](double step, double z) { return (k(step, z) - k(-step, z)) / (2.0 * step); };
    auto d_tt = [&](double step) { return (k(step, M) - 2.0 * k(0.0, M) + k(-step, M)) / (step * step); };
    auto d_z = [&](double step) { return (k(0.0, M) - k(0.0, M - step)) / step; };
    auto d_tz = [&](double step) { return (d_theta(h, M) - d_theta(h, M - step)) / step; };
    auto d_zz = [&](double step) {
      return (k(0.0, M) - 2.0 * k(0.0, M - step) + k(0.0, M - 2.0 * step)) / (step * step);
    };
    KappaPartials p{};
    p.d_theta = (4.0 * d_theta(h / 2, M) - d_theta(h, M)) / 3.0;
    p.d_theta_theta = (4.0 * d_tt(h / 2) - d_tt(h)) / 3.0;
    p.d_z = 2.0 * d_z(h / 2) - d_z(h);
    p.d_theta_z = 2.0 * d_tz(h / 2) - d_tz(h);
    p.d_zz = 2.0 * d_zz(h / 2) - d_zz(h);
    return p;
  }

private:
  // log int_lo^z e^{theta w} f(w) dw for theta inside the domain. Large |theta|
  // concentrates the mass at an endpoint; substituting s = |theta| * distance
  // to that endpoint turns the integrand into e^{-s} f(.) on a unit scale.
  ExtReal log_partition(double theta, ExtReal lo, ExtReal z) const {
    const auto& m = model_;
    if (theta >= 1.0 && z.is_finite()) {
      const double top = z.value();
      const ExtReal range = lo.is_finite() ? ExtReal(theta * (top - lo.value())) : ExtReal::pos_inf();
      const auto inner = quad::log_integrate(
          [&](double s) {
            const double v = m.log_density(top - s / theta);
            return v == kNegInf ? v : v - s;
          },
          ExtReal(0.0), range, rel_tol_);
      if (inner.is_neg_inf()) return inner;
      return ExtReal(theta * top - std::log(theta) + inner.value());
    }
    if (theta <= -1.0 && lo.is_finite()) {
      const double bottom = lo.value();
      const double rate = -theta;
      const ExtReal range = z.is_finite() ? ExtReal(rate * (z.value() - bottom)) : ExtReal::pos_inf();
      const auto inner = quad::log_integrate(
          [&](double s) {
            const double v = m.log_density(bottom + s / rate);
            return v == kNegInf ? v : v - s;
          },
          ExtReal(0.0), range, rel_tol_);
      if (inner.is_neg_inf()) return inner;
      return ExtReal(theta * bottom - std::log(rate) + inner.value());
    }
    return quad::log_integrate(
        [&](double w) {
          const double v = m.log_density(w);
          return v == kNegInf ? v : v + theta * w;
        },
        lo, z, rel_tol_);
  }

  DistributionModel model_;
  CgfMode mode_;
  double rel_tol_;
};

}  // namespace devlab

#endif  // DEVLAB_CGF_HPP
