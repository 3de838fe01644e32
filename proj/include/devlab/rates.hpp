#ifndef DEVLAB_RATES_HPP
#define DEVLAB_RATES_HPP

// Catalog of rate functions. Closed forms are evaluated directly; the
// conditional and Cramer rates are Legendre transforms of the CGFs.

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "devlab/cgf.hpp"
#include "devlab/errors.hpp"
#include "devlab/extended_real.hpp"
#include "devlab/legendre.hpp"

namespace devlab {

/// Speed v_n a rate function is paired with.
enum class Speed { n, log_n, inverse_scaling };

inline std::string to_string(Speed s) {
  switch (s) {
    case Speed::n: return "n";
    case Speed::log_n: return "log n";
    default: return "1/a_n";
  }
}

class RateFunction {
public:
  using Eval = std::function<ExtReal(std::span<const double>)>;

  RateFunction(std::string key, int arity, Eval eval, std::string domain, std::vector<std::vector<double>> zeros,
               Speed speed)
      : key_(std::move(key)),
        arity_(arity),
        eval_(std::move(eval)),
        domain_(std::move(domain)),
        zeros_(std::move(zeros)),
        speed_(speed) {}

  const std::string& key() const { return key_; }
  int arity() const { return arity_; }
  const std::string& effective_domain() const { return domain_; }
  const std::vector<std::vector<double>>& zero_set() const { return zeros_; }
  Speed speed() const { return speed_; }

  ExtReal evaluate(std::span<const double> point) const {
    if (static_cast<int>(point.size()) != arity_)
      throw ArgumentError(key_ + ": expected a point of dimension " + std::to_string(arity_));
    for (double v : point)
      if (!std::isfinite(v)) return ExtReal::pos_inf();
    return eval_(point);
  }
  ExtReal operator()(double x) const { return evaluate(std::array<double, 1>{x}); }
  ExtReal operator()(double y, double z) const { return evaluate(std::array<double, 2>{y, z}); }

private:
  std::string key_;
  int arity_;
  Eval eval_;
  std::string domain_;
  std::vector<std::vector<double>> zeros_;
  Speed speed_;
};

inline ExtReal eval_rate(const RateFunction& rate, std::span<const double> point) { return rate.evaluate(point); }

namespace rates {

/// I_Z(z) = -log F(z) on the closed support.
inline RateFunction i_z(const DistributionModel& model) {
  const Support s = model.support();
  std::vector<std::vector<double>> zeros;
  if (s.upper.is_finite()) zeros.push_back({s.upper.value()});
  return RateFunction(
      "I_Z", 1,
      [model, s](std::span<const double> p) {
        const double z = p[0];
        if (!s.contains(z)) return ExtReal::pos_inf();
        const double lf = model.log_cdf(z);
        return lf == kNegInf ? ExtReal::pos_inf() : ExtReal(lf == 0.0 ? 0.0 : -lf);
      },
      s.classification(), zeros, Speed::n);
}

/// I_{Y|Z}(y|z) = sup_theta { theta y - kappa(theta|z) }, as a function of (y, z).
inline RateFunction i_cond(std::shared_ptr<const ConditionalCgf> cgf) {
  const DistributionModel& model = cgf->model();
  const Support s = model.support();
  std::vector<std::vector<double>> zeros;
  if (s.upper.is_finite()) zeros.push_back({model.mean(), s.upper.value()});
  return RateFunction(
      "I_cond", 2,
      [cgf, s](std::span<const double> p) {
        const double y = p[0], z = p[1];
        if (!s.contains(z)) return ExtReal::pos_inf();
        if (s.lower.is_finite() && z == s.lower.value())
          return y == z ? ExtReal(0.0) : ExtReal::pos_inf();
        return conjugate_kappa(*cgf, y, ExtReal(z)).value;
      },
      "y real, z in " + s.classification(), zeros, Speed::n);
}

/// I_{Y,Z}(y, z) = I_{Y|Z}(y|z) + I_Z(z).
inline RateFunction i_joint(std::shared_ptr<const ConditionalCgf> cgf) {
  const DistributionModel& model = cgf->model();
  const auto cond = i_cond(cgf);
  const auto marg = i_z(model);
  const Support s = model.support();
  std::vector<std::vector<double>> zeros;
  if (s.upper.is_finite()) zeros.push_back({model.mean(), s.upper.value()});
  return RateFunction(
      "I_joint", 2,
      [cond, marg](std::span<const double> p) {
        const ExtReal iz = marg(p[1]);
        if (iz.is_pos_inf()) return iz;
        return cond(p[0], p[1]) + iz;
      },
      "y real, z in " + s.classification(), zeros, Speed::n);
}

/// J_Z(z) = -z for z <= 0.
inline RateFunction j_z() {
  return RateFunction(
      "J_Z", 1, [](std::span<const double> p) { return p[0] <= 0.0 ? ExtReal(-p[0] + 0.0) : ExtReal::pos_inf(); },
      "(-inf,0]", {{0.0}}, Speed::inverse_scaling);
}

/// J_{Y|Z}(y) = y^2 / 2, the same for every z.
inline RateFunction j_cond() {
  return RateFunction(
      "J_cond", 1, [](std::span<const double> p) { return ExtReal(0.5 * p[0] * p[0]); }, "(-inf,inf)", {{0.0}},
      Speed::inverse_scaling);
}

/// J_{Y,Z}(y, z) = y^2/2 - z for z <= 0.
inline RateFunction j_joint() {
  return RateFunction(
      "J_joint", 2,
      [](std::span<const double> p) {
        return p[1] <= 0.0 ? ExtReal(0.5 * p[0] * p[0] - p[1]) : ExtReal::pos_inf();
      },
      "y real, z <= 0", {{0.0, 0.0}}, Speed::inverse_scaling);
}

/// Delta(r; r0) = 0 at r0 and +inf elsewhere.
inline RateFunction delta(double r0) {
  return RateFunction(
      "Delta", 1, [r0](std::span<const double> p) { return p[0] == r0 ? ExtReal(0.0) : ExtReal::pos_inf(); },
      "{r0}", {{r0}}, Speed::log_n);
}

/// H_Z(z) = z^alpha - 1 for z >= 1.
inline RateFunction h_z(double alpha) {
  if (!(alpha > 0.0)) throw ArgumentError("H_Z: alpha must be > 0");
  return RateFunction(
      "H_Z", 1,
      [alpha](std::span<const double> p) {
        return p[0] >= 1.0 ? ExtReal(std::pow(p[0], alpha) - 1.0) : ExtReal::pos_inf();
      },
      "[1,inf)", {{1.0}}, Speed::log_n);
}

/// H_{Y,Z}(y, z) = H_Z(z) when y = mu and z >= 1.
inline RateFunction h_joint(double alpha, double mu) {
  const auto hz = h_z(alpha);
  return RateFunction(
      "H_joint", 2,
      [hz, mu](std::span<const double> p) { return p[0] == mu ? hz(p[1]) : ExtReal::pos_inf(); },
      "{mu} x [1,inf)", {{mu, 1.0}}, Speed::log_n);
}

/// I_X(x) = (sqrt(lambda x) - 1)^2 for x >= 0.
inline RateFunction i_x(double lambda) {
  if (!(lambda > 0.0)) throw ArgumentError("I_X: lambda must be > 0");
  return RateFunction(
      "I_X", 1,
      [lambda](std::span<const double> p) {
        if (p[0] < 0.0) return ExtReal::pos_inf();
        const double r = std::sqrt(lambda * p[0]) - 1.0;
        return ExtReal(r * r);
      },
      "[0,inf)", {{1.0 / lambda}}, Speed::log_n);
}

/// J_X(x) = x^2 / (2 sigma^2) with sigma^2 = 2 / lambda^2.
inline RateFunction j_x(double lambda) {
  if (!(lambda > 0.0)) throw ArgumentError("J_X: lambda must be > 0");
  const double sigma2 = 2.0 / (lambda * lambda);
  return RateFunction(
      "J_X", 1, [sigma2](std::span<const double> p) { return ExtReal(p[0] * p[0] / (2.0 * sigma2)); }, "(-inf,inf)",
      {{0.0}}, Speed::inverse_scaling);
}

/// Cramer rate kappa_Y^*(y) = sup_theta { theta y - kappa_Y(theta) }.
inline RateFunction kappa_star(std::shared_ptr<const ConditionalCgf> cgf) {
  const double mu = cgf->model().mean();
  return RateFunction(
      "kappa_star", 1,
      [cgf](std::span<const double> p) { return conjugate_kappa(*cgf, p[0], cgf->model().support().upper).value; },
      "(m,M)", {{mu}}, Speed::n);
}

/// Parameters used when a rate is selected by its string key.
struct RateParams {
  std::optional<DistributionModel> model;
  double lambda = 1.0;
  double alpha = 1.0;
  double r0 = 0.0;
  std::optional<double> mu;
};

inline const std::vector<std::string>& catalog_keys() {
  static const std::vector<std::string> keys{"I_Z",   "I_cond", "I_joint", "J_Z", "J_cond",    "J_joint",
                                             "Delta", "H_Z",    "H_joint", "I_X", "J_X", "kappa_star"};
  return keys;
}

inline RateFunction make_rate(const std::string& key, const RateParams& params) {
  auto need_model = [&]() -> const DistributionModel& {
    if (!params.model) throw ArgumentError("rate " + key + " needs a distribution model");
    return *params.model;
  };
  auto cgf = [&] { return std::make_shared<const ConditionalCgf>(need_model()); };
  if (key == "I_Z") return i_z(need_model());
  if (key == "I_cond") return i_cond(cgf());
  if (key == "I_joint") return i_joint(cgf());
  if (key == "J_Z") return j_z();
  if (key == "J_cond") return j_cond();
  if (key == "J_joint") return j_joint();
  if (key == "Delta") return delta(params.r0);
  if (key == "H_Z") return h_z(params.alpha);
  if (key == "H_joint") {
    const double mu = params.mu ? *params.mu : need_model().mean();
    return h_joint(params.alpha, mu);
  }
  if (key == "I_X") return i_x(params.lambda);
  if (key == "J_X") return j_x(params.lambda);
  if (key == "kappa_star") return kappa_star(cgf());
  throw ArgumentError("unknown rate key \"" + key + "\"");
}

}  // namespace rates

/// Central second difference of I_X at its zero 1/lambda; equals lambda^2/2.
inline double second_derivative_check_IX(double lambda) {
  const auto rate = rates::i_x(lambda);
  const double x0 = 1.0 / lambda;
  const double h = 1e-3 * x0;
  return (rate(x0 + h).value() - 2.0 * rate(x0).value() + rate(x0 - h).value()) / (h * h);
}

/// Axis-aligned search box; for one-dimensional rates only the first
/// coordinate is used.
struct SearchBox {
  std::array<double, 2> lo{};
  std::array<double, 2> hi{};
};

struct LevelSetScan {
  bool bounded = true;
  std::size_t inside = 0;                     // grid points with rate <= eta
  std::vector<std::array<double, 2>> points;  // those points
};

/// Grid scan of {rate <= eta} over the box. The set is reported bounded when
/// it does not reach a box edge across which the rate stays finite. A spot
/// check, not a proof.
inline LevelSetScan level_set_scan(const RateFunction& rate, double eta, const SearchBox& box, int resolution = 121) {
  if (!(eta >= 0.0)) throw ArgumentError("level_set_scan: eta must be >= 0");
  if (resolution < 2) throw ArgumentError("level_set_scan: resolution must be >= 2");
  LevelSetScan scan;
  const int ny = resolution;
  const int nz = rate.arity() == 2 ? resolution : 1;
  for (int i = 0; i < ny; ++i) {
    const double y = box.lo[0] + (box.hi[0] - box.lo[0]) * i / (ny - 1);
    for (int j = 0; j < nz; ++j) {
      const double z = nz == 1 ? 0.0 : box.lo[1] + (box.hi[1] - box.lo[1]) * j / (nz - 1);
      const ExtReal v = rate.arity() == 2 ? rate(y, z) : rate(y);
      if (v > ExtReal(eta)) continue;
      ++scan.inside;
      scan.points.push_back({y, z});
      // A boundary point only signals escape when the rate stays finite one
      // grid step further out, i.e. the box edge is not an edge of the domain.
      const double dy = (box.hi[0] - box.lo[0]) / (ny - 1);
      const double dz = nz == 1 ? 0.0 : (box.hi[1] - box.lo[1]) / (nz - 1);
      const double oy = i == 0 ? y - dy : (i == ny - 1 ? y + dy : y);
      const double oz = nz == 1 ? z : (j == 0 ? z - dz : (j == nz - 1 ? z + dz : z));
      if (oy == y && oz == z) continue;
      const ExtReal outside = rate.arity() == 2 ? rate(oy, oz) : rate(oy);
      if (outside.is_finite()) scan.bounded = false;
    }
  }
  return scan;
}

inline bool level_set_bounded(const RateFunction& rate, double eta, const SearchBox& box, int resolution = 121) {
  return level_set_scan(rate, eta, box, resolution).bounded;
}

}  // namespace devlab

#endif  // DEVLAB_RATES_HPP
