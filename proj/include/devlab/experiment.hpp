#ifndef DEVLAB_EXPERIMENT_HPP
#define DEVLAB_EXPERIMENT_HPP

// Config-driven experiment runner behind the devlab tool: parse a JSON
// description, dispatch to the checks in verify.hpp, write results.csv and
// summary.json.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "devlab/cgf.hpp"
#include "devlab/distmodel.hpp"
#include "devlab/errors.hpp"
#include "devlab/rates.hpp"
#include "devlab/simulate.hpp"
#include "devlab/verify.hpp"

namespace devlab {

/// Invalid configuration; `line` is 1-based in the config text.
class ConfigError : public std::runtime_error {
public:
  ConfigError(const std::string& msg, int line)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  int line() const { return line_; }

private:
  int line_;
};

struct ExperimentInfo {
  std::string name;
  std::string regime;
  std::string claim;
  bool monte_carlo;
};

inline const std::vector<ExperimentInfo>& experiment_table() {
  static const std::vector<ExperimentInfo> table{
      {"ldp_sum_max", "any model with a light right tail", "LDP of (mean, max) at speed n", true},
      {"ncmd_sum_max", "M finite, f(M) > 0", "NCMD of (mean, max), Z-part J_Z(z) = -z", false},
      {"weibull_limit", "M finite, f(M) > 0", "n L (Z_n - M) converges to Weibull(1)", false},
      {"chow_teugels", "M finite, f(M) > 0, finite variance", "Gaussian x Weibull bivariate weak limit", true},
      {"darling_identity", "F(z) > 0", "conditional MGF of the sum given the max", true},
      {"derivative_identities", "M finite, f(M) > 0", "kappa partials at (0, M) equal (mu, sigma^2, 0)", false},
      {"scaled_max_ldp", "M infinite, regularly varying -log(1-F)", "LDP of Z_n / h_n at speed log n", false},
      {"minima_ldp", "i.i.d. exponential", "LDP of partial-minima sums, rate I_X", true},
      {"minima_clt", "i.i.d. exponential", "CLT for partial-minima sums, sigma^2 = 2/lambda^2", true},
      {"minima_md", "i.i.d. exponential", "moderate deviations for partial-minima sums, rate J_X", false},
      {"two_speed", "light-tailed model", "speed log n degeneracy of the mean, rate Delta", true},
      {"level_set", "any model", "compact level sets of the catalog rates", false},
  };
  return table;
}

/// "name -> claim | regime" per experiment.
inline std::string list_experiments() {
  std::ostringstream out;
  for (const auto& e : experiment_table())
    out << e.name << " \xE2\x86\x92 " << e.claim << " | " << e.regime << (e.monte_carlo ? " | monte-carlo" : " | exact")
        << "\n";
  return out.str();
}

struct ExperimentConfig {
  std::string experiment;
  std::optional<DistributionModel> distribution;
  std::vector<std::int64_t> n_grid;
  std::size_t reps = 10000;
  std::uint64_t seed = 1;
  std::optional<double> beta;
  std::optional<std::string> event_kind;
  std::vector<double> event_bounds;
  std::map<std::string, double> tolerances;
  std::string output_dir = "devlab_out";
  nlohmann::json params = nlohmann::json::object();
  std::string source;  // raw text, for line lookups

  double tolerance(const std::string& key, double fallback) const {
    const auto it = tolerances.find(key);
    return it == tolerances.end() ? fallback : it->second;
  }
};

namespace detail {

inline int line_at(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

inline int line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  return pos == std::string::npos ? 1 : line_at(text, pos);
}

inline bool is_known_experiment(const std::string& name) {
  for (const auto& e : experiment_table())
    if (e.name == name) return true;
  return false;
}

inline bool is_monte_carlo(const std::string& name) {
  for (const auto& e : experiment_table())
    if (e.name == name) return e.monte_carlo;
  return false;
}

}  // namespace detail

inline ExperimentConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what(), detail::line_at(text, e.byte == 0 ? 0 : e.byte - 1));
  }
  auto fail = [&](const std::string& key, const std::string& msg) -> ConfigError {
    return ConfigError(msg, detail::line_of_key(text, key));
  };
  if (!j.is_object()) throw ConfigError("config must be a JSON object", 1);
  ExperimentConfig c;
  c.source = text;
  if (!j.contains("experiment") || !j["experiment"].is_string()) throw ConfigError("missing \"experiment\"", 1);
  c.experiment = j["experiment"].get<std::string>();
  if (!detail::is_known_experiment(c.experiment)) throw fail("experiment", "unknown experiment \"" + c.experiment + "\"");

  if (j.contains("distribution")) {
    try {
      c.distribution = model_from_json(j["distribution"]);
    } catch (const std::exception& e) {
      throw fail("distribution", e.what());
    }
  }
  if (j.contains("n_grid")) {
    const auto& g = j["n_grid"];
    if (!g.is_array()) throw fail("n_grid", "n_grid must be an array of integers");
    for (const auto& v : g) {
      if (!v.is_number_integer()) throw fail("n_grid", "n_grid entries must be integers");
      c.n_grid.push_back(v.get<std::int64_t>());
    }
    if (c.n_grid.empty()) throw fail("n_grid", "n_grid must not be empty");
    for (std::size_t i = 0; i < c.n_grid.size(); ++i) {
      if (c.n_grid[i] < 1) throw fail("n_grid", "n_grid entries must be >= 1");
      if (i > 0 && c.n_grid[i] <= c.n_grid[i - 1]) throw fail("n_grid", "n_grid must be strictly increasing");
    }
  }
  if (j.contains("reps")) {
    if (!j["reps"].is_number_integer() || j["reps"].get<std::int64_t>() < 1) throw fail("reps", "reps must be a positive integer");
    c.reps = j["reps"].get<std::size_t>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<std::int64_t>() >= 0))
      throw fail("seed", "seed must be an unsigned 64-bit integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("scaling")) {
    const auto& s = j["scaling"];
    if (!s.is_object() || !s.contains("beta") || !s["beta"].is_number()) throw fail("scaling", "scaling needs a numeric beta");
    const double beta = s["beta"].get<double>();
    if (!(beta > 0.0 && beta < 1.0)) throw fail("beta", "beta must lie in (0, 1)");
    c.beta = beta;
  }
  if (j.contains("event")) {
    const auto& e = j["event"];
    if (!e.is_object() || !e.contains("kind") || !e["kind"].is_string()) throw fail("event", "event needs a string kind");
    c.event_kind = e["kind"].get<std::string>();
    if (e.contains("bounds")) {
      if (!e["bounds"].is_array()) throw fail("bounds", "event bounds must be an array");
      for (const auto& v : e["bounds"]) {
        if (!v.is_number()) throw fail("bounds", "event bounds must be numbers");
        c.event_bounds.push_back(v.get<double>());
      }
    }
  }
  if (j.contains("tolerances")) {
    if (!j["tolerances"].is_object()) throw fail("tolerances", "tolerances must be an object");
    for (auto it = j["tolerances"].begin(); it != j["tolerances"].end(); ++it) {
      if (!it.value().is_number()) throw fail(it.key(), "tolerance \"" + it.key() + "\" must be a number");
      c.tolerances[it.key()] = it.value().get<double>();
    }
  }
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) throw fail("output_dir", "output_dir must be a string");
    c.output_dir = j["output_dir"].get<std::string>();
  }
  if (j.contains("params")) {
    if (!j["params"].is_object()) throw fail("params", "params must be an object");
    c.params = j["params"];
  }
  return c;
}

/// Checks that need the final reps value (after command-line overrides).
inline void validate_config(const ExperimentConfig& c) {
  if (detail::is_monte_carlo(c.experiment) && c.reps < 1000)
    throw ConfigError("reps must be >= 1000 for Monte Carlo experiments", detail::line_of_key(c.source, "reps"));
}

struct Criterion {
  std::string name;
  bool pass;
  std::string detail;
};

struct CsvRow {
  std::optional<std::int64_t> n;
  std::string speed;
  ExtReal estimate;
  ExtReal ci_low;
  ExtReal ci_high;
  ExtReal predicted;
  Method method = Method::exact;
  std::optional<std::size_t> hits;
  std::string probe;
  bool censored = false;
};

struct ExperimentResult {
  std::vector<CsvRow> rows;
  std::vector<Criterion> criteria;
  bool all_pass() const {
    return std::all_of(criteria.begin(), criteria.end(), [](const Criterion& c) { return c.pass; });
  }
};

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (v == 0.0) v = 0.0;  // no "-0" in output
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Shortest of %.15g / %.17g that reads back to the same double.
inline std::string format_short(double v) {
  if (v == 0.0) v = 0.0;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  if (std::strtod(buf, nullptr) == v) return buf;
  return format_double(v);
}

inline std::string format_ext(ExtReal v) { return format_double(v.to_double()); }

inline std::string csv_header() { return "n,speed,estimate,ci_low,ci_high,predicted,method,hits,probe\n"; }

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return out + "\"";
}

inline std::string render_csv(const std::vector<CsvRow>& rows) {
  std::string out = csv_header();
  for (const auto& r : rows) {
    out += r.n ? std::to_string(*r.n) : std::string();
    out += "," + csv_quote(r.speed);
    out += "," + (r.censored ? std::string() : format_ext(r.estimate));
    out += "," + format_ext(r.ci_low);
    out += "," + format_ext(r.ci_high);
    out += "," + format_ext(r.predicted);
    out += "," + to_string(r.method);
    out += "," + (r.hits ? std::to_string(*r.hits) : std::string());
    out += "," + csv_quote(r.probe);
    out += "\n";
  }
  return out;
}

namespace detail {

inline CsvRow row_from(const LogProbEstimate& e, const std::string& speed, ExtReal predicted, const std::string& probe) {
  CsvRow r;
  r.n = e.n;
  r.speed = speed;
  r.estimate = e.value;
  r.ci_low = e.ci_low;
  r.ci_high = e.ci_high;
  r.predicted = predicted;
  r.method = e.method;
  if (e.method == Method::monte_carlo) r.hits = e.hits;
  r.probe = probe;
  r.censored = e.censored();
  return r;
}

inline CsvRow plain_row(std::optional<std::int64_t> n, const std::string& speed, double estimate, ExtReal predicted,
                        Method method, const std::string& probe, std::optional<std::size_t> hits = std::nullopt) {
  CsvRow r;
  r.n = n;
  r.speed = speed;
  r.estimate = r.ci_low = r.ci_high = ExtReal(estimate);
  r.predicted = predicted;
  r.method = method;
  r.hits = hits;
  r.probe = probe;
  return r;
}

/// "KEY(a)" or "KEY(a,b)" with 17-digit arguments, "-KEY(...)" for a
/// negated rate.
inline std::string probe_name(const std::string& key, std::vector<double> args, bool negated = true) {
  std::string s = (negated ? "-" : "") + key + "(";
  for (std::size_t i = 0; i < args.size(); ++i) s += (i ? ";" : "") + format_short(args[i]);
  return s + ")";
}

inline std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

inline const DistributionModel& need_model(const ExperimentConfig& c) {
  if (!c.distribution) throw ConfigError("experiment " + c.experiment + " needs a distribution", 1);
  return *c.distribution;
}

inline const std::vector<std::int64_t>& need_grid(const ExperimentConfig& c) {
  if (c.n_grid.empty()) throw ConfigError("experiment " + c.experiment + " needs n_grid", 1);
  return c.n_grid;
}

inline double param(const ExperimentConfig& c, const std::string& key, double fallback) {
  if (!c.params.contains(key)) return fallback;
  if (!c.params[key].is_number()) throw ConfigError("param \"" + key + "\" must be a number", line_of_key(c.source, key));
  return c.params[key].get<double>();
}

inline std::vector<double> param_list(const ExperimentConfig& c, const std::string& key, std::vector<double> fallback) {
  if (!c.params.contains(key)) return fallback;
  const auto& v = c.params[key];
  if (!v.is_array() || v.empty()) throw ConfigError("param \"" + key + "\" must be a non-empty array", line_of_key(c.source, key));
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError("param \"" + key + "\" must hold numbers", line_of_key(c.source, key));
    out.push_back(x.get<double>());
  }
  return out;
}

inline double need_bound(const ExperimentConfig& c) {
  if (c.event_bounds.size() != 1) throw ConfigError("event needs exactly one bound", line_of_key(c.source, "event"));
  return c.event_bounds[0];
}

// ---- experiments ----------------------------------------------------------

inline ExperimentResult run_ldp_sum_max(const ExperimentConfig& c) {
  const auto& model = need_model(c);
  const auto& grid = need_grid(c);
  if (!c.event_kind) throw ConfigError("ldp_sum_max needs an event", 1);
  const std::string kind = *c.event_kind;
  const double bound = need_bound(c);
  const double tol = c.tolerance("relative_gap", 0.25);
  const Rng rng(c.seed);
  ExperimentResult res;
  if (kind == "max_le") {
    const auto rate = rates::i_z(model);
    const ExtReal predicted = -rate(bound);
    const std::string probe = probe_name("I_Z", {bound});
    bool covered = true;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const std::int64_t n = grid[g];
      const double v = static_cast<double>(n);
      const auto exact = exact_log_prob_max(model, n, v, ExtReal::neg_inf(), ExtReal(bound));
      const auto mc = estimate_log_prob([&](Stream& s) { return draw_sum_max(model, n, s); },
                                        [&](const SumMaxSample& p) { return p.z <= bound; }, n, v, c.reps, rng.child(g));
      res.rows.push_back(row_from(exact, "n", predicted, probe));
      res.rows.push_back(row_from(mc, "n", predicted, probe));
      if (!(mc.ci_low <= exact.value && exact.value <= mc.ci_high)) covered = false;
    }
    res.criteria.push_back({"mc_ci_covers_exact", covered, "Wilson CI of the MC estimate contains the exact value"});
    const double gap = relative_gap(res.rows[res.rows.size() - 2].estimate, predicted);
    res.criteria.push_back({"exact_matches_rate", gap <= 1e-9, fmt("relative gap %.3g", gap)});
    return res;
  }
  if (kind == "sum_ge" || kind == "sum_le") {
    const bool upper = kind == "sum_ge";
    const auto cgf = std::make_shared<const ConditionalCgf>(model);
    const auto rate = rates::kappa_star(cgf);
    const ExtReal predicted = -rate(bound);
    const std::string probe = probe_name("kappa_star", {bound});
    SlopeFitReport fit;
    fit.n_grid = grid;
    fit.predicted = predicted;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const std::int64_t n = grid[g];
      const auto mc = estimate_log_prob(
          [&](Stream& s) { return draw_sum_max(model, n, s); },
          [&](const SumMaxSample& p) { return upper ? p.y >= bound : p.y <= bound; }, n, static_cast<double>(n),
          c.reps, rng.child(g));
      fit.estimates.push_back(mc);
      res.rows.push_back(row_from(mc, "n", predicted, probe));
    }
    finish_slope_fit(fit);
    res.criteria.push_back({"relative_gap", fit.relative_gap <= tol,
                            fmt("relative gap %.4g at the largest n (tolerance %.3g)", fit.relative_gap, tol)});
    return res;
  }
  throw ConfigError("ldp_sum_max: event kind must be max_le, sum_ge or sum_le", line_of_key(c.source, "kind"));
}

inline ExperimentResult run_ncmd_sum_max(const ExperimentConfig& c) {
  const auto& model = need_model(c);
  const auto& grid = need_grid(c);
  require_ncmd_regime(model);
  const ScalingFamily scaling(ScalingFamily::SpeedKind::n, c.beta.value_or(0.5));
  const double tol = c.tolerance("abs_gap", 0.02);
  const auto z_grid = param_list(c, "z_grid", {-0.5, -1.0, -2.0});
  ExperimentResult res;
  for (double z : z_grid) {
    if (z > 0.0) throw ConfigError("ncmd_sum_max: z values must be <= 0", line_of_key(c.source, "z_grid"));
    const auto rep = ncmd_z_rate_check(model, scaling, z, grid);
    const std::string probe = probe_name("J_Z", {z});
    for (const auto& e : rep.estimates) res.rows.push_back(row_from(e, "1/a_n", rep.predicted, probe));
    const double gap = std::abs(rep.extrapolated.to_double() - rep.predicted.value());
    res.criteria.push_back({"J_Z(" + format_short(z) + ")", gap <= tol, fmt("gap %.4g (tolerance %.3g)", gap, tol)});
  }
  return res;
}

inline ExperimentResult run_weibull_limit(const ExperimentConfig& c) {
  const auto& model = need_model(c);
  const auto& grid = need_grid(c);
  require_ncmd_regime(model);
  const auto z_grid = param_list(c, "z_grid", {-0.5, -1.0, -2.0, -3.0});
  const double factor = c.tolerance("bound_factor", 1.1);
  ExperimentResult res;
  bool ok = true;
  double worst = 0.0;
  for (std::int64_t n : grid) {
    for (double z : z_grid) {
      const auto p = weibull_limit_point(model, n, z);
      res.rows.push_back(plain_row(n, "1", p.exact, ExtReal(p.limit), Method::exact,
                                   "P(nL(Z_n-M)<=" + format_short(z) + ")"));
      const double allowed = p.bound / 1.1 * factor;
      if (n >= 100 && p.gap > allowed) ok = false;
      if (n >= 100 && allowed > 0.0) worst = std::max(worst, p.gap / allowed);
    }
  }
  res.criteria.push_back({"second_order_bound", ok, fmt("worst gap / bound %.4g", worst)});
  return res;
}

inline ExperimentResult run_chow_teugels(const ExperimentConfig& c) {
  const auto& model = need_model(c);
  const auto& grid = need_grid(c);
  const double ks_tol = c.tolerance("ks", 0.02);
  const double alpha = c.tolerance("alpha", 0.01);
  const auto rep = bivariate_weak_convergence_check(model, grid, c.reps, Rng(c.seed));
  ExperimentResult res;
  for (const auto& p : rep) {
    res.rows.push_back(plain_row(p.n, "1", p.ks_normal, ExtReal(0.0), Method::monte_carlo, "KS_normal", c.reps));
    res.rows.push_back(plain_row(p.n, "1", p.ks_weibull, ExtReal(0.0), Method::monte_carlo, "KS_weibull", c.reps));
    res.rows.push_back(plain_row(p.n, "1", p.p_value, ExtReal(1.0), Method::monte_carlo, "quadrant_chi2_p", c.reps));
  }
  const auto& last = rep.back();
  res.criteria.push_back({"ks_normal", last.ks_normal < ks_tol, fmt("KS %.4g (tolerance %.3g)", last.ks_normal, ks_tol)});
  res.criteria.push_back({"ks_weibull", last.ks_weibull < ks_tol, fmt("KS %.4g (tolerance %.3g)", last.ks_weibull, ks_tol)});
  res.criteria.push_back({"independence", last.p_value >= alpha, fmt("p-value %.4g (level %.3g)", last.p_value, alpha)});
  return res;
}

inline ExperimentResult run_darling_identity(const ExperimentConfig& c) {
  const auto& model = need_model(c);
  const auto& grid = need_grid(c);
  const double z = param(c, "z", model.quantile(0.5));
  const auto thetas = param_list(c, "theta_grid", {-1.0, -0.5, 0.5, 1.0});
  const double tol = c.tolerance("se_gap", 3.0);
  const Rng rng(c.seed);
  ExperimentResult res;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto rep = darling_identity_check(model, grid[g], z, thetas, c.reps, rng.child(g));
    for (const auto& p : rep.points) {
      CsvRow r = plain_row(grid[g], "1", p.estimate, ExtReal(p.predicted), Method::monte_carlo,
                           "logMGF(" + format_short(p.theta) + ";" + format_short(z) + ")", c.reps);
      r.ci_low = ExtReal(p.estimate - 1.959963984540054 * p.std_error);
      r.ci_high = ExtReal(p.estimate + 1.959963984540054 * p.std_error);
      if (p.skipped) r.estimate = r.ci_low = r.ci_high = r.predicted = ExtReal::pos_inf();
      res.rows.push_back(r);
    }
    res.criteria.push_back({"n=" + std::to_string(grid[g]), rep.max_gap <= tol,
                            fmt("worst gap %.3g standard errors (tolerance %.3g)", rep.max_gap, tol)});
  }
  return res;
}

inline ExperimentResult run_derivative_identities(const ExperimentConfig& c) {
  const auto& model = need_model(c);
  const auto rep = derivative_identities_check(model, c.tolerance("relative", 1e-3));
  ExperimentResult res;
  res.rows.push_back(plain_row(std::nullopt, "", rep.partials.d_theta, ExtReal(rep.mu), Method::exact, "d_theta kappa"));
  res.rows.push_back(
      plain_row(std::nullopt, "", rep.partials.d_theta_theta, ExtReal(rep.sigma2), Method::exact, "d_theta_theta kappa"));
  res.rows.push_back(plain_row(std::nullopt, "", rep.partials.d_z, ExtReal(0.0), Method::exact, "d_z kappa"));
  res.criteria.push_back({"d_theta = mu", rep.mean_ok, fmt("%.10g vs %.10g", rep.partials.d_theta, rep.mu)});
  res.criteria.push_back(
      {"d_theta_theta = sigma^2", rep.variance_ok, fmt("%.10g vs %.10g", rep.partials.d_theta_theta, rep.sigma2)});
  res.criteria.push_back({"d_z = 0", rep.zero_ok, fmt("%.3g", rep.partials.d_z)});
  return res;
}

inline ExperimentResult run_scaled_max_ldp(const ExperimentConfig& c) {
  const auto& model = need_model(c);
  const auto& grid = need_grid(c);
  const auto z_grid = param_list(c, "z_grid", {1.5, 2.0});
  const double tol = c.tolerance("abs_gap", 0.05);
  ExperimentResult res;
  if (model.support().upper.is_finite() || !model.tail_index())
    throw UnsupportedRegime(model.name() + ": scaled-max LDP needs an unbounded regularly varying tail");
  const double alpha = *model.tail_index();
  for (double z : z_grid) {
    if (!(z >= 1.0)) throw ConfigError("scaled_max_ldp: z values must be >= 1", line_of_key(c.source, "z_grid"));
    const auto rep = scaled_max_ldp_check(model, z, grid);
    const std::string probe = probe_name("H_Z", {z});
    for (const auto& e : rep.estimates) res.rows.push_back(row_from(e, "log n", rep.predicted, probe));
    const double gap = std::abs(rep.extrapolated.to_double() - rep.predicted.value());
    res.criteria.push_back({"H_Z(" + format_short(z) + "), alpha=" + format_short(alpha), gap <= tol,
                            fmt("gap %.4g (tolerance %.3g)", gap, tol)});
  }
  return res;
}

inline ExperimentResult run_minima_ldp(const ExperimentConfig& c) {
  const auto& grid = need_grid(c);
  const double lambda = param(c, "lambda", 1.0);
  const double x = param(c, "x", 2.25 / lambda);
  const double tol = c.tolerance("slope_gap", 0.12);
  const auto rep = minima_ldp_slope(lambda, x, grid, c.reps, Rng(c.seed));
  ExperimentResult res;
  const std::string probe = probe_name("I_X", {x});
  for (const auto& e : rep.estimates) res.rows.push_back(row_from(e, "log n", rep.predicted, probe));
  const bool ok = rep.slope_gap && *rep.slope_gap <= tol;
  res.criteria.push_back({"slope", ok,
                          rep.slope ? fmt("least-squares slope %.4g vs %.4g (tolerance %.3g)", *rep.slope,
                                          rep.predicted.value(), tol)
                                    : std::string("not enough finite estimates for a slope")});
  return res;
}

inline ExperimentResult run_minima_clt(const ExperimentConfig& c) {
  const auto& grid = need_grid(c);
  const double lambda = param(c, "lambda", 1.0);
  const double tol = c.tolerance("ks", 0.15);
  const auto rep = hoglund_clt_check(lambda, grid, c.reps, Rng(c.seed));
  ExperimentResult res;
  for (std::size_t g = 0; g < grid.size(); ++g)
    res.rows.push_back(plain_row(grid[g], "log n", rep.ks[g], ExtReal(0.0), Method::monte_carlo,
                                 "KS_normal(sigma2=" + format_short(rep.sigma2) + ")", c.reps));
  res.criteria.push_back({"trend", rep.nonincreasing_trend(), fmt("KS %.4g at first n, %.4g at last", rep.ks.front(), rep.ks.back())});
  res.criteria.push_back({"final_ks", rep.ks.back() < tol, fmt("KS %.4g (tolerance %.3g)", rep.ks.back(), tol)});
  return res;
}

inline ExperimentResult run_minima_md(const ExperimentConfig& c) {
  const auto& grid = need_grid(c);
  const double lambda = param(c, "lambda", 1.0);
  const auto thetas = param_list(c, "theta_grid", {-2.0, -1.0, 1.0, 2.0});
  const double tol = c.tolerance("relative", 0.05);
  const ScalingFamily scaling(ScalingFamily::SpeedKind::log_n, c.beta.value_or(0.5));
  const auto pts = minima_md_prelimit(lambda, scaling, thetas, grid);
  ExperimentResult res;
  for (const auto& p : pts) {
    CsvRow r = plain_row(p.n, "1/a_n", 0.0, ExtReal(p.target), Method::exact,
                         "theta^2/lambda^2(" + format_short(p.theta) + ")");
    r.estimate = r.ci_low = r.ci_high = p.value;
    res.rows.push_back(r);
    if (p.n != grid.back()) continue;
    const double allowed = tol * std::max(1.0, p.target);
    const bool ok = p.value.is_finite() && std::abs(p.value.value() - p.target) <= allowed;
    res.criteria.push_back({"theta=" + format_short(p.theta), ok,
                            fmt("value %.6g vs %.6g (tolerance %.3g)", p.value.to_double(), p.target, allowed)});
  }
  return res;
}

inline ExperimentResult run_two_speed(const ExperimentConfig& c) {
  const auto& model = need_model(c);
  const auto& grid = need_grid(c);
  const double mu = model.mean();
  std::vector<BallProbe> probes;
  if (c.params.contains("probes")) {
    for (const auto& p : c.params["probes"]) {
      if (!p.is_object() || !p.contains("x") || !p.contains("radius"))
        throw ConfigError("probes need x and radius", line_of_key(c.source, "probes"));
      probes.push_back({p["x"].get<double>(), p["radius"].get<double>()});
    }
  } else {
    probes = {{mu - 0.5 * std::max(1.0, std::sqrt(model.variance())), 0.05}, {mu, 0.1}};
  }
  const double away_bound = c.tolerance("away_bound", -1.5);
  const double near_bound = c.tolerance("near_bound", -0.01);
  const auto rep = two_speed_degeneracy_check(model, probes, grid, c.reps, Rng(c.seed));
  const auto delta = rates::delta(mu);
  ExperimentResult res;
  for (std::size_t k = 0; k < probes.size(); ++k) {
    const ExtReal predicted = -delta(probes[k].x);
    const std::string probe = probe_name("Delta", {probes[k].x}) + "[R=" + format_short(probes[k].radius) + "]";
    for (const auto& e : rep.estimates[k]) res.rows.push_back(row_from(e, "log n", predicted, probe));
    const auto& last = rep.estimates[k].back();
    if (probes[k].x == mu) {
      const bool ok = last.value.is_finite() && last.value.value() > near_bound && last.value.value() <= 0.0;
      res.criteria.push_back({"at_mean x=" + format_short(probes[k].x), ok,
                              fmt("estimate %.4g, required in (%.3g, 0]", last.value.to_double(), near_bound)});
    } else {
      const bool ok = last.ci_high < ExtReal(away_bound);
      res.criteria.push_back({"away x=" + format_short(probes[k].x), ok,
                              fmt("%.0f hits, upper bound %.4g (required below %.3g)", static_cast<double>(last.hits),
                                  last.ci_high.to_double(), away_bound)});
    }
  }
  return res;
}

inline ExperimentResult run_level_set(const ExperimentConfig& c) {
  const std::string key = c.params.contains("rate") ? c.params["rate"].get<std::string>() : "I_joint";
  rates::RateParams rp;
  rp.model = c.distribution;
  rp.lambda = param(c, "lambda", 1.0);
  rp.alpha = param(c, "alpha", 1.0);
  rp.r0 = param(c, "r0", 0.0);
  RateFunction rate = [&] {
    try {
      return rates::make_rate(key, rp);
    } catch (const ArgumentError& e) {
      throw ConfigError(e.what(), line_of_key(c.source, "rate"));
    }
  }();
  const auto lo = param_list(c, "box_lo", {-20.0, -20.0});
  const auto hi = param_list(c, "box_hi", {20.0, 20.0});
  if (lo.size() != 2 || hi.size() != 2) throw ConfigError("box_lo and box_hi need two entries", line_of_key(c.source, "box_lo"));
  const SearchBox box{{lo[0], lo[1]}, {hi[0], hi[1]}};
  const auto etas = param_list(c, "eta_grid", {0.5, 1.0, 2.0});
  const int resolution = static_cast<int>(param(c, "resolution", 121));
  ExperimentResult res;
  bool all_bounded = true;
  for (double eta : etas) {
    const auto scan = level_set_scan(rate, eta, box, resolution);
    // estimate 1 = bounded, 0 = escapes the box
    res.rows.push_back(plain_row(std::nullopt, to_string(rate.speed()), scan.bounded ? 1.0 : 0.0, ExtReal(1.0),
                                 Method::exact, "bounded(" + key + "<=" + format_short(eta) + ")"));
    all_bounded = all_bounded && scan.bounded;
  }
  res.criteria.push_back({"bounded", all_bounded, "no level set escapes the search box"});
  return res;
}

}  // namespace detail

inline ExperimentResult run_experiment(const ExperimentConfig& c) {
  validate_config(c);
  const std::string& e = c.experiment;
  if (e == "ldp_sum_max") return detail::run_ldp_sum_max(c);
  if (e == "ncmd_sum_max") return detail::run_ncmd_sum_max(c);
  if (e == "weibull_limit") return detail::run_weibull_limit(c);
  if (e == "chow_teugels") return detail::run_chow_teugels(c);
  if (e == "darling_identity") return detail::run_darling_identity(c);
  if (e == "derivative_identities") return detail::run_derivative_identities(c);
  if (e == "scaled_max_ldp") return detail::run_scaled_max_ldp(c);
  if (e == "minima_ldp") return detail::run_minima_ldp(c);
  if (e == "minima_clt") return detail::run_minima_clt(c);
  if (e == "minima_md") return detail::run_minima_md(c);
  if (e == "two_speed") return detail::run_two_speed(c);
  return detail::run_level_set(c);
}

inline nlohmann::json summary_json(const ExperimentConfig& c, const ExperimentResult& r, double wall_seconds) {
  nlohmann::json crit = nlohmann::json::array();
  for (const auto& k : r.criteria) crit.push_back({{"name", k.name}, {"pass", k.pass}, {"detail", k.detail}});
  return {{"experiment", c.experiment}, {"seed", c.seed},          {"reps", c.reps},
          {"criteria", crit},           {"pass", r.all_pass()},    {"wall_time_seconds", wall_seconds}};
}

enum ExitCode { kExitPass = 0, kExitFail = 1, kExitConfig = 2, kExitRegime = 3 };

/// Runs the experiment and writes results.csv and summary.json into
/// c.output_dir. Returns the exit status.
inline int run_and_write(const ExperimentConfig& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentResult r = run_experiment(c);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::filesystem::create_directories(c.output_dir);
  {
    std::ofstream csv(std::filesystem::path(c.output_dir) / "results.csv", std::ios::binary);
    csv << render_csv(r.rows);
  }
  {
    std::ofstream js(std::filesystem::path(c.output_dir) / "summary.json", std::ios::binary);
    js << summary_json(c, r, wall).dump(2) << "\n";
  }
  return r.all_pass() ? kExitPass : kExitFail;
}

}  // namespace devlab

#endif  // DEVLAB_EXPERIMENT_HPP
