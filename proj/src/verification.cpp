#include <apfem/verification.hpp>

#include <apfem/elliptic.hpp>
#include <apfem/harness.hpp>
#include <apfem/schemes.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

namespace apfem {

std::string_view to_string(ScalingAxis axis) {
  switch (axis) {
    case ScalingAxis::dt: return "dt";
    case ScalingAxis::dx: return "dx";
    case ScalingAxis::eps: return "eps";
  }
  return "?";
}

double fit_loglog_slope(const std::vector<std::pair<double, double>>& samples) {
  detail::require(samples.size() >= 2, "slope fit needs at least two samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [p, e] : samples) {
    detail::require(p > 0.0 && e > 0.0, "slope fit needs positive parameters and errors");
    const double x = std::log(p), y = std::log(e);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = double(samples.size());
  const double denom = n * sxx - sx * sx;
  detail::require(denom > 0.0, "slope fit needs distinct parameters");
  return (n * sxy - sx * sy) / denom;
}

ScalingReport make_scaling_report(std::string name, ScalingAxis axis, std::vector<std::pair<double, double>> samples,
                                  double target_slope, double tolerance, bool at_least) {
  detail::require(samples.size() >= 3, "a scaling report needs at least three samples");
  ScalingReport r;
  r.name = std::move(name);
  r.axis = axis;
  r.target_slope = target_slope;
  r.tolerance = tolerance;
  r.at_least = at_least;
  bool positive = true;
  for (const auto& [p, e] : samples) positive = positive && p > 0.0 && e > 0.0 && std::isfinite(e);
  r.samples = std::move(samples);
  if (positive) {
    r.fitted_slope = fit_loglog_slope(r.samples);
    r.pass = at_least ? r.fitted_slope >= target_slope - tolerance
                      : std::abs(r.fitted_slope - target_slope) <= tolerance;
  } else {
    r.fitted_slope = std::numeric_limits<double>::quiet_NaN();
    r.pass = false;
  }
  return r;
}

CheckResult make_check(std::string name, double value, std::optional<double> lower, std::optional<double> upper) {
  CheckResult c{std::move(name), value, lower, upper, std::isfinite(value)};
  if (lower) c.pass = c.pass && value >= *lower;
  if (upper) c.pass = c.pass && value <= *upper;
  return c;
}

bool SuiteReport::pass() const {
  return std::all_of(scalings.begin(), scalings.end(), [](const auto& s) { return s.pass; }) &&
         std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

OneStepError one_step_error(CaseKind kind, double eps, Index n_cells, double anchor, double cfl_hat) {
  const Grid<double> grid = make_grid(n_cells);
  const CaseDefinition<double> cas(kind, eps);
  OneStepError out;
  out.dx = grid.dx();
  out.dt = cfl_hat * grid.dx();
  Stepper<double> stepper(SchemeKind::ap, grid, out.dt, cas);
  const State<double> next = stepper.step(cas.sample(grid, anchor));
  const ErrorNorms<double> e = l2_error(next, cas, grid);
  out.err_v = e.v;
  out.err_u = e.u;
  return out;
}

double v_step_bound(double eps, double dt, double dx) {
  const double e2 = eps * eps;
  return e2 * dt * dt + e2 * e2 + e2 * eps * dx + e2 * e2 * e2 / (dx * dx);
}

double u_step_bound(double eps, double dt, double dx) {
  const double e2 = eps * eps;
  return dt * dt + e2 * e2 / (dx * dx) + e2;
}

namespace {

std::string label(const std::string& base, const std::string& key, double value) {
  std::ostringstream s;
  s << base << ' ' << key << '=' << format_double(value);
  return s.str();
}

std::string label(const std::string& base, const std::string& key, Index value) {
  return base + ' ' + key + '=' + std::to_string(value);
}

void require_regime(double eps, double eps_max, double dt, CaseKind kind) {
  detail::require(kind == CaseKind::smooth, "consistency suites need the smooth case");
  detail::require(eps > 0.0 && eps <= eps_max, "consistency suites need 0 < eps <= eps_max");
  detail::require(eps <= dt, "consistency suites need eps <= dt; eps=" + format_double(eps) +
                                 " dt=" + format_double(dt));
}

}  // namespace

SuiteReport consistency_v_suite(const ConsistencyVConfig& config) {
  detail::require(config.eps_max < 1.0, "eps_max must be below 1");
  SuiteReport report{"consistency_v", {}, {}};

  // Regime A: eps fixed, grid refined.
  std::vector<std::pair<double, double>> by_dx;
  std::vector<double> errors;
  for (Index n : config.regime_a_nx) {
    const double dx = 1.0 / double(n);
    require_regime(config.regime_a_eps, config.eps_max, config.cfl_hat * dx, config.case_kind);
    const OneStepError e = one_step_error(config.case_kind, config.regime_a_eps, n, config.anchor, config.cfl_hat);
    by_dx.emplace_back(e.dx, e.err_v);
    errors.push_back(e.err_v);
    report.checks.push_back(make_check(label("regime_a envelope err/bound", "nx", n),
                                       e.err_v / v_step_bound(config.regime_a_eps, e.dt, e.dx), std::nullopt, 10.0));
  }
  for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
    report.checks.push_back(make_check(label("regime_a refinement ratio", "nx", config.regime_a_nx[k + 1]),
                                       errors[k] / errors[k + 1], 1.4, 2.8));
  }
  report.scalings.push_back(make_scaling_report("regime_a err_v vs dx", ScalingAxis::dx, by_dx, 1.0, 0.5));

  // Regime B: grid fixed, eps reduced.
  std::vector<std::pair<double, double>> by_eps;
  double first_ratio = 0, worst_ratio = 0;
  std::vector<double> eps_b = config.regime_b_eps;
  std::sort(eps_b.rbegin(), eps_b.rend());
  for (double eps : eps_b) {
    const double dx = 1.0 / double(config.regime_b_nx);
    require_regime(eps, config.eps_max, config.cfl_hat * dx, config.case_kind);
    const OneStepError e = one_step_error(config.case_kind, eps, config.regime_b_nx, config.anchor, config.cfl_hat);
    by_eps.emplace_back(eps, e.err_v);
    const double ratio = e.err_v / (eps * eps);
    if (first_ratio == 0) first_ratio = ratio;
    worst_ratio = std::max(worst_ratio, ratio);
  }
  report.scalings.push_back(make_scaling_report("regime_b err_v vs eps", ScalingAxis::eps, by_eps, 2.0, 0.05, true));
  report.checks.push_back(make_check("regime_b max(err_v/eps^2) / first", worst_ratio / first_ratio, std::nullopt, 10.0));

  // eps -> 0: every bound term vanishes.
  for (Index n : config.tiny_eps_nx) {
    require_regime(config.tiny_eps, config.eps_max, config.cfl_hat / double(n), config.case_kind);
    const OneStepError e = one_step_error(config.case_kind, config.tiny_eps, n, config.anchor, config.cfl_hat);
    report.checks.push_back(make_check(label("vanishing eps err_v", "nx", n), e.err_v, std::nullopt, 1e-12));
  }
  return report;
}

SuiteReport consistency_u_suite(const ConsistencyUConfig& config) {
  detail::require(config.eps_max < 1.0, "eps_max must be below 1");
  SuiteReport report{"consistency_u", {}, {}};

  std::vector<std::pair<double, double>> by_dt;
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (Index n : config.slope_nx) {
    require_regime(config.slope_eps, config.eps_max, config.cfl_hat / double(n), config.case_kind);
    const OneStepError e = one_step_error(config.case_kind, config.slope_eps, n, config.anchor, config.cfl_hat);
    by_dt.emplace_back(e.dt, e.err_u);
    const double ratio = e.err_u / std::max(e.dt * e.dt, config.slope_eps * config.slope_eps);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  report.scalings.push_back(make_scaling_report("err_u vs dt", ScalingAxis::dt, by_dt, 2.0, 0.3));
  report.checks.push_back(make_check("spread of err_u/max(dt^2,eps^2)", hi / lo, std::nullopt, 10.0));

  require_regime(config.envelope_eps, config.eps_max, config.cfl_hat / double(config.envelope_nx), config.case_kind);
  const OneStepError e =
      one_step_error(config.case_kind, config.envelope_eps, config.envelope_nx, config.anchor, config.cfl_hat);
  report.checks.push_back(make_check(label("envelope err_u/bound", "nx", config.envelope_nx),
                                     e.err_u / u_step_bound(config.envelope_eps, e.dt, e.dx), std::nullopt, 10.0));
  return report;
}

SuiteReport multiscale_suite(const MultiscaleConfig& config) {
  detail::require(config.n_points >= 2, "multiscale sampling needs at least two points");
  detail::require(!config.eps_list.empty(), "multiscale suite needs eps values");
  SuiteReport report{"multiscale", {}, {}};
  std::vector<double> eps_list = config.eps_list;
  std::sort(eps_list.rbegin(), eps_list.rend());

  for (CaseKind kind : config.cases) {
    const std::string name(to_string(kind));
    auto sup_ratios = [&](double eps) {
      const CaseDefinition<double> cas(kind, eps);
      double sv = 0, sux = 0;
      for (double t : config.times) {
        for (Index k = 0; k < config.n_points; ++k) {
          const double x = double(k) / double(config.n_points - 1);
          sv = std::max(sv, std::abs(cas.v(x, t)));
          sux = std::max(sux, std::abs(cas.u_x(x, t)));
        }
      }
      return std::pair{sv / (eps * eps), sux / (eps * eps)};
    };
    // Window calibrated at the largest eps and reused below it.
    const auto [cv, cux] = sup_ratios(eps_list.front());
    const double slack = 1.0 + 1e-12;
    report.checks.push_back(make_check(name + " calibrated sup|v|/eps^2", cv, 0.0, std::nullopt));
    report.checks.push_back(make_check(name + " calibrated sup|u_x|/eps^2", cux, 0.0, std::nullopt));
    for (double eps : eps_list) {
      const auto [rv, rux] = sup_ratios(eps);
      report.checks.push_back(make_check(label(name + " sup|v|/eps^2", "eps", eps), rv, 0.0, cv * slack));
      report.checks.push_back(make_check(label(name + " sup|u_x|/eps^2", "eps", eps), rux, 0.0, cux * slack));
    }
  }
  return report;
}

SuiteReport conditioning_suite(const ConditioningConfig& config) {
  detail::require(config.probes >= 1, "conditioning suite needs at least one probe");
  SuiteReport report{"conditioning", {}, {}};
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> exponent(-3.0, 0.0);
  const Grid<double> grid = make_grid(config.n_cells);
  const Index n = config.n_cells - 1;

  double worst_energy = 0, worst_h1 = 0;
  for (double gamma : config.gamma_list) {
    detail::require(gamma > 0.0, "gamma values must be positive");
    const EllipticProblem<double> problem = assemble(gamma, grid);
    double energy = 0, h1 = 0;
    for (int p = 0; p < config.probes; ++p) {
      Vec<double> rhs(n), pert(n);
      for (Index i = 0; i < n; ++i) rhs[i] = unit(rng);
      const double scale = std::pow(10.0, exponent(rng));
      for (Index i = 0; i < n; ++i) pert[i] = scale * unit(rng);
      energy = std::max(energy, conditioning_probe(problem, rhs, pert, config.slack).constant);
      h1 = std::max(h1, h1_conditioning_probe(problem, rhs, pert, config.slack).constant);
    }
    report.checks.push_back(make_check(label("energy bound constant", "gamma", gamma), energy, std::nullopt,
                                       1.0 + config.slack));
    report.checks.push_back(make_check(label("H1 bound constant (with M/gamma)", "gamma", gamma), h1, std::nullopt,
                                       1.0 + config.slack));
    worst_energy = std::max(worst_energy, energy);
    worst_h1 = std::max(worst_h1, h1);
  }
  report.checks.push_back(make_check("worst energy bound constant", worst_energy, std::nullopt, 1.0 + config.slack));
  report.checks.push_back(make_check("worst H1 bound constant", worst_h1, std::nullopt, 1.0 + config.slack));
  return report;
}

SuiteReport splitting_suite(const SplittingConfig& config) {
  SuiteReport report{"splitting", {}, {}};
  for (const auto& samples : config.sample_sets) {
    std::ostringstream name;
    name << "admissible eps={";
    for (std::size_t i = 0; i < samples.size(); ++i) name << (i ? "," : "") << format_double(samples[i]);
    name << '}';
    const AdmissibilityReport r = check_splitting_admissible(flux_split(0.5), samples);
    report.checks.push_back(make_check(name.str(), r.pass() ? 1.0 : 0.0, 1.0, std::nullopt));
  }

  const double mach = std::numeric_limits<double>::epsilon();
  for (double eps : config.eigen_eps) {
    const SplitFlux<double> s(eps);
    report.checks.push_back(
        make_check(label("|lambda_hat - 1|", "eps", eps), std::abs(s.nonstiff_speed() - 1.0), std::nullopt, 0.0));
    const double expected = (1.0 - eps) / eps;
    report.checks.push_back(make_check(label("|lambda_tilde - (1-eps)/eps| / ((1-eps)/eps)", "eps", eps),
                                       std::abs(s.stiff_speed() - expected) / expected, std::nullopt, 4 * mach));
  }

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> log_eps(-8.0, 0.0);
  double worst = 0;
  for (int k = 0; k < config.identity_samples; ++k) {
    const SplitFlux<double> s(std::pow(10.0, log_eps(rng)));
    const Vec2<double> w(unit(rng), unit(rng));
    const Vec2<double> f = s.total(w);
    const double scale = f.cwiseAbs().maxCoeff();
    if (scale == 0.0) continue;
    worst = std::max(worst, (s.nonstiff(w) + s.stiff(w) - f).cwiseAbs().maxCoeff() / scale);
  }
  report.checks.push_back(make_check("splitting identity, in machine epsilons", worst / mach, std::nullopt, 8.0));
  return report;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"consistency_v", "consistency_u", "multiscale",
                                              "conditioning",  "splitting",     "all"};
  return names;
}

std::vector<SuiteReport> run_suites(const std::string& name) {
  if (name == "consistency_v") return {consistency_v_suite()};
  if (name == "consistency_u") return {consistency_u_suite()};
  if (name == "multiscale") return {multiscale_suite()};
  if (name == "conditioning") return {conditioning_suite()};
  if (name == "splitting") return {splitting_suite()};
  if (name == "all") {
    return {consistency_v_suite(), consistency_u_suite(), multiscale_suite(), conditioning_suite(),
            splitting_suite()};
  }
  throw InvalidArgument("unknown suite " + name);
}

namespace {

std::string bound_text(const std::optional<double>& b) { return b ? format_double(*b) : std::string(); }

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

void print_suite_table(const std::vector<SuiteReport>& reports, std::ostream& out) {
  for (const SuiteReport& r : reports) {
    out << "== " << r.suite << (r.pass() ? "  PASS" : "  FAIL") << '\n';
    for (const ScalingReport& s : r.scalings) {
      out << "  " << (s.pass ? "pass " : "FAIL ") << s.name << ": slope " << std::setprecision(4) << s.fitted_slope
          << (s.at_least ? " >= " : " in ")
          << (s.at_least ? format_double(s.target_slope - s.tolerance)
                         : format_double(s.target_slope) + " +- " + format_double(s.tolerance))
          << '\n';
      for (const auto& [p, e] : s.samples) {
        out << "         " << to_string(s.axis) << '=' << std::setprecision(6) << p << "  error=" << e << '\n';
      }
    }
    for (const CheckResult& c : r.checks) {
      out << "  " << (c.pass ? "pass " : "FAIL ") << c.name << ": " << std::setprecision(6) << c.value;
      if (c.lower && c.upper) {
        out << " in [" << *c.lower << ", " << *c.upper << ']';
      } else if (c.upper) {
        out << " <= " << *c.upper;
      } else if (c.lower) {
        out << " >= " << *c.lower;
      }
      out << '\n';
    }
  }
}

void emit_verification_csv(const std::vector<SuiteReport>& reports, std::ostream& out) {
  out << verification_csv_header << '\n';
  for (const SuiteReport& r : reports) {
    for (const ScalingReport& s : r.scalings) {
      const std::string upper = s.at_least ? std::string() : format_double(s.target_slope + s.tolerance);
      out << r.suite << ',' << csv_field("slope " + s.name) << ',' << format_double(s.fitted_slope) << ','
          << format_double(s.target_slope - s.tolerance) << ',' << upper << ',' << (s.pass ? "true" : "false")
          << '\n';
    }
    for (const CheckResult& c : r.checks) {
      out << r.suite << ',' << csv_field(c.name) << ',' << format_double(c.value) << ',' << bound_text(c.lower) << ','
          << bound_text(c.upper) << ',' << (c.pass ? "true" : "false") << '\n';
    }
  }
}

}  // namespace apfem
