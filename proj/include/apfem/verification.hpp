#pragma once

// Empirical checks of the scheme's theory: one-step consistency scaling of v
// and u, conditioning of the elliptic step, the O(eps^2) multiscale structure
// of the test cases, and admissibility of the flux splitting.

#include <apfem/model.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace apfem {

enum class ScalingAxis { dt, dx, eps };

std::string_view to_string(ScalingAxis axis);

/// Least-squares slope of log(error) against log(parameter).
struct ScalingReport {
  std::string name;
  ScalingAxis axis = ScalingAxis::dx;
  std::vector<std::pair<double, double>> samples;  // (parameter, error)
  double fitted_slope = 0;
  double target_slope = 0;
  double tolerance = 0;
  bool at_least = false;  // one-sided: slope >= target - tolerance
  bool pass = false;
};

double fit_loglog_slope(const std::vector<std::pair<double, double>>& samples);

ScalingReport make_scaling_report(std::string name, ScalingAxis axis, std::vector<std::pair<double, double>> samples,
                                  double target_slope, double tolerance, bool at_least = false);

/// A scalar compared against an interval; missing ends are unbounded.
struct CheckResult {
  std::string name;
  double value = 0;
  std::optional<double> lower;
  std::optional<double> upper;
  bool pass = false;
};

CheckResult make_check(std::string name, double value, std::optional<double> lower, std::optional<double> upper);

struct SuiteReport {
  std::string suite;
  std::vector<ScalingReport> scalings;
  std::vector<CheckResult> checks;

  bool pass() const;
};

/// v and u errors after a single AP step from exact data at `anchor`, in the
/// midpoint-quadrature L2 norm. dt = cfl_hat * dx.
struct OneStepError {
  double dt = 0;
  double dx = 0;
  double err_v = 0;
  double err_u = 0;
};

OneStepError one_step_error(CaseKind kind, double eps, Index n_cells, double anchor, double cfl_hat = 0.8);

/// Unit-constant consistency bounds of a single AP step.
double v_step_bound(double eps, double dt, double dx);  // eps^2 dt^2 + eps^4 + eps^3 dx + eps^6 / dx^2
double u_step_bound(double eps, double dt, double dx);  // dt^2 + eps^4 / dx^2 + eps^2

struct ConsistencyVConfig {
  CaseKind case_kind = CaseKind::smooth;
  double anchor = 0.05;
  double cfl_hat = 0.8;
  double eps_max = 0.5;
  // eps fixed, grid refined
  double regime_a_eps = 1e-2;
  std::vector<Index> regime_a_nx{8, 16, 32, 64};
  // grid fixed, eps reduced
  Index regime_b_nx = 256;
  std::vector<double> regime_b_eps{1e-3, 1e-4, 1e-5};
  // vanishing eps
  double tiny_eps = 1e-8;
  std::vector<Index> tiny_eps_nx{64, 1024, 4096};
};

struct ConsistencyUConfig {
  CaseKind case_kind = CaseKind::smooth;
  double anchor = 0.025;
  double cfl_hat = 0.8;
  double eps_max = 0.5;
  double slope_eps = 1e-6;
  std::vector<Index> slope_nx{64, 128, 256, 512, 1024};
  double envelope_eps = 1e-2;
  Index envelope_nx = 64;
};

struct MultiscaleConfig {
  std::vector<CaseKind> cases{CaseKind::smooth, CaseKind::kink};
  std::vector<double> eps_list{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
  std::vector<double> times{0.0, 0.05, 0.1};
  Index n_points = 10001;
};

struct ConditioningConfig {
  std::vector<double> gamma_list{1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0,
                                 1e1,  1e2,  1e3,  1e4,  1e5,  1e6,  1e7,  1e8};
  int probes = 20;
  Index n_cells = 64;
  double slack = 1e-10;
  std::uint64_t seed = 20240611;
};

struct SplittingConfig {
  std::vector<std::vector<double>> sample_sets{{0.9, 0.99}, {1e-2, 1e-4}, {0.5}};
  std::vector<double> eigen_eps{1e-1, 1e-2, 1e-4};
  int identity_samples = 100000;
  std::uint64_t seed = 7;
};

SuiteReport consistency_v_suite(const ConsistencyVConfig& config = {});
SuiteReport consistency_u_suite(const ConsistencyUConfig& config = {});
SuiteReport multiscale_suite(const MultiscaleConfig& config = {});
SuiteReport conditioning_suite(const ConditioningConfig& config = {});
SuiteReport splitting_suite(const SplittingConfig& config = {});

/// Suite names accepted by run_suites, "all" included.
const std::vector<std::string>& suite_names();

/// Runs one named suite, or every suite for "all", with default configuration.
std::vector<SuiteReport> run_suites(const std::string& name);

void print_suite_table(const std::vector<SuiteReport>& reports, std::ostream& out);

inline constexpr const char* verification_csv_header = "suite,check,value,lower,upper,pass";

void emit_verification_csv(const std::vector<SuiteReport>& reports, std::ostream& out);

}  // namespace apfem
