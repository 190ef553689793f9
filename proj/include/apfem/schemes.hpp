#pragma once

// Time integrators for the linearized p-system: the AP scheme, Implicit Euler
// and the naive IMEX splitting, plus the uniform-slab time-marching driver.

#include <apfem/block_tridiagonal.hpp>
#include <apfem/elliptic.hpp>
#include <apfem/recovery.hpp>

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace apfem {

enum class SchemeKind { ap, implicit_euler, imex };

inline std::string_view to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::ap: return "ap";
    case SchemeKind::implicit_euler: return "implicit_euler";
    case SchemeKind::imex: return "imex";
  }
  return "?";
}

inline std::optional<SchemeKind> parse_scheme(std::string_view name) {
  if (name == "ap") return SchemeKind::ap;
  if (name == "implicit_euler" || name == "ie") return SchemeKind::implicit_euler;
  if (name == "imex") return SchemeKind::imex;
  return std::nullopt;
}

/// Numerical viscosity of the Lax-Friedrichs fluxes in the finite-volume baselines.
///   wave_speed: alpha = spectral radius of the discretized flux Jacobian (Rusanov)
///   classical:  alpha = dx / dt
enum class ViscosityModel { wave_speed, classical };

inline std::string_view to_string(ViscosityModel m) {
  return m == ViscosityModel::wave_speed ? "wave_speed" : "classical";
}

inline std::optional<ViscosityModel> parse_viscosity(std::string_view name) {
  if (name == "wave_speed") return ViscosityModel::wave_speed;
  if (name == "classical") return ViscosityModel::classical;
  return std::nullopt;
}

struct SchemeOptions {
  ViscosityModel viscosity = ViscosityModel::wave_speed;
  GhostPolicy ghosts{};
};

/// Per-step numerical health. Linear systems are the same at every step of a
/// run, so these are computed once per factorization.
struct StepDiagnostics {
  double gamma = 0;              // AP elliptic coefficient
  double elliptic_residual = 0;  // AP: |A x - b|_inf of the last solve
  double condition_estimate = 0; // IE / IMEX: 1-norm condition estimate of the implicit system
  double growth_factor = 0;      // IE / IMEX: block LU pivot growth
  bool ill_conditioned = false;
};

/// Reciprocal condition number below machine precision, or pivot growth beyond
/// its square root, makes the no-pivot block LU untrustworthy.
template <typename Scalar>
bool is_ill_conditioned(double condition_estimate, double growth_factor) {
  const double eps = double(std::numeric_limits<Scalar>::epsilon());
  return !(condition_estimate * eps < 1.0) || !(growth_factor * std::sqrt(eps) < 1.0);
}

/// Block-tridiagonal matrix L of the conservative Lax-Friedrichs divergence
///   (L w)_i = (F_{i+1/2} - F_{i-1/2}) / dx,
///   F_{i+1/2} = (J w_i + J w_{i+1}) / 2 - alpha / 2 (w_{i+1} - w_i),
/// with boundary ghosts folded into the first and last block rows.
template <typename Scalar>
BlockTridiagonal<Scalar> lax_friedrichs_divergence(const Mat2<Scalar>& jacobian, Scalar alpha,
                                                   const Grid<Scalar>& grid, const GhostPolicy& ghosts = {}) {
  detail::require(alpha >= Scalar(0), "viscosity must be nonnegative");
  const Index n = grid.n_cells();
  const Scalar dx = grid.dx();
  const Mat2<Scalar> id = Mat2<Scalar>::Identity();
  const Mat2<Scalar> plus = (jacobian - alpha * id) / (Scalar(2) * dx);
  const Mat2<Scalar> minus = (-jacobian - alpha * id) / (Scalar(2) * dx);
  const Mat2<Scalar> centre = alpha * id / dx;
  const GhostMap<Scalar> g = ghosts.map<Scalar>();

  BlockTridiagonal<Scalar> l(n);
  for (Index i = 0; i < n; ++i) {
    l.diag(i) = centre;
    if (i > 0) l.lower(i) = minus;
    if (i + 1 < n) l.upper(i) = plus;
  }
  l.diag(0) += minus * g.near;
  l.upper(0) += minus * g.next;
  l.diag(n - 1) += plus * g.near;
  l.lower(n - 1) += plus * g.next;
  return l;
}

namespace detail {

template <typename Scalar>
Scalar viscosity(ViscosityModel model, Scalar wave_speed, Scalar dx, Scalar dt) {
  return model == ViscosityModel::wave_speed ? wave_speed : dx / dt;
}

template <typename Scalar>
struct ImplicitSystem {
  BlockTridiagonal<Scalar> matrix;
  BlockLU<Scalar> lu;
  StepDiagnostics diagnostics;

  explicit ImplicitSystem(BlockTridiagonal<Scalar> a) : matrix(std::move(a)), lu(matrix) {
    diagnostics.condition_estimate = double(lu.condition_estimate());
    diagnostics.growth_factor = double(lu.growth_factor());
    diagnostics.ill_conditioned =
        is_ill_conditioned<Scalar>(diagnostics.condition_estimate, diagnostics.growth_factor);
  }
};

}  // namespace detail

/// One scheme with its step size fixed. The linear systems do not change from
/// step to step, so they are assembled and factored once here.
template <typename Scalar = double>
class Stepper {
 public:
  Stepper(SchemeKind kind, const Grid<Scalar>& grid, Scalar dt, const CaseDefinition<Scalar>& cas,
          SchemeOptions options = {})
      : kind_(kind), grid_(grid), dt_(dt), eps_(cas.eps()), case_(cas), options_(options) {
    detail::require(dt > Scalar(0) && std::isfinite(double(dt)), "dt must be positive and finite");
    detail::require(eps_ > Scalar(0) && eps_ < Scalar(1), "schemes require eps in (0, 1)");
    const SplitFlux<Scalar> split(eps_);
    const Scalar dx = grid.dx();
    switch (kind) {
      case SchemeKind::ap: {
        elliptic_.emplace(assemble(gamma_of(eps_, dt), grid));
        diagnostics_.gamma = double(elliptic_->gamma);
        break;
      }
      case SchemeKind::implicit_euler: {
        const Scalar alpha = detail::viscosity(options.viscosity, split.total_speed(), dx, dt);
        implicit_.emplace(
            lax_friedrichs_divergence(split.total_jacobian(), alpha, grid, options.ghosts).scaled_plus_identity(Scalar(1), dt));
        diagnostics_ = implicit_->diagnostics;
        break;
      }
      case SchemeKind::imex: {
        const Scalar alpha_hat = detail::viscosity(options.viscosity, split.nonstiff_speed(), dx, dt);
        const Scalar alpha_tilde = detail::viscosity(options.viscosity, split.stiff_speed(), dx, dt);
        explicit_.emplace(lax_friedrichs_divergence(split.nonstiff_jacobian(), alpha_hat, grid, options.ghosts));
        implicit_.emplace(lax_friedrichs_divergence(split.stiff_jacobian(), alpha_tilde, grid, options.ghosts)
                              .scaled_plus_identity(Scalar(1), dt));
        diagnostics_ = implicit_->diagnostics;
        break;
      }
    }
  }

  SchemeKind kind() const { return kind_; }
  Scalar dt() const { return dt_; }
  const StepDiagnostics& diagnostics() const { return diagnostics_; }

  State<Scalar> step(const State<Scalar>& state) {
    check_matches(state, grid_);
    switch (kind_) {
      case SchemeKind::ap: return ap(state);
      case SchemeKind::implicit_euler: return implicit_euler(state);
      case SchemeKind::imex: return imex(state);
    }
    return state;
  }

 private:
  State<Scalar> ap(const State<Scalar>& s) {
    const RecoveredDerivatives<Scalar> d = recover_derivatives(s, grid_, dt_, options_.ghosts);
    const Vec<Scalar> g = case_.sample_g(grid_, s.time);
    LoadFunctional<Scalar> load{s.v + dt_ * d.ux, g + d.vx / eps_, dt_, eps_};
    const Vec<Scalar> b = assemble_load(load, grid_);
    const FemSolution<Scalar> vh = solve(*elliptic_, b);
    diagnostics_.elliptic_residual = double(residual_inf(*elliptic_, vh, b));

    State<Scalar> out;
    out.time = s.time + dt_;
    out.v = eval_midpoints(vh);
    out.u = s.u + dt_ * (d.vx / eps_ + ((Scalar(1) - eps_) / (eps_ * eps_)) * fem_derivative(vh) + g);
    return out;
  }

  State<Scalar> implicit_euler(const State<Scalar>& s) {
    const Scalar t_next = s.time + dt_;
    Field2<Scalar> rhs = s.stacked();
    rhs.row(1) += dt_ * case_.sample_g(grid_, t_next).transpose();
    return State<Scalar>::from_stacked(implicit_->lu.solve(rhs), t_next);
  }

  State<Scalar> imex(const State<Scalar>& s) {
    const Field2<Scalar> w = s.stacked();
    Field2<Scalar> w_hat = w - dt_ * (*explicit_ * w);
    w_hat.row(1) += dt_ * case_.sample_g(grid_, s.time).transpose();
    return State<Scalar>::from_stacked(implicit_->lu.solve(w_hat), s.time + dt_);
  }

  SchemeKind kind_;
  Grid<Scalar> grid_;
  Scalar dt_;
  Scalar eps_;
  CaseDefinition<Scalar> case_;
  SchemeOptions options_;
  StepDiagnostics diagnostics_;
  std::optional<EllipticProblem<Scalar>> elliptic_;
  std::optional<BlockTridiagonal<Scalar>> explicit_;
  std::optional<detail::ImplicitSystem<Scalar>> implicit_;
};

/// AP step: recover derivatives, solve the gamma-weighted elliptic problem
/// for v, then update u from the FEM slope.
template <typename Scalar>
State<Scalar> ap_step(const State<Scalar>& state, const Grid<Scalar>& grid, Scalar dt, Scalar eps,
                      const CaseDefinition<Scalar>& cas, const SchemeOptions& options = {}) {
  detail::require(eps == cas.eps(), "eps does not match the case");
  return Stepper<Scalar>(SchemeKind::ap, grid, dt, cas, options).step(state);
}

/// (I + dt L) w^{n+1} = w^n + dt G^{n+1}
template <typename Scalar>
State<Scalar> implicit_euler_step(const State<Scalar>& state, const Grid<Scalar>& grid, Scalar dt, Scalar eps,
                                  const CaseDefinition<Scalar>& cas, const SchemeOptions& options = {}) {
  detail::require(eps == cas.eps(), "eps does not match the case");
  return Stepper<Scalar>(SchemeKind::implicit_euler, grid, dt, cas, options).step(state);
}

/// w_hat = w^n - dt L_hat w^n + dt G^n, then (I + dt L_tilde) w^{n+1} = w_hat.
template <typename Scalar>
State<Scalar> imex_step(const State<Scalar>& state, const Grid<Scalar>& grid, Scalar dt, Scalar eps,
                        const CaseDefinition<Scalar>& cas, const SchemeOptions& options = {}) {
  detail::require(eps == cas.eps(), "eps does not match the case");
  return Stepper<Scalar>(SchemeKind::imex, grid, dt, cas, options).step(state);
}

struct SchemeConfig {
  SchemeKind kind = SchemeKind::ap;
  double eps = 1e-2;
  double cfl_hat = 0.8;
  double t_final = 0.1;
  CaseKind case_kind = CaseKind::smooth;
  Index n_cells = 64;
  SchemeOptions options{};

  void validate() const {
    detail::require(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
    detail::require(cfl_hat > 0.0 && cfl_hat < 1.0, "cfl_hat must lie in (0, 1)");
    detail::require(t_final > 0.0 && std::isfinite(t_final), "t_final must be positive and finite");
    detail::require(n_cells >= 2, "n_cells must be at least 2");
  }
};

/// Number of uniform slabs: ceil(t_final / dt_target), where a quotient within
/// 1e-9 relative of an integer counts as that integer.
inline Index step_count(double t_final, double dt_target) {
  detail::require(t_final > 0.0 && dt_target > 0.0, "t_final and dt_target must be positive");
  const double q = t_final / dt_target;
  const double nearest = std::round(q);
  if (nearest >= 1.0 && std::abs(q - nearest) <= 1e-9 * q) return Index(nearest);
  return Index(std::ceil(q));
}

template <typename Scalar = double>
struct RunResult {
  State<Scalar> final_state;
  Index steps_taken = 0;
  Scalar dt_used = 0;
  StepDiagnostics diagnostics;
  std::vector<std::string> flags;

  bool flagged() const { return !flags.empty(); }
};

/// March from exact data at t = 0 to t_final in uniform slabs.
template <typename Scalar = double>
RunResult<Scalar> run(const SchemeConfig& config) {
  config.validate();
  const Grid<Scalar> grid = make_grid<Scalar>(config.n_cells);
  const CaseDefinition<Scalar> cas(config.case_kind, Scalar(config.eps));
  const Scalar t_final = Scalar(config.t_final);
  const Index steps = step_count(config.t_final, config.cfl_hat * double(grid.dx()));
  const Scalar dt = t_final / Scalar(steps);

  RunResult<Scalar> result;
  result.dt_used = dt;
  result.steps_taken = steps;
  Stepper<Scalar> stepper(config.kind, grid, dt, cas, config.options);
  result.diagnostics = stepper.diagnostics();
  if (result.diagnostics.ill_conditioned) result.flags.emplace_back("ill_conditioned");

  State<Scalar> state = cas.sample(grid, Scalar(0));
  for (Index n = 0; n < steps; ++n) {
    try {
      state = stepper.step(state);
    } catch (const NumericalError& e) {
      throw NumericalError("step " + std::to_string(n + 1) + " of " + std::to_string(steps) + ": " + e.what());
    }
    state.time = n + 1 == steps ? t_final : Scalar(n + 1) * dt;
    if (!state.all_finite()) {
      throw NumericalError("step " + std::to_string(n + 1) + " of " + std::to_string(steps) +
                           ": non-finite state");
    }
  }
  if (config.kind == SchemeKind::ap) result.diagnostics = stepper.diagnostics();
  result.final_state = std::move(state);
  return result;
}

}  // namespace apfem
