#pragma once

// gamma-weighted elliptic problem
//   a(v, phi) = int gamma v_x phi_x + v phi dx = iota_h(phi)
// with continuous piecewise-linear elements on the uniform grid and zero
// Dirichlet values at both ends. All element integrals are exact.

#include <apfem/model.hpp>
#include <apfem/tridiagonal.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace apfem {

/// gamma = dt^2 (1 - eps)^2 / eps^2
template <typename Scalar = double>
Scalar gamma_of(Scalar eps, Scalar dt) {
  detail::require(eps > Scalar(0) && eps < Scalar(1), "eps must lie in (0, 1)");
  detail::require(dt > Scalar(0), "dt must be positive");
  const Scalar r = dt * (Scalar(1) - eps) / eps;
  return r * r;
}

template <typename Scalar = double>
struct EllipticProblem {
  Scalar gamma;
  Grid<Scalar> grid;
  Vec<Scalar> diag;  // n_dof
  Vec<Scalar> off;   // n_dof - 1, symmetric

  Index n_dof() const { return grid.n_cells() - 1; }

  // Sharp Poincare-Friedrichs constant of the domain, L / pi.
  Scalar poincare_const() const { return grid.domain().length() / std::numbers::pi_v<Scalar>; }
  Scalar boundedness_const() const { return gamma + poincare_const() * poincare_const(); }

  Vec<Scalar> apply(const Vec<Scalar>& x) const {
    detail::require(x.size() == n_dof(), "vector length does not match the problem");
    Vec<Scalar> y = diag.cwiseProduct(x);
    const Index n = n_dof();
    if (n > 1) {
      y.head(n - 1) += off.cwiseProduct(x.tail(n - 1));
      y.tail(n - 1) += off.cwiseProduct(x.head(n - 1));
    }
    return y;
  }
};

/// Stiffness gamma tridiag(-1, 2, -1) / dx plus mass dx tridiag(1, 4, 1) / 6.
template <typename Scalar>
EllipticProblem<Scalar> assemble(Scalar gamma, const Grid<Scalar>& grid) {
  detail::require(gamma >= Scalar(0) && std::isfinite(double(gamma)), "gamma must be finite and nonnegative");
  const Scalar dx = grid.dx();
  const Index n = grid.n_cells() - 1;
  EllipticProblem<Scalar> p{gamma, grid, {}, {}};
  p.diag = Vec<Scalar>::Constant(n, Scalar(2) * gamma / dx + Scalar(4) * dx / Scalar(6));
  p.off = Vec<Scalar>::Constant(std::max<Index>(n - 1, 0), -gamma / dx + dx / Scalar(6));
  return p;
}

/// Cellwise-constant data of the load functional
///   iota_h(phi) = int iota1 phi - dt^2 (1 - eps) iota2 phi_x dx.
template <typename Scalar = double>
struct LoadFunctional {
  Vec<Scalar> iota1;
  Vec<Scalar> iota2;
  Scalar dt;
  Scalar eps;
};

/// b_j = dx/2 (iota1_{j-1} + iota1_j) - dt^2 (1 - eps) (iota2_{j-1} - iota2_j)
/// for interior node j between cells j-1 and j (0-based cells).
template <typename Scalar>
Vec<Scalar> assemble_load(const LoadFunctional<Scalar>& load, const Grid<Scalar>& grid) {
  const Index n = grid.n_cells();
  detail::require(load.iota1.size() == n && load.iota2.size() == n, "load data length does not match the grid");
  const Scalar dx = grid.dx();
  const Scalar c = load.dt * load.dt * (Scalar(1) - load.eps);
  return (dx / Scalar(2)) * (load.iota1.head(n - 1) + load.iota1.tail(n - 1)) -
         c * (load.iota2.head(n - 1) - load.iota2.tail(n - 1));
}

/// Interior nodal values; both boundary values are zero.
template <typename Scalar = double>
struct FemSolution {
  Vec<Scalar> nodal;
  Scalar dx;

  Index n_cells() const { return nodal.size() + 1; }

  // nodal values including the two boundary zeros
  Vec<Scalar> with_boundary() const {
    Vec<Scalar> full = Vec<Scalar>::Zero(nodal.size() + 2);
    full.segment(1, nodal.size()) = nodal;
    return full;
  }
};

template <typename Scalar>
FemSolution<Scalar> solve(const EllipticProblem<Scalar>& problem, const Vec<Scalar>& rhs) {
  detail::require(rhs.size() == problem.n_dof(), "rhs length does not match the problem");
  return {thomas_solve(problem.off, problem.diag, problem.off, rhs), problem.grid.dx()};
}

template <typename Scalar>
Scalar residual_inf(const EllipticProblem<Scalar>& problem, const FemSolution<Scalar>& sol,
                    const Vec<Scalar>& rhs) {
  return (problem.apply(sol.nodal) - rhs).cwiseAbs().maxCoeff();
}

template <typename Scalar>
Vec<Scalar> eval_midpoints(const FemSolution<Scalar>& sol) {
  const Vec<Scalar> full = sol.with_boundary();
  const Index n = sol.n_cells();
  return (full.head(n) + full.tail(n)) / Scalar(2);
}

template <typename Scalar>
Vec<Scalar> fem_derivative(const FemSolution<Scalar>& sol) {
  const Vec<Scalar> full = sol.with_boundary();
  const Index n = sol.n_cells();
  return (full.tail(n) - full.head(n)) / sol.dx;
}

/// sqrt(|phi|_L2^2 + gamma |phi_x|_L2^2), integrated exactly cell by cell.
template <typename Scalar>
Scalar energy_norm(const FemSolution<Scalar>& phi, Scalar gamma) {
  detail::require(gamma >= Scalar(0), "gamma must be nonnegative");
  const Vec<Scalar> full = phi.with_boundary();
  const Index n = phi.n_cells();
  const auto a = full.head(n).array();
  const auto b = full.tail(n).array();
  const Scalar l2 = (phi.dx / Scalar(3)) * (a * a + a * b + b * b).sum();
  const Scalar h1 = (b - a).square().sum() / phi.dx;
  using std::sqrt;
  return sqrt(l2 + gamma * h1);
}

/// Dual norm of a load vector in the energy inner product, sqrt(b^T A^{-1} b).
template <typename Scalar>
Scalar dual_norm(const EllipticProblem<Scalar>& problem, const Vec<Scalar>& b) {
  const FemSolution<Scalar> x = solve(problem, b);
  using std::sqrt;
  using std::max;
  return sqrt(max(Scalar(0), b.dot(x.nodal)));
}

template <typename Scalar = double>
struct ConditioningReport {
  Scalar solution_rel_change = 0;  // |v - v~|_E / |v|_E
  Scalar load_rel_change = 0;      // |b - b~|_* / |b|_*
  Scalar lhs = 0;                  // |v - v~|_E |b|_*
  Scalar rhs = 0;                  // |b - b~|_* |v|_E
  Scalar constant = 0;             // lhs / rhs, 0 when both vanish
  bool holds = false;
};

/// Relative perturbation of the solution against relative perturbation of the
/// load, in the energy norm and its dual; the bound holds with constant one.
template <typename Scalar>
ConditioningReport<Scalar> conditioning_probe(const EllipticProblem<Scalar>& problem, const Vec<Scalar>& rhs,
                                              const Vec<Scalar>& perturbation, Scalar slack = Scalar(1e-10)) {
  detail::require(rhs.size() == problem.n_dof() && perturbation.size() == problem.n_dof(),
                  "vector length does not match the problem");
  detail::require(rhs.cwiseAbs().maxCoeff() > Scalar(0), "rhs must not vanish");
  const FemSolution<Scalar> v = solve(problem, rhs);
  const Vec<Scalar> perturbed_rhs = rhs + perturbation;
  const FemSolution<Scalar> v_pert = solve(problem, perturbed_rhs);
  const FemSolution<Scalar> diff{v.nodal - v_pert.nodal, v.dx};

  ConditioningReport<Scalar> r;
  const Scalar ev = energy_norm(v, problem.gamma);
  const Scalar ed = energy_norm(diff, problem.gamma);
  const Scalar bn = dual_norm(problem, rhs);
  const Scalar dn = dual_norm(problem, Vec<Scalar>(perturbed_rhs - rhs));
  r.solution_rel_change = ed / ev;
  r.load_rel_change = dn / bn;
  r.lhs = ed * bn;
  r.rhs = dn * ev;
  r.constant = r.rhs > Scalar(0) ? r.lhs / r.rhs : Scalar(0);
  r.holds = r.lhs <= (Scalar(1) + slack) * r.rhs;
  return r;
}

/// |phi|_H1 = |phi_x|_L2, a norm on the space with zero boundary values.
template <typename Scalar>
Scalar h1_seminorm(const FemSolution<Scalar>& phi) {
  return fem_derivative(phi).norm() * std::sqrt(phi.dx);
}

/// sup over the FEM space of b.phi / |phi|_H1 = sqrt(b^T K^{-1} b), K the stiffness matrix.
template <typename Scalar>
Scalar h1_dual_norm(const Grid<Scalar>& grid, const Vec<Scalar>& b) {
  const Index n = grid.n_cells() - 1;
  detail::require(b.size() == n, "load length does not match the grid");
  const Scalar dx = grid.dx();
  const Vec<Scalar> off = Vec<Scalar>::Constant(std::max<Index>(n - 1, 0), Scalar(-1) / dx);
  const Vec<Scalar> diag = Vec<Scalar>::Constant(n, Scalar(2) / dx);
  using std::sqrt;
  using std::max;
  return sqrt(max(Scalar(0), b.dot(thomas_solve(off, diag, off, b))));
}

/// The same perturbation experiment framed in H1_0 and its dual, where the
/// relative bound carries the factor M / gamma = 1 + C_PF^2 / gamma.
template <typename Scalar>
ConditioningReport<Scalar> h1_conditioning_probe(const EllipticProblem<Scalar>& problem, const Vec<Scalar>& rhs,
                                                 const Vec<Scalar>& perturbation, Scalar slack = Scalar(1e-10)) {
  detail::require(problem.gamma > Scalar(0), "gamma must be positive");
  detail::require(rhs.size() == problem.n_dof() && perturbation.size() == problem.n_dof(),
                  "vector length does not match the problem");
  detail::require(rhs.cwiseAbs().maxCoeff() > Scalar(0), "rhs must not vanish");
  const FemSolution<Scalar> v = solve(problem, rhs);
  const Vec<Scalar> perturbed_rhs = rhs + perturbation;
  const FemSolution<Scalar> v_pert = solve(problem, perturbed_rhs);
  const FemSolution<Scalar> diff{v.nodal - v_pert.nodal, v.dx};
  const Scalar factor = problem.boundedness_const() / problem.gamma;

  ConditioningReport<Scalar> r;
  const Scalar nv = h1_seminorm(v);
  const Scalar nd = h1_seminorm(diff);
  const Scalar bn = h1_dual_norm(problem.grid, rhs);
  const Scalar dn = h1_dual_norm(problem.grid, Vec<Scalar>(perturbed_rhs - rhs));
  r.solution_rel_change = nd / nv;
  r.load_rel_change = dn / bn;
  r.lhs = nd * bn;
  r.rhs = factor * dn * nv;
  r.constant = r.rhs > Scalar(0) ? r.lhs / r.rhs : Scalar(0);
  r.holds = r.lhs <= (Scalar(1) + slack) * r.rhs;
  return r;
}

}  // namespace apfem
