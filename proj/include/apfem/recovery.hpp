#pragma once

// Piecewise-constant derivative recovery with Lax-Friedrichs-type viscosity,
// and the boundary ghost policy shared with the finite-volume baselines.

#include <apfem/model.hpp>

namespace apfem {

/// Ghost cell beyond a boundary as a linear map of the two nearest cells:
///   w_ghost = near * w_boundary + next * w_inner.
template <typename Scalar = double>
struct GhostMap {
  Mat2<Scalar> near;
  Mat2<Scalar> next;
};

struct GhostPolicy {
  enum class Kind {
    // v odd (homogeneous Dirichlet), u even (zero Neumann)
    reflection,
    // linear extrapolation of both components
    extrapolation,
  };
  Kind kind = Kind::reflection;

  template <typename Scalar = double>
  GhostMap<Scalar> map() const {
    GhostMap<Scalar> m;
    if (kind == Kind::reflection) {
      m.near << Scalar(-1), Scalar(0), Scalar(0), Scalar(1);
      m.next.setZero();
    } else {
      m.near = Scalar(2) * Mat2<Scalar>::Identity();
      m.next = -Mat2<Scalar>::Identity();
    }
    return m;
  }

  // Cell values padded with one ghost on each side (columns 0 and n+1).
  template <typename Scalar>
  Field2<Scalar> pad(const Field2<Scalar>& w) const {
    const Index n = w.cols();
    const GhostMap<Scalar> m = map<Scalar>();
    Field2<Scalar> out(2, n + 2);
    out.middleCols(1, n) = w;
    out.col(0) = m.near * w.col(0) + m.next * w.col(1);
    out.col(n + 1) = m.near * w.col(n - 1) + m.next * w.col(n - 2);
    return out;
  }
};

template <typename Scalar = double>
struct RecoveredDerivatives {
  Vec<Scalar> vx;
  Vec<Scalar> ux;
};

/// In each cell
///   vx_i = (v_{i+1} - v_{i-1}) / (2 dx) + (u_{i+1} + u_{i-1} - 2 u_i) / (2 dt)
///   ux_i = (u_{i+1} - u_{i-1}) / (2 dx) + (v_{i+1} + v_{i-1} - 2 v_i) / (2 dt)
/// dt is the step actually taken, not the nominal CFL target.
template <typename Scalar>
RecoveredDerivatives<Scalar> recover_derivatives(const State<Scalar>& state, const Grid<Scalar>& grid,
                                                 Scalar dt, const GhostPolicy& ghosts = {}) {
  check_matches(state, grid);
  detail::require(dt > Scalar(0), "dt must be positive");
  const Index n = grid.n_cells();
  const Field2<Scalar> w = ghosts.pad(state.stacked());
  const auto right = w.middleCols(2, n).array();
  const auto centre = w.middleCols(1, n).array();
  const auto left = w.leftCols(n).array();

  const Scalar inv_2dx = Scalar(1) / (Scalar(2) * grid.dx());
  const Scalar inv_2dt = Scalar(1) / (Scalar(2) * dt);
  RecoveredDerivatives<Scalar> out;
  out.vx = ((right.row(0) - left.row(0)) * inv_2dx +
            ((right.row(1) - centre.row(1)) - (centre.row(1) - left.row(1))) * inv_2dt)
               .transpose();
  out.ux = ((right.row(1) - left.row(1)) * inv_2dx +
            ((right.row(0) - centre.row(0)) - (centre.row(0) - left.row(0))) * inv_2dt)
               .transpose();
  return out;
}

}  // namespace apfem
