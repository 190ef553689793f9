#pragma once

// Linearized p-system
//   v_t - u_x = 0,   u_t - v_x / eps^2 = g,   v = 0 on the boundary,
// its flux splitting, the uniform cell grid, and the manufactured test cases.

#include <apfem/types.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string_view>
#include <vector>

namespace apfem {

template <typename Scalar = double>
struct Interval {
  Scalar left = Scalar(0);
  Scalar right = Scalar(1);

  Scalar length() const { return right - left; }
};

/// Uniform partition of an interval into cells with midpoints.
template <typename Scalar = double>
class Grid {
 public:
  Grid(Index n_cells, Interval<Scalar> domain) : n_cells_(n_cells), domain_(domain) {
    detail::require(n_cells >= 2, "grid needs at least 2 cells");
    detail::require(std::isfinite(double(domain.left)) && std::isfinite(double(domain.right)) &&
                        domain.right > domain.left,
                    "grid domain must be a nonempty finite interval");
    dx_ = domain.length() / Scalar(n_cells);
    edges_.resize(n_cells + 1);
    for (Index i = 0; i <= n_cells; ++i) edges_[i] = domain.left + Scalar(i) * dx_;
    edges_[n_cells] = domain.right;
    midpoints_ = edges_.head(n_cells).array() + dx_ / Scalar(2);
  }

  Index n_cells() const { return n_cells_; }
  Scalar dx() const { return dx_; }
  const Interval<Scalar>& domain() const { return domain_; }
  const Vec<Scalar>& edges() const { return edges_; }
  const Vec<Scalar>& midpoints() const { return midpoints_; }

 private:
  Index n_cells_;
  Interval<Scalar> domain_;
  Scalar dx_;
  Vec<Scalar> edges_;
  Vec<Scalar> midpoints_;
};

template <typename Scalar = double>
Grid<Scalar> make_grid(Index n_cells, Interval<Scalar> domain = {}) {
  return Grid<Scalar>(n_cells, domain);
}

/// Cell values of (v, u) at one time level.
template <typename Scalar = double>
struct State {
  Vec<Scalar> v;
  Vec<Scalar> u;
  Scalar time = Scalar(0);

  static State zero(Index n_cells, Scalar time = Scalar(0)) {
    return {Vec<Scalar>::Zero(n_cells), Vec<Scalar>::Zero(n_cells), time};
  }

  Index size() const { return v.size(); }
  bool all_finite() const { return v.allFinite() && u.allFinite(); }

  Field2<Scalar> stacked() const {
    Field2<Scalar> w(2, v.size());
    w.row(0) = v.transpose();
    w.row(1) = u.transpose();
    return w;
  }

  static State from_stacked(const Field2<Scalar>& w, Scalar time) {
    return {w.row(0).transpose(), w.row(1).transpose(), time};
  }
};

template <typename Scalar>
void check_matches(const State<Scalar>& state, const Grid<Scalar>& grid) {
  detail::require(state.v.size() == grid.n_cells() && state.u.size() == grid.n_cells(),
                  "state length does not match the grid");
}

/// f = f_hat + f_tilde with alpha(eps) = beta(eps) = eps:
///   f(w)       = (-u, -v/eps^2)
///   f_hat(w)   = (-eps u, -v/eps)
///   f_tilde(w) = (-(1-eps) u, -(1-eps) v/eps^2)
/// All three are linear, f(w) = J w with J = [[0, -a], [-b, 0]].
template <typename Scalar = double>
class SplitFlux {
 public:
  explicit SplitFlux(Scalar eps) : eps_(eps) {
    detail::require(eps > Scalar(0) && eps <= Scalar(1), "eps must lie in (0, 1]");
  }

  Scalar eps() const { return eps_; }

  Mat2<Scalar> total_jacobian() const { return jacobian(Scalar(1), Scalar(1) / (eps_ * eps_)); }
  Mat2<Scalar> nonstiff_jacobian() const { return jacobian(eps_, Scalar(1) / eps_); }
  Mat2<Scalar> stiff_jacobian() const {
    return jacobian(Scalar(1) - eps_, (Scalar(1) - eps_) / (eps_ * eps_));
  }

  Vec2<Scalar> total(const Vec2<Scalar>& w) const { return total_jacobian() * w; }
  Vec2<Scalar> nonstiff(const Vec2<Scalar>& w) const { return nonstiff_jacobian() * w; }
  Vec2<Scalar> stiff(const Vec2<Scalar>& w) const { return stiff_jacobian() * w; }

  // Positive eigenvalue of each Jacobian; the other one is its negative.
  Scalar total_speed() const { return speed(total_jacobian()); }
  Scalar nonstiff_speed() const { return speed(nonstiff_jacobian()); }
  Scalar stiff_speed() const { return speed(stiff_jacobian()); }

 private:
  static Mat2<Scalar> jacobian(Scalar a, Scalar b) {
    Mat2<Scalar> j;
    j << Scalar(0), -a, -b, Scalar(0);
    return j;
  }
  static Scalar speed(const Mat2<Scalar>& j) {
    using std::sqrt;
    return sqrt(j(0, 1) * j(1, 0));
  }

  Scalar eps_;
};

template <typename Scalar = double>
SplitFlux<Scalar> flux_split(Scalar eps) {
  return SplitFlux<Scalar>(eps);
}

struct AdmissibilitySample {
  double eps = 0;
  bool hyperbolic = false;       // both Jacobians: real, distinct eigenvalues
  bool nonstiff_order_one = false;
  double nonstiff_residual = 0;  // |f_hat(w) - f(w)| at the probe state
  bool nonstiff_approaches_total = false;
  double stiff_residual = 0;     // |eps^2 (f_tilde(w) - f(w))| at the probe state
  bool stiff_limit_vanishes = false;

  bool pass() const {
    return hyperbolic && nonstiff_order_one && nonstiff_approaches_total && stiff_limit_vanishes;
  }
};

struct AdmissibilityReport {
  std::vector<AdmissibilitySample> samples;
  // Residual sequences ordered by ascending eps.
  bool nonstiff_residual_decreasing_towards_one = true;
  bool stiff_residual_decreasing_towards_zero = true;

  bool pass() const {
    if (!nonstiff_residual_decreasing_towards_one || !stiff_residual_decreasing_towards_zero) {
      return false;
    }
    for (const auto& s : samples) {
      if (!s.pass()) return false;
    }
    return true;
  }
};

namespace detail {

inline bool real_distinct_eigenvalues(const Mat2<double>& j) {
  Eigen::EigenSolver<Mat2<double>> solver(j, false);
  const auto ev = solver.eigenvalues();
  const double scale = std::max(1.0, j.cwiseAbs().maxCoeff());
  const double tol = 64 * std::numeric_limits<double>::epsilon() * scale;
  return std::abs(ev[0].imag()) <= tol && std::abs(ev[1].imag()) <= tol &&
         std::abs(ev[0].real() - ev[1].real()) > tol;
}

}  // namespace detail

/// Numerical check of the four admissibility properties of the splitting
/// family at each sampled eps. The `split` argument fixes the family; each
/// sample is evaluated on its own member flux_split(eps).
inline AdmissibilityReport check_splitting_admissible(const SplitFlux<double>& split,
                                                      const std::vector<double>& eps_samples) {
  (void)split;
  detail::require(!eps_samples.empty(), "need at least one eps sample");
  for (double e : eps_samples) {
    detail::require(e > 0.0 && e < 1.0, "admissibility samples must lie in (0, 1)");
  }
  const Vec2<double> probe(1.0, 1.0);
  auto nonstiff_residual = [&](double e) {
    const SplitFlux<double> s(e);
    return (s.nonstiff(probe) - s.total(probe)).norm();
  };
  auto stiff_residual = [&](double e) {
    const SplitFlux<double> s(e);
    return (e * e * (s.stiff(probe) - s.total(probe))).norm();
  };

  AdmissibilityReport report;
  for (double e : eps_samples) {
    const SplitFlux<double> s(e);
    AdmissibilitySample sample;
    sample.eps = e;
    sample.hyperbolic = detail::real_distinct_eigenvalues(s.nonstiff_jacobian()) &&
                        detail::real_distinct_eigenvalues(s.stiff_jacobian());
    sample.nonstiff_order_one = std::abs(s.nonstiff_speed() - 1.0) <= 4 * std::numeric_limits<double>::epsilon();
    sample.nonstiff_residual = nonstiff_residual(e);
    sample.nonstiff_approaches_total = nonstiff_residual(0.5 * (1.0 + e)) < sample.nonstiff_residual;
    sample.stiff_residual = stiff_residual(e);
    sample.stiff_limit_vanishes = stiff_residual(0.5 * e) < sample.stiff_residual;
    report.samples.push_back(sample);
  }

  std::vector<AdmissibilitySample> sorted = report.samples;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.eps < b.eps; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].eps == sorted[i - 1].eps) continue;
    if (!(sorted[i].nonstiff_residual < sorted[i - 1].nonstiff_residual)) {
      report.nonstiff_residual_decreasing_towards_one = false;
    }
    if (!(sorted[i - 1].stiff_residual < sorted[i].stiff_residual)) {
      report.stiff_residual_decreasing_towards_zero = false;
    }
  }
  return report;
}

enum class CaseKind { smooth, kink };

inline std::string_view to_string(CaseKind kind) {
  return kind == CaseKind::smooth ? "smooth" : "kink";
}

/// Manufactured solution (v, u) of the p-system with forcing g = u_t - v_x / eps^2.
///
/// smooth: v = eps^2 t sin(2 pi x),  u = sin(20 pi t) - eps^2 cos(2 pi x) / (2 pi),
///         g = 20 pi cos(20 pi t) - 2 pi t cos(2 pi x)
/// kink:   v = eps^2 t hat(x),       u = 1 + eps^2 q(x),  g = -t (x < 1/2), +t (x >= 1/2)
///         with hat = x | 1-x and q = x^2/2 | -x^2/2 + x - 1/4.
template <typename Scalar = double>
class CaseDefinition {
 public:
  CaseDefinition(CaseKind kind, Scalar eps) : kind_(kind), eps_(eps) {
    detail::require(eps > Scalar(0) && eps < Scalar(1), "case eps must lie in (0, 1)");
  }

  CaseKind kind() const { return kind_; }
  std::string_view name() const { return to_string(kind_); }
  Scalar eps() const { return eps_; }

  Scalar v(Scalar x, Scalar t) const {
    const Scalar e2 = eps_ * eps_;
    if (kind_ == CaseKind::smooth) return e2 * t * std::sin(two_pi() * x);
    return e2 * t * (left(x) ? x : Scalar(1) - x);
  }

  Scalar u(Scalar x, Scalar t) const {
    const Scalar e2 = eps_ * eps_;
    if (kind_ == CaseKind::smooth) {
      return std::sin(Scalar(10) * two_pi() * t) - e2 / two_pi() * std::cos(two_pi() * x);
    }
    return Scalar(1) + e2 * (left(x) ? x * x / Scalar(2) : -x * x / Scalar(2) + x - Scalar(0.25));
  }

  Scalar g(Scalar x, Scalar t) const {
    if (kind_ == CaseKind::smooth) {
      return Scalar(10) * two_pi() * std::cos(Scalar(10) * two_pi() * t) - two_pi() * t * std::cos(two_pi() * x);
    }
    return left(x) ? -t : t;
  }

  // Classical derivatives; at the kink the right branch is used.
  Scalar v_x(Scalar x, Scalar t) const {
    const Scalar e2 = eps_ * eps_;
    if (kind_ == CaseKind::smooth) return e2 * t * two_pi() * std::cos(two_pi() * x);
    return e2 * t * (left(x) ? Scalar(1) : Scalar(-1));
  }

  Scalar u_x(Scalar x, Scalar /*t*/) const {
    const Scalar e2 = eps_ * eps_;
    if (kind_ == CaseKind::smooth) return e2 * std::sin(two_pi() * x);
    return e2 * (left(x) ? x : Scalar(1) - x);
  }

  Scalar v_t(Scalar x, Scalar /*t*/) const {
    const Scalar e2 = eps_ * eps_;
    if (kind_ == CaseKind::smooth) return e2 * std::sin(two_pi() * x);
    return e2 * (left(x) ? x : Scalar(1) - x);
  }

  Scalar u_t(Scalar /*x*/, Scalar t) const {
    if (kind_ == CaseKind::smooth) return Scalar(10) * two_pi() * std::cos(Scalar(10) * two_pi() * t);
    return Scalar(0);
  }

  // Cellwise samples at the grid midpoints.
  State<Scalar> sample(const Grid<Scalar>& grid, Scalar t) const {
    State<Scalar> s = State<Scalar>::zero(grid.n_cells(), t);
    for (Index i = 0; i < grid.n_cells(); ++i) {
      s.v[i] = v(grid.midpoints()[i], t);
      s.u[i] = u(grid.midpoints()[i], t);
    }
    return s;
  }

  Vec<Scalar> sample_g(const Grid<Scalar>& grid, Scalar t) const {
    Vec<Scalar> out(grid.n_cells());
    for (Index i = 0; i < grid.n_cells(); ++i) out[i] = g(grid.midpoints()[i], t);
    return out;
  }

 private:
  static constexpr Scalar two_pi() { return Scalar(2) * std::numbers::pi_v<Scalar>; }
  static bool left(Scalar x) { return x < Scalar(0.5); }

  CaseKind kind_;
  Scalar eps_;
};

template <typename Scalar = double>
CaseDefinition<Scalar> case_smooth(Scalar eps) {
  return CaseDefinition<Scalar>(CaseKind::smooth, eps);
}

template <typename Scalar = double>
CaseDefinition<Scalar> case_kink(Scalar eps) {
  return CaseDefinition<Scalar>(CaseKind::kink, eps);
}

}  // namespace apfem
