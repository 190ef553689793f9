#pragma once

// Convergence studies: error metrics, observed orders, the study runner and
// CSV / plot-table output.

#include <apfem/schemes.hpp>

#include <cmath>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace apfem {

template <typename Scalar = double>
struct ErrorNorms {
  Scalar v = 0;
  Scalar u = 0;
  Scalar combined = 0;
};

/// Discrete l2 errors sqrt(dx sum_i (w_i - w_exact(x_i, t))^2) against the
/// exact solution at the midpoints and at the state's time.
template <typename Scalar>
ErrorNorms<Scalar> l2_error(const State<Scalar>& state, const CaseDefinition<Scalar>& cas, const Grid<Scalar>& grid) {
  check_matches(state, grid);
  const State<Scalar> exact = cas.sample(grid, state.time);
  using std::sqrt;
  using std::hypot;
  ErrorNorms<Scalar> e;
  e.v = sqrt(grid.dx()) * (state.v - exact.v).norm();
  e.u = sqrt(grid.dx()) * (state.u - exact.u).norm();
  e.combined = hypot(e.v, e.u);
  return e;
}

/// log(e_k / e_{k+1}) / log(N_{k+1} / N_k) for each adjacent pair, i.e.
/// log2 of the error ratio when N doubles. Pairs with a zero or non-finite
/// error have no order.
std::vector<std::optional<double>> observed_order(const std::vector<std::pair<Index, double>>& errors);

struct StudySpec {
  std::vector<SchemeKind> schemes{SchemeKind::ap, SchemeKind::implicit_euler, SchemeKind::imex};
  CaseKind case_kind = CaseKind::smooth;
  std::vector<double> eps_list{1e-1, 1e-2, 1e-4, 1e-8};
  std::vector<Index> nx_list{2, 4, 8, 16, 32, 64, 128, 256, 512, 1024, 2048, 4096};
  double cfl_hat = 0.8;
  double t_final = 0.1;
  SchemeOptions options{};

  void validate() const;
};

struct ErrorRecord {
  SchemeKind scheme = SchemeKind::ap;
  CaseKind case_kind = CaseKind::smooth;
  double eps = 0;
  Index nx = 0;
  double dt = 0;
  double err_v = 0;
  double err_u = 0;
  double err_combined = 0;
  std::optional<double> observed_order;
  std::vector<std::string> flags;

  bool has_flag(const std::string& flag) const;
};

/// Runs every (scheme, eps, nx) cell, on `threads` workers when > 1. Records
/// come back sorted by scheme, then ascending eps, then ascending nx, whatever
/// the execution order. A failed run yields a flagged record.
std::vector<ErrorRecord> run_study(const StudySpec& spec, unsigned threads = 1);

/// Shortest decimal string that reads back to the same double.
std::string format_double(double value);

inline constexpr const char* csv_header = "scheme,case,eps,nx,dt,err_v,err_u,err_combined,observed_order,flags";

void emit_csv(const std::vector<ErrorRecord>& records, std::ostream& out);
void write_csv(const std::vector<ErrorRecord>& records, const std::filesystem::path& path);

/// One whitespace table `nx error` per (scheme, eps), holding err_combined of
/// every record with finite errors. Returns the files written.
std::vector<std::filesystem::path> write_plot_tables(const std::vector<ErrorRecord>& records,
                                                     const std::filesystem::path& directory);

}  // namespace apfem
