#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <apfem/model.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

using namespace apfem;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double mach = std::numeric_limits<double>::epsilon();

}  // namespace

TEST_CASE("make_grid lays out uniform cells") {
  const Grid<double> g4 = make_grid(4);
  CHECK(g4.dx() == 0.25);
  CHECK(g4.midpoints()[0] == 0.125);
  CHECK(g4.midpoints()[1] == 0.375);
  CHECK(g4.midpoints()[2] == 0.625);
  CHECK(g4.midpoints()[3] == 0.875);
  CHECK(g4.edges().size() == 5);

  const Grid<double> g2 = make_grid(2);
  CHECK(g2.dx() == 0.5);
  CHECK(g2.midpoints()[0] == 0.25);
  CHECK(g2.midpoints()[1] == 0.75);

  CHECK_THROWS_AS(make_grid(1), InvalidArgument);
  CHECK_THROWS_AS(make_grid(0), InvalidArgument);
  CHECK_THROWS_AS(make_grid<double>(4, {1.0, 1.0}), InvalidArgument);
  CHECK_THROWS_AS(make_grid<double>(4, {1.0, 0.0}), InvalidArgument);
}

TEST_CASE("grid invariants on random layouts") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> cells(2, 500);
  std::uniform_real_distribution<double> left(-5.0, 5.0), width(1e-3, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double a = left(rng);
    const double b = a + width(rng);
    const Grid<double> g(cells(rng), {a, b});
    CHECK(g.dx() == (b - a) / double(g.n_cells()));
    CHECK(g.edges()[0] == a);
    CHECK(g.edges()[g.n_cells()] == b);
    for (Index i = 0; i < g.n_cells(); ++i) CHECK(g.midpoints()[i] == g.edges()[i] + g.dx() / 2);
  }
}

TEST_CASE("flux_split examples") {
  const SplitFlux<double> one = flux_split(1.0);
  const Vec2<double> w(0.3, -2.0);
  CHECK(one.stiff(w).isZero(0));
  CHECK(one.nonstiff(w) == one.total(w));

  const SplitFlux<double> s = flux_split(0.1);
  const Vec2<double> ones(1.0, 1.0);
  CHECK(s.nonstiff(ones)[0] == doctest::Approx(-0.1).epsilon(1e-15));
  CHECK(s.nonstiff(ones)[1] == doctest::Approx(-10.0).epsilon(1e-15));
  CHECK(s.stiff(ones)[0] == doctest::Approx(-0.9).epsilon(1e-15));
  CHECK(s.stiff(ones)[1] == doctest::Approx(-90.0).epsilon(1e-15));
  CHECK(s.total(ones)[0] == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(s.total(ones)[1] == doctest::Approx(-100.0).epsilon(1e-15));

  const SplitFlux<double> half = flux_split(0.5);
  CHECK(half.nonstiff_speed() == 1.0);
  CHECK(half.stiff_speed() == 1.0);

  CHECK_THROWS_AS(flux_split(0.0), InvalidArgument);
  CHECK_THROWS_AS(flux_split(-0.1), InvalidArgument);
  CHECK_THROWS_AS(flux_split(1.0 + 1e-12), InvalidArgument);
}

TEST_CASE("splitting identity on a million random samples") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(-1.0, 1.0), log_eps(-10.0, 0.0), log_mag(-6.0, 6.0);
  double worst = 0;
  for (int k = 0; k < 1000000; ++k) {
    const SplitFlux<double> s(std::pow(10.0, log_eps(rng)));
    const Vec2<double> w(unit(rng) * std::pow(10.0, log_mag(rng)), unit(rng) * std::pow(10.0, log_mag(rng)));
    const Vec2<double> f = s.total(w);
    const Vec2<double> r = s.nonstiff(w) + s.stiff(w) - f;
    for (int c = 0; c < 2; ++c) {
      if (f[c] != 0.0) worst = std::max(worst, std::abs(r[c]) / std::abs(f[c]));
    }
  }
  CHECK(worst <= 8 * mach);
}

TEST_CASE("eigenvalue law") {
  for (double eps : {1e-1, 1e-2, 1e-4}) {
    const SplitFlux<double> s(eps);
    CHECK(s.nonstiff_speed() == 1.0);
    const double expected = (1 - eps) / eps;
    CHECK(std::abs(s.stiff_speed() - expected) <= 4 * mach * expected);
    CHECK(std::abs(s.total_speed() - 1 / eps) <= 4 * mach / eps);
    // Spectrum of the Jacobian itself is the symmetric pair.
    Eigen::EigenSolver<Mat2<double>> es(s.stiff_jacobian());
    const double l0 = es.eigenvalues()[0].real(), l1 = es.eigenvalues()[1].real();
    CHECK(std::abs(std::max(l0, l1) - expected) <= 8 * mach * expected);
    CHECK(std::abs(std::min(l0, l1) + expected) <= 8 * mach * expected);
  }
}

TEST_CASE("splitting admissibility") {
  const SplitFlux<double> family = flux_split(0.5);

  const AdmissibilityReport towards_one = check_splitting_admissible(family, {0.9, 0.99});
  CHECK(towards_one.nonstiff_residual_decreasing_towards_one);
  CHECK(towards_one.samples[1].nonstiff_residual < towards_one.samples[0].nonstiff_residual);
  CHECK(towards_one.pass());

  // eps^2 (f_tilde - f)(1, 1) = (eps^3, eps) evaluated by hand.
  const AdmissibilityReport towards_zero = check_splitting_admissible(family, {1e-2, 1e-4});
  for (const auto& s : towards_zero.samples) {
    const long double e = s.eps;
    const long double oracle = std::sqrt(e * e * e * e * e * e + e * e);
    CHECK(std::abs(s.stiff_residual - double(oracle)) <= 1e-14 * double(oracle));
    CHECK(s.stiff_residual / s.eps == doctest::Approx(1.0).epsilon(1e-6));
  }
  CHECK(towards_zero.stiff_residual_decreasing_towards_zero);
  CHECK(towards_zero.pass());

  const AdmissibilityReport half = check_splitting_admissible(family, {0.5});
  REQUIRE(half.samples.size() == 1);
  CHECK(half.samples[0].hyperbolic);
  CHECK(half.samples[0].nonstiff_order_one);
  CHECK(half.samples[0].nonstiff_approaches_total);
  CHECK(half.samples[0].stiff_limit_vanishes);

  CHECK_THROWS_AS(check_splitting_admissible(family, {1.0}), InvalidArgument);
  CHECK_THROWS_AS(check_splitting_admissible(family, {0.0}), InvalidArgument);
  CHECK_THROWS_AS(check_splitting_admissible(family, {}), InvalidArgument);
}

TEST_CASE("smooth case closed forms") {
  const auto c = case_smooth(0.1);
  CHECK(c.v(0.25, 0.0) == 0.0);
  CHECK(std::abs(c.u(0.25, 0.0)) < 1e-18);

  for (double x : {0.0, 0.1, 0.37, 0.5, 0.99}) CHECK(c.g(x, 0.0) == doctest::Approx(20 * pi).epsilon(1e-15));

  // v_t - u_x by central differences on the closed forms.
  const auto d = case_smooth(0.01);
  const double x = 0.3, t = 0.07, h = 1e-5;
  const double vt = (d.v(x, t + h) - d.v(x, t - h)) / (2 * h);
  const double ux = (d.u(x + h, t) - d.u(x - h, t)) / (2 * h);
  CHECK(std::abs(vt - ux) < 1e-8);

  CHECK_THROWS_AS(case_smooth(0.0), InvalidArgument);
  CHECK_THROWS_AS(case_smooth(1.0), InvalidArgument);
  CHECK_THROWS_AS(case_kink(1.5), InvalidArgument);
}

TEST_CASE("kink case closed forms") {
  for (double eps : {0.5, 0.1, 1e-3}) {
    const auto c = case_kink(eps);
    const double e2 = eps * eps;
    for (double t : {0.0, 0.03, 0.1}) {
      const double left_limit = e2 * t * 0.5;
      CHECK(c.v(0.5, t) == doctest::Approx(left_limit).epsilon(1e-15));
      CHECK(c.v(std::nextafter(0.5, 0.0), t) == doctest::Approx(left_limit).epsilon(1e-14));
      CHECK(c.u(0.5, t) == doctest::Approx(1 + e2 / 8).epsilon(1e-15));
      CHECK(c.u(std::nextafter(0.5, 0.0), t) == doctest::Approx(1 + e2 / 8).epsilon(1e-14));
    }
    // (0.2, 0.05): v_t = eps^2 0.2 and u_x = eps^2 0.2.
    CHECK(c.v_t(0.2, 0.05) == doctest::Approx(e2 * 0.2));
    CHECK(c.u_x(0.2, 0.05) == doctest::Approx(e2 * 0.2));
    CHECK(c.v_t(0.2, 0.05) - c.u_x(0.2, 0.05) == 0.0);
    CHECK(c.g(0.2, 0.05) == -0.05);
    CHECK(c.g(0.7, 0.05) == 0.05);
  }
}

TEST_CASE("manufactured residuals at random points") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ux(0.0, 1.0), ut(0.0, 0.1);
  for (CaseKind kind : {CaseKind::smooth, CaseKind::kink}) {
    for (double eps : {1e-1, 1e-2, 1e-4}) {
      const CaseDefinition<double> c(kind, eps);
      int sampled = 0;
      while (sampled < 100) {
        const double x = ux(rng), t = ut(rng) + 1e-3;
        if (kind == CaseKind::kink && std::abs(x - 0.5) <= 0.01) continue;
        ++sampled;
        // Analytic: v_t - u_x = 0 and u_t - v_x / eps^2 = g.
        CHECK(std::abs(c.v_t(x, t) - c.u_x(x, t)) <= 1e-15 * eps * eps);
        CHECK(std::abs(c.u_t(x, t) - c.v_x(x, t) / (eps * eps) - c.g(x, t)) <= 1e-12);
        // Finite differences of the closed forms against the stored g.
        const double hx = 1e-5, ht = 1e-6;
        const double vx = (c.v(x + hx, t) - c.v(x - hx, t)) / (2 * hx);
        const double u_t = (c.u(x, t + ht) - c.u(x, t - ht)) / (2 * ht);
        CHECK(std::abs(u_t - vx / (eps * eps) - c.g(x, t)) <= 1e-6);
        const double vt = (c.v(x, t + ht) - c.v(x, t - ht)) / (2 * ht);
        const double u_x = (c.u(x + hx, t) - c.u(x - hx, t)) / (2 * hx);
        CHECK(std::abs(vt - u_x) <= 1e-6);
      }
    }
  }
}

TEST_CASE("v vanishes on the boundary") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ut(0.0, 10.0);
  for (CaseKind kind : {CaseKind::smooth, CaseKind::kink}) {
    const CaseDefinition<double> c(kind, 0.3);
    for (int k = 0; k < 100; ++k) {
      const double t = ut(rng);
      CHECK(std::abs(c.v(0.0, t)) <= 1e-15);
      CHECK(std::abs(c.v(1.0, t)) <= 1e-15);
    }
  }
}

TEST_CASE("sampling at midpoints") {
  const Grid<double> g = make_grid(8);
  const auto c = case_smooth(0.2);
  const State<double> s = c.sample(g, 0.04);
  CHECK(s.time == 0.04);
  check_matches(s, g);
  for (Index i = 0; i < 8; ++i) {
    CHECK(s.v[i] == c.v(g.midpoints()[i], 0.04));
    CHECK(s.u[i] == c.u(g.midpoints()[i], 0.04));
  }
  const State<double> back = State<double>::from_stacked(s.stacked(), s.time);
  CHECK(back.v == s.v);
  CHECK(back.u == s.u);
  CHECK_THROWS_AS(check_matches(State<double>::zero(7), g), InvalidArgument);
}
