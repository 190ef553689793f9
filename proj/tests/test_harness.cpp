#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <apfem/harness.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <tuple>

using namespace apfem;

namespace {

std::string csv_of(const std::vector<ErrorRecord>& records) {
  std::ostringstream out;
  emit_csv(records, out);
  return out.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

std::vector<std::string> fields_of(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

StudySpec golden_spec() {
  StudySpec spec;
  spec.eps_list = {1e-1, 1e-8};
  spec.nx_list = {16, 32, 64};
  return spec;
}

}  // namespace

TEST_CASE("l2_error examples") {
  const Grid<double> grid = make_grid(50);
  const auto cas = case_smooth(0.1);
  const State<double> exact = cas.sample(grid, 0.07);
  const auto zero = l2_error(exact, cas, grid);
  CHECK(zero.v == 0.0);
  CHECK(zero.u == 0.0);
  CHECK(zero.combined == 0.0);

  State<double> shifted = exact;
  shifted.v.array() += 0.3;
  const auto e = l2_error(shifted, cas, grid);
  CHECK(e.v == doctest::Approx(0.3).epsilon(1e-13));
  CHECK(e.u == 0.0);
  CHECK(e.combined == doctest::Approx(0.3).epsilon(1e-13));

  std::mt19937_64 rng(8);
  std::normal_distribution<double> d(0.0, 1.0);
  State<double> noisy = exact;
  double sum = 0;
  for (Index i = 0; i < 50; ++i) {
    const double p = d(rng);
    noisy.v[i] += p;
    sum += p * p;
  }
  CHECK(l2_error(noisy, cas, grid).v == doctest::Approx(std::sqrt(0.02 * sum)).epsilon(1e-12));

  State<double> both = exact;
  both.v.array() += 0.3;
  both.u.array() -= 0.4;
  CHECK(l2_error(both, cas, grid).combined == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("observed_order examples") {
  auto o = observed_order({{64, 1e-3}, {128, 5e-4}});
  REQUIRE(o.size() == 1);
  CHECK(*o[0] == doctest::Approx(1.0));
  o = observed_order({{64, 1e-3}, {128, 2.5e-4}});
  CHECK(*o[0] == doctest::Approx(2.0));
  o = observed_order({{16, 1e-3}, {32, 0.0}, {64, 1e-5}, {128, std::nan("")}});
  REQUIRE(o.size() == 3);
  CHECK_FALSE(o[0].has_value());
  CHECK_FALSE(o[1].has_value());
  CHECK_FALSE(o[2].has_value());
  o = observed_order({{10, 1e-2}, {30, 1e-2 / 9}});
  CHECK(*o[0] == doctest::Approx(2.0));
  CHECK_THROWS_AS(observed_order({{64, 1e-3}}), InvalidArgument);
  CHECK_THROWS_AS(observed_order({{64, 1e-3}, {64, 1e-4}}), InvalidArgument);
}

TEST_CASE("study spec validation") {
  StudySpec spec;
  CHECK_NOTHROW(spec.validate());
  spec.nx_list = {64, 32};
  CHECK_THROWS_AS(spec.validate(), InvalidArgument);
  spec = StudySpec{};
  spec.eps_list = {1.0};
  CHECK_THROWS_AS(spec.validate(), InvalidArgument);
  spec = StudySpec{};
  spec.schemes.clear();
  CHECK_THROWS_AS(spec.validate(), InvalidArgument);
  spec = StudySpec{};
  spec.cfl_hat = 1.2;
  CHECK_THROWS_AS(run_study(spec), InvalidArgument);
}

TEST_CASE("a single triple gives a single record") {
  StudySpec spec;
  spec.schemes = {SchemeKind::imex};
  spec.eps_list = {1e-2};
  spec.nx_list = {64};
  const auto records = run_study(spec);
  REQUIRE(records.size() == 1);
  const ErrorRecord& r = records.front();
  CHECK(r.scheme == SchemeKind::imex);
  CHECK(r.eps == 1e-2);
  CHECK(r.nx == 64);
  CHECK(r.dt == 0.0125);
  CHECK_FALSE(r.observed_order.has_value());
  CHECK(r.flags.empty());
  CHECK(r.err_combined == doctest::Approx(std::hypot(r.err_v, r.err_u)));

  const auto lines = lines_of(csv_of(records));
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == csv_header);
  const auto f = fields_of(lines[1]);
  REQUIRE(f.size() == 10);
  CHECK(f[8].empty());
  CHECK(f[9].empty());
}

TEST_CASE("study rows are ordered by scheme, eps, nx whatever the input order") {
  StudySpec spec;
  spec.schemes = {SchemeKind::imex, SchemeKind::ap};
  spec.eps_list = {1e-2, 1e-1};
  spec.nx_list = {8, 16};
  const auto records = run_study(spec, 3);
  REQUIRE(records.size() == 8);
  for (std::size_t k = 1; k < records.size(); ++k) {
    const auto& a = records[k - 1];
    const auto& b = records[k];
    CHECK(std::tie(a.scheme, a.eps, a.nx) < std::tie(b.scheme, b.eps, b.nx));
  }
  CHECK(records.front().scheme == SchemeKind::ap);
  CHECK(records.front().eps == 1e-2);
}

TEST_CASE("CSV is deterministic across reruns and thread counts") {
  const StudySpec spec = golden_spec();
  const std::string one = csv_of(run_study(spec, 1));
  CHECK(one == csv_of(run_study(spec, 1)));
  CHECK(one == csv_of(run_study(spec, 4)));
  CHECK(one == csv_of(run_study(spec, 17)));
}

TEST_CASE("CSV matches the golden file") {
  const std::string expected = read_file(std::filesystem::path(APFEM_TEST_DATA) / "golden_study.csv");
  REQUIRE_FALSE(expected.empty());
  CHECK(csv_of(run_study(golden_spec(), 2)) == expected);
}

TEST_CASE("CSV format rules") {
  const auto records = run_study(golden_spec());
  const std::string text = csv_of(records);
  CHECK(text.find('\r') == std::string::npos);
  CHECK(text.find("nan") == std::string::npos);
  CHECK(text.find("NaN") == std::string::npos);
  const auto lines = lines_of(text);
  REQUIRE(lines.size() == records.size() + 1);
  for (std::size_t k = 0; k < records.size(); ++k) {
    const auto f = fields_of(lines[k + 1]);
    REQUIRE(f.size() == 10);
    // every float reads back to the same double
    double err = 0;
    std::from_chars(f[7].data(), f[7].data() + f[7].size(), err);
    CHECK(err == records[k].err_combined);
    if (records[k].scheme == SchemeKind::implicit_euler && records[k].eps == 1e-8) {
      CHECK(f[9] == "ill_conditioned");
    }
  }

  ErrorRecord failed;
  failed.nx = 8;
  failed.dt = 0.1;
  failed.err_v = failed.err_u = failed.err_combined = std::numeric_limits<double>::quiet_NaN();
  failed.flags = {"numerical_failure", "ill_conditioned"};
  const auto f = fields_of(lines_of(csv_of({failed}))[1]);
  CHECK(f[5].empty());
  CHECK(f[7].empty());
  CHECK(f[9] == "numerical_failure;ill_conditioned");

  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1e-8) == "1e-08");
  CHECK(format_double(0.0125) == "0.0125");
  CHECK_THROWS_AS(csv_of({}), InvalidArgument);
}

TEST_CASE("write_csv reports the path on failure") {
  const auto records = run_study(golden_spec());
  const auto dir = std::filesystem::temp_directory_path() / "apfem_test_harness";
  std::filesystem::create_directories(dir);
  write_csv(records, dir / "out.csv");
  CHECK(read_file(dir / "out.csv") == csv_of(records));
  try {
    write_csv(records, dir / "missing" / "out.csv");
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("missing") != std::string::npos);
  }
}

TEST_CASE("plot tables hold one nx error table per scheme and eps") {
  const auto records = run_study(golden_spec());
  const auto dir = std::filesystem::temp_directory_path() / "apfem_test_plots";
  std::filesystem::remove_all(dir);
  const auto written = write_plot_tables(records, dir);
  CHECK(written.size() == 6);
  const std::string text = read_file(dir / "ap_smooth_eps0.1.dat");
  const auto lines = lines_of(text);
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "nx error");
  CHECK(lines[1] == "16 " + format_double(records[3].err_combined));
}

TEST_CASE("smooth case errors shrink under refinement past N = 16") {
  // Errors at the rounding floor fluctuate and are left out.
  StudySpec spec;
  spec.nx_list = {16, 32, 64, 128, 256, 512, 1024};
  const auto records = run_study(spec, 2);
  int compared = 0;
  for (std::size_t k = 1; k < records.size(); ++k) {
    const auto& a = records[k - 1];
    const auto& b = records[k];
    if (a.scheme != b.scheme || a.eps != b.eps || a.nx <= 16) continue;
    if (!a.flags.empty() || !b.flags.empty()) continue;
    if (a.err_combined < 1e-13) continue;
    CHECK(b.err_combined <= a.err_combined);
    ++compared;
  }
  CHECK(compared >= 40);
}

TEST_CASE("AP orders at eps = 1e-2 beyond N = 16") {
  StudySpec spec;
  spec.schemes = {SchemeKind::ap};
  spec.eps_list = {1e-2};
  spec.nx_list = {64, 128, 256, 512, 1024};
  const auto records = run_study(spec);
  for (std::size_t k = 1; k < records.size(); ++k) {
    REQUIRE(records[k].observed_order.has_value());
    CHECK(*records[k].observed_order >= 0.8);
    CHECK(*records[k].observed_order <= 2.2);
  }
}
