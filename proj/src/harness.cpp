#include <apfem/harness.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

namespace apfem {

std::vector<std::optional<double>> observed_order(const std::vector<std::pair<Index, double>>& errors) {
  detail::require(errors.size() >= 2, "observed order needs at least two points");
  std::vector<std::optional<double>> orders;
  orders.reserve(errors.size() - 1);
  for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
    const auto [n0, e0] = errors[k];
    const auto [n1, e1] = errors[k + 1];
    detail::require(n1 > n0, "grid sizes must be strictly increasing");
    if (!(e0 > 0.0) || !(e1 > 0.0) || !std::isfinite(e0) || !std::isfinite(e1)) {
      orders.emplace_back();
      continue;
    }
    orders.emplace_back(std::log(e0 / e1) / std::log(double(n1) / double(n0)));
  }
  return orders;
}

void StudySpec::validate() const {
  detail::require(!schemes.empty(), "study needs at least one scheme");
  detail::require(!eps_list.empty(), "study needs at least one eps");
  detail::require(!nx_list.empty(), "study needs at least one grid size");
  for (double e : eps_list) detail::require(e > 0.0 && e < 1.0, "eps values must lie in (0, 1)");
  for (std::size_t i = 0; i < nx_list.size(); ++i) {
    detail::require(nx_list[i] >= 2, "grid sizes must be at least 2");
    if (i > 0) detail::require(nx_list[i] > nx_list[i - 1], "nx_list must be strictly increasing");
  }
  detail::require(cfl_hat > 0.0 && cfl_hat < 1.0, "cfl_hat must lie in (0, 1)");
  detail::require(t_final > 0.0 && std::isfinite(t_final), "t_final must be positive and finite");
}

bool ErrorRecord::has_flag(const std::string& flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

namespace {

ErrorRecord run_cell(const StudySpec& spec, SchemeKind scheme, double eps, Index nx) {
  SchemeConfig config;
  config.kind = scheme;
  config.eps = eps;
  config.cfl_hat = spec.cfl_hat;
  config.t_final = spec.t_final;
  config.case_kind = spec.case_kind;
  config.n_cells = nx;
  config.options = spec.options;

  ErrorRecord rec;
  rec.scheme = scheme;
  rec.case_kind = spec.case_kind;
  rec.eps = eps;
  rec.nx = nx;
  const Grid<double> grid = make_grid(nx);
  rec.dt = spec.t_final / double(step_count(spec.t_final, spec.cfl_hat * grid.dx()));
  try {
    const RunResult<double> result = run<double>(config);
    const ErrorNorms<double> e = l2_error(result.final_state, CaseDefinition<double>(spec.case_kind, eps), grid);
    rec.dt = result.dt_used;
    rec.err_v = e.v;
    rec.err_u = e.u;
    rec.err_combined = e.combined;
    rec.flags = result.flags;
  } catch (const NumericalError&) {
    rec.err_v = rec.err_u = rec.err_combined = std::numeric_limits<double>::quiet_NaN();
    rec.flags.emplace_back("numerical_failure");
  }
  return rec;
}

}  // namespace

std::vector<ErrorRecord> run_study(const StudySpec& spec, unsigned threads) {
  spec.validate();
  std::vector<SchemeKind> schemes = spec.schemes;
  std::sort(schemes.begin(), schemes.end());
  schemes.erase(std::unique(schemes.begin(), schemes.end()), schemes.end());
  std::vector<double> eps_list = spec.eps_list;
  std::sort(eps_list.begin(), eps_list.end());
  eps_list.erase(std::unique(eps_list.begin(), eps_list.end()), eps_list.end());

  std::vector<std::tuple<SchemeKind, double, Index>> cells;
  for (SchemeKind s : schemes) {
    for (double e : eps_list) {
      for (Index n : spec.nx_list) cells.emplace_back(s, e, n);
    }
  }

  std::vector<ErrorRecord> records(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < cells.size(); k = next++) {
      const auto& [s, e, n] = cells[k];
      records[k] = run_cell(spec, s, e, n);
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(threads, unsigned(cells.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // Orders against the previous grid of the same (scheme, eps).
  for (std::size_t k = 1; k < records.size(); ++k) {
    ErrorRecord& cur = records[k];
    const ErrorRecord& prev = records[k - 1];
    if (prev.scheme != cur.scheme || prev.eps != cur.eps) continue;
    if (prev.has_flag("numerical_failure") || cur.has_flag("numerical_failure")) continue;
    cur.observed_order = observed_order({{prev.nx, prev.err_combined}, {cur.nx, cur.err_combined}}).front();
    if (!cur.observed_order) cur.flags.emplace_back("order_undefined");
  }
  return records;
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

namespace {

std::string join_flags(const std::vector<std::string>& flags) {
  std::string out;
  for (const auto& f : flags) {
    if (!out.empty()) out += ';';
    out += f;
  }
  return out;
}

std::string error_field(double e) { return std::isfinite(e) ? format_double(e) : std::string(); }

}  // namespace

void emit_csv(const std::vector<ErrorRecord>& records, std::ostream& out) {
  detail::require(!records.empty(), "no records to write");
  out << csv_header << '\n';
  for (const ErrorRecord& r : records) {
    out << to_string(r.scheme) << ',' << to_string(r.case_kind) << ',' << format_double(r.eps) << ',' << r.nx
        << ',' << format_double(r.dt) << ',' << error_field(r.err_v) << ',' << error_field(r.err_u) << ','
        << error_field(r.err_combined) << ',' << (r.observed_order ? format_double(*r.observed_order) : "")
        << ',' << join_flags(r.flags) << '\n';
  }
}

void write_csv(const std::vector<ErrorRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  emit_csv(records, out);
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<std::filesystem::path> write_plot_tables(const std::vector<ErrorRecord>& records,
                                                     const std::filesystem::path& directory) {
  std::map<std::tuple<SchemeKind, CaseKind, double>, std::vector<const ErrorRecord*>> groups;
  for (const ErrorRecord& r : records) {
    if (std::isfinite(r.err_combined) && !r.has_flag("numerical_failure")) {
      groups[{r.scheme, r.case_kind, r.eps}].push_back(&r);
    }
  }
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw std::runtime_error("cannot create " + directory.string() + ": " + ec.message());

  std::vector<std::filesystem::path> written;
  for (const auto& [key, rows] : groups) {
    const auto& [scheme, cas, eps] = key;
    std::ostringstream name;
    name << to_string(scheme) << '_' << to_string(cas) << "_eps" << format_double(eps) << ".dat";
    const std::filesystem::path path = directory / name.str();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "nx error\n";
    for (const ErrorRecord* r : rows) out << r->nx << ' ' << format_double(r->err_combined) << '\n';
    if (!out) throw std::runtime_error("failed writing " + path.string());
    written.push_back(path);
  }
  return written;
}

}  // namespace apfem
