// apfem: run single simulations, convergence studies and verification suites.
//
//   apfem run    --scheme ap --case smooth --eps 1e-2 --nx 256 [--out run.csv]
//   apfem study  [--spec study.cfg] [--scheme ap,imex] [--eps 1e-2,1e-4] [--nx 64,128] [--out study.csv]
//   apfem verify [--suite all] [--out verify.csv]
//
// Any option may also come from a `key = value` file given by --config (or
// --spec for study); options on the command line win.
//
// Exit status: 0 success, 1 usage error, 2 numerical failure.

#include <apfem/config.hpp>
#include <apfem/harness.hpp>
#include <apfem/verification.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <thread>

namespace {

constexpr int exit_usage = 1;
constexpr int exit_numerical = 2;

struct Options {
  std::string config;
  std::string spec;
  std::string scheme = "ap";
  std::string case_name = "smooth";
  std::string eps;
  std::string nx;
  double cfl_hat = 0.8;
  double t_final = 0.1;
  std::string out;
  std::string viscosity = "wave_speed";
  std::string ghosts = "reflection";
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::string plot_dir;
  std::string suite = "all";
};

double parse_double(const std::string& text) {
  double value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw apfem::InvalidArgument("not a number: " + text);
  }
  return value;
}

apfem::Index parse_index(const std::string& text) {
  long long value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw apfem::InvalidArgument("not an integer: " + text);
  }
  return apfem::Index(value);
}

apfem::SchemeKind to_scheme(const std::string& name) {
  if (auto s = apfem::parse_scheme(name)) return *s;
  throw apfem::InvalidArgument("unknown scheme " + name + " (ap, implicit_euler, imex)");
}

apfem::CaseKind to_case(const std::string& name) {
  if (name == "smooth") return apfem::CaseKind::smooth;
  if (name == "kink") return apfem::CaseKind::kink;
  throw apfem::InvalidArgument("unknown case " + name + " (smooth, kink)");
}

apfem::SchemeOptions to_scheme_options(const Options& o) {
  apfem::SchemeOptions opts;
  const auto v = apfem::parse_viscosity(o.viscosity);
  if (!v) throw apfem::InvalidArgument("unknown viscosity " + o.viscosity + " (wave_speed, classical)");
  opts.viscosity = *v;
  if (o.ghosts == "reflection") {
    opts.ghosts.kind = apfem::GhostPolicy::Kind::reflection;
  } else if (o.ghosts == "extrapolation") {
    opts.ghosts.kind = apfem::GhostPolicy::Kind::extrapolation;
  } else {
    throw apfem::InvalidArgument("unknown ghost policy " + o.ghosts + " (reflection, extrapolation)");
  }
  return opts;
}

void write_records(const std::vector<apfem::ErrorRecord>& records, const std::string& out) {
  if (out.empty() || out == "-") {
    apfem::emit_csv(records, std::cout);
  } else {
    apfem::write_csv(records, out);
  }
}

int do_run(const Options& o) {
  apfem::SchemeConfig config;
  config.kind = to_scheme(o.scheme);
  config.case_kind = to_case(o.case_name);
  if (o.eps.empty()) throw apfem::InvalidArgument("run needs --eps");
  if (o.nx.empty()) throw apfem::InvalidArgument("run needs --nx");
  config.eps = parse_double(o.eps);
  config.n_cells = parse_index(o.nx);
  config.cfl_hat = o.cfl_hat;
  config.t_final = o.t_final;
  config.options = to_scheme_options(o);

  apfem::StudySpec spec;
  spec.schemes = {config.kind};
  spec.case_kind = config.case_kind;
  spec.eps_list = {config.eps};
  spec.nx_list = {config.n_cells};
  spec.cfl_hat = config.cfl_hat;
  spec.t_final = config.t_final;
  spec.options = config.options;
  const auto records = apfem::run_study(spec, 1);
  write_records(records, o.out);
  if (!records.front().flags.empty()) {
    std::cerr << "apfem: run flagged: ";
    for (const auto& f : records.front().flags) std::cerr << f << ' ';
    std::cerr << '\n';
    return exit_numerical;
  }
  return 0;
}

int do_study(const Options& o) {
  apfem::StudySpec spec;
  spec.schemes.clear();
  for (const auto& s : apfem::split_list(o.scheme)) spec.schemes.push_back(to_scheme(s));
  spec.case_kind = to_case(o.case_name);
  if (!o.eps.empty()) {
    spec.eps_list.clear();
    for (const auto& e : apfem::split_list(o.eps)) spec.eps_list.push_back(parse_double(e));
  }
  if (!o.nx.empty()) {
    spec.nx_list.clear();
    for (const auto& n : apfem::split_list(o.nx)) spec.nx_list.push_back(parse_index(n));
  }
  spec.cfl_hat = o.cfl_hat;
  spec.t_final = o.t_final;
  spec.options = to_scheme_options(o);
  const auto records = apfem::run_study(spec, o.threads);
  write_records(records, o.out);
  if (!o.plot_dir.empty()) {
    for (const auto& p : apfem::write_plot_tables(records, o.plot_dir)) std::cerr << "wrote " << p.string() << '\n';
  }
  return 0;
}

int do_verify(const Options& o) {
  const auto& names = apfem::suite_names();
  if (std::find(names.begin(), names.end(), o.suite) == names.end()) {
    throw apfem::InvalidArgument("unknown suite " + o.suite);
  }
  const auto reports = apfem::run_suites(o.suite);
  apfem::print_suite_table(reports, std::cout);
  if (!o.out.empty()) {
    std::ofstream out(o.out, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + o.out + " for writing");
    apfem::emit_verification_csv(reports, out);
  }
  const bool ok = std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.pass(); });
  return ok ? 0 : exit_numerical;
}

// Value of `--name value` or `--name=value` in args, if present.
std::optional<std::string> find_option(const std::vector<std::string>& args, const std::string& name) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == name && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind(name + "=", 0) == 0) return args[i].substr(name.size() + 1);
  }
  return std::nullopt;
}

bool has_option(const std::vector<std::string>& args, const std::string& name) {
  return std::any_of(args.begin(), args.end(),
                     [&](const std::string& a) { return a == name || a.rfind(name + "=", 0) == 0; });
}

// Inserts file-provided options right after the subcommand, skipping those
// already given on the command line.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  if (args.empty() || args.front().empty() || args.front()[0] == '-') return args;
  std::vector<std::string> extra;
  for (const char* key : {"--config", "--spec"}) {
    const auto file = find_option(args, key);
    if (!file) continue;
    for (const std::string& a : apfem::config_to_args(apfem::load_config(*file))) {
      const std::string flag = a.substr(0, a.find('='));
      if (flag == "--config" || flag == "--spec") continue;
      if (!has_option(args, flag) && !has_option(extra, flag)) extra.push_back(a);
    }
  }
  args.insert(args.begin() + 1, extra.begin(), extra.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"AP finite-element solver for the linearized p-system"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "key = value options file");
  };
  auto add_scheme_options = [&](CLI::App* sub, bool lists) {
    sub->add_option("--scheme", o.scheme, lists ? "comma list of ap, implicit_euler, imex" : "ap, implicit_euler, imex");
    sub->add_option("--case", o.case_name, "smooth or kink");
    sub->add_option("--eps", o.eps, lists ? "comma list of eps values" : "stiffness parameter in (0, 1)");
    sub->add_option("--nx", o.nx, lists ? "comma list of cell counts" : "number of cells");
    sub->add_option("--cfl-hat", o.cfl_hat, "non-stiff CFL number in (0, 1)");
    sub->add_option("--t-final", o.t_final, "final time");
    sub->add_option("--viscosity", o.viscosity, "Lax-Friedrichs viscosity of the baselines: wave_speed or classical");
    sub->add_option("--ghosts", o.ghosts, "boundary ghost policy: reflection or extrapolation");
    sub->add_option("--out", o.out, "CSV output path (default stdout)");
  };

  CLI::App* run = app.add_subcommand("run", "single simulation, one CSV record");
  add_common(run);
  add_scheme_options(run, false);

  CLI::App* study = app.add_subcommand("study", "convergence study over schemes, eps and grids");
  add_common(study);
  add_scheme_options(study, true);
  study->add_option("--spec", o.spec, "study specification file (key = value)");
  study->add_option("--threads", o.threads, "worker threads");
  study->add_option("--emit-plot-table", o.plot_dir, "directory for per-(scheme, eps) `nx error` tables");

  CLI::App* verify = app.add_subcommand("verify", "verification suites");
  add_common(verify);
  verify->add_option("--suite", o.suite, "consistency_v, consistency_u, multiscale, conditioning, splitting or all");
  verify->add_option("--out", o.out, "CSV output path");

  try {
    std::vector<std::string> args = merge_config({argv + 1, argv + argc});
    if (!args.empty() && args.front() == "study" && !has_option(args, "--scheme")) {
      o.scheme = "ap,implicit_euler,imex";
    }
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "apfem: " << e.what() << '\n';
    return exit_usage;
  }

  try {
    if (*run) return do_run(o);
    if (*study) return do_study(o);
    return do_verify(o);
  } catch (const apfem::InvalidArgument& e) {
    std::cerr << "apfem: " << e.what() << '\n';
    return exit_usage;
  } catch (const apfem::NumericalError& e) {
    std::cerr << "apfem: numerical failure: " << e.what() << '\n';
    return exit_numerical;
  } catch (const std::exception& e) {
    std::cerr << "apfem: " << e.what() << '\n';
    return exit_usage;
  }
}
