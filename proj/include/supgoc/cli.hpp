#pragma once

// Command-line front end: `study`, `compare` and `profile` subcommands.
// run_cli() is callable in-process so tests can check output and exit codes.
//
// Exit codes: 0 success, 1 numerical failure, 2 usage or configuration error.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "supgoc/config.hpp"
#include "supgoc/report.hpp"

namespace supgoc {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitUsage = 2;

namespace cli_detail {

/// Thread count for concurrent mesh levels from SUPGOC_THREADS (default 1).
inline int env_threads() {
  const char* v = std::getenv("SUPGOC_THREADS");
  if (!v || !*v) return 1;
  try {
    return std::max(1, std::stoi(v));
  } catch (const std::exception&) {
    throw ConfigError("SUPGOC_THREADS must be a positive integer");
  }
}

template <int Dim>
ProblemData<Dim> make_problem(const StudyConfig& c) {
  if constexpr (Dim == 1) {
    return example1(c.epsilon.value_or(0.0025), c.omega.value_or(1.0));
  } else {
    if (c.example == 2) return example2(c.epsilon.value_or(1e-5), c.omega.value_or(1e-2), c.example2_profile);
    return example3(c.epsilon.value_or(1e-2), c.omega.value_or(1.0));
  }
}

/// "dir/name.csv" + "dto" -> "dir/name_dto.csv"
inline std::string suffixed(const std::string& path, const std::string& tag) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + "_" + tag;
  return path.substr(0, dot) + "_" + tag + path.substr(dot);
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open output file '" + path + "'");
  return f;
}

template <int Dim>
StudySpec<Dim> make_spec(const StudyConfig& c, Approach a, std::vector<double> h) {
  StudySpec<Dim> s;
  s.problem = make_problem<Dim>(c);
  s.approach = a;
  s.degrees = c.degrees();
  s.h = std::move(h);
  s.stab = c.stab;
  s.error_quadrature = error_quadrature<Dim>(c);
  s.threads = env_threads();
  if (c.dump_system) {
    const std::string stem = c.dump_dir + "/" + s.problem.name + "_" + to_string(a) + "_k" +
                             std::to_string(s.degrees.state);
    s.on_system = [stem](const KktSystem<Dim>& sys, std::size_t level, double h) {
      const std::string base = stem + "_level" + std::to_string(level);
      auto m = open_out(base + ".mtx");
      auto hd = open_out(base + ".hdr");
      write_system(m, hd, sys, h);
    };
  }
  return s;
}

inline void emit_report(std::ostream& os, const StudyConfig& c, const ErrorReport& r) {
  if (c.format == "markdown")
    write_markdown(os, r);
  else
    write_csv(os, r);
}

inline void warn_quadrature(std::ostream& err, const ErrorReport& r) {
  for (const auto& row : r.rows)
    if (row.quadrature_change > r.quadrature_tolerance)
      err << "warning: " << to_string(r.approach) << " h = " << format_error(row.h)
          << ": error quadrature not converged (relative change " << format_error(row.quadrature_change)
          << " under doubled subdivision)\n";
}

template <int Dim>
int study(const StudyConfig& c, std::ostream& out, std::ostream& err) {
  const auto h = study_levels(c);
  const auto approaches = c.approaches();
  for (Approach a : approaches) {
    const auto report = run_study(make_spec<Dim>(c, a, h));
    warn_quadrature(err, report);
    if (c.out.empty()) {
      if (approaches.size() > 1) out << "# " << to_string(a) << "\n";
      emit_report(out, c, report);
    } else {
      const std::string path = approaches.size() > 1 ? suffixed(c.out, to_string(a)) : c.out;
      auto f = open_out(path);
      emit_report(f, c, report);
      write_markdown(out, report);
    }
  }
  return kExitOk;
}

template <int Dim>
int compare(const StudyConfig& c, std::ostream& out, std::ostream& err) {
  const auto h = study_levels(c);
  const auto dto = run_study(make_spec<Dim>(c, Approach::DTO, h));
  const auto otd = run_study(make_spec<Dim>(c, Approach::OTD, h));
  warn_quadrature(err, dto);
  warn_quadrature(err, otd);
  std::vector<std::vector<double>> cols = {dto.column(ErrorColumn::SdAdjoint), otd.column(ErrorColumn::SdAdjoint),
                                           dto.column(ErrorColumn::L2Control), otd.column(ErrorColumn::L2Control)};
  std::vector<std::vector<double>> ord;
  for (const auto& col : cols) ord.push_back(col.size() > 1 ? convergence_orders(col) : std::vector<double>{});

  std::ostringstream os;
  const bool md = c.format == "markdown";
  if (md) {
    os << "| h | SD(lambda) dto | order | SD(lambda) otd | order | L2(u) dto | order | L2(u) otd | order |\n"
       << "|---|---|---|---|---|---|---|---|---|\n";
  } else {
    os << "h,sd_lam_dto,order_sd_lam_dto,sd_lam_otd,order_sd_lam_otd,l2_u_dto,order_l2_u_dto,l2_u_otd,order_l2_u_otd\n";
  }
  const char* sep = md ? " | " : ",";
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (md) os << "| ";
    os << format_error(h[i]);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      os << sep << format_error(cols[k][i]) << sep;
      if (i > 0) os << format_order(ord[k][i - 1]);
    }
    if (md) os << " |";
    os << "\n";
  }
  if (h.size() > 1) {
    const double od = ord[0].back(), oo = ord[1].back();
    os << (md ? "\n" : "# ") << "final SD(lambda) order: dto " << format_order(od) << ", otd " << format_order(oo)
       << ", gap " << format_order(oo - od) << "\n";
  }
  if (c.out.empty()) {
    out << os.str();
  } else {
    auto f = open_out(c.out);
    f << os.str();
    out << os.str();
  }
  return kExitOk;
}

template <int Dim>
int profile(const StudyConfig& c, std::ostream& out, std::ostream& err) {
  if (c.levels && *c.levels != 1) throw ConfigError("profile: runs a single mesh level (use --coarsest)");
  const double h = c.h.value_or(c.coarsest.value_or(default_coarsest(c)));
  const auto approaches = c.approaches();
  for (Approach a : approaches) {
    const auto spec = make_spec<Dim>(c, a, {h});
    auto sys = build_system(spec.problem, make_mesh(spec.problem, h), a, spec.degrees, spec.stab, spec.assembly);
    if (spec.on_system) spec.on_system(sys, 0, h);
    const auto sol = solve_direct(sys);
    const auto osc = oscillation(sys.control, sol.u, c.threshold);
    std::ostream& summary = c.out.empty() ? err : out;
    summary << to_string(a) << " h = " << format_error(h) << ": u_h second-difference sign changes "
            << osc.sign_changes << " / " << osc.pairs << " (" << format_order(osc.fraction())
            << "), node-to-node oscillation: " << (osc.oscillating() ? "yes" : "no") << "\n";
    if (c.out.empty()) {
      if (approaches.size() > 1) out << "# " << to_string(a) << "\n";
      write_profile(out, sys, sol);
    } else {
      auto f = open_out(approaches.size() > 1 ? suffixed(c.out, to_string(a)) : c.out);
      write_profile(f, sys, sol);
    }
  }
  return kExitOk;
}

}  // namespace cli_detail

/// Options shared by all subcommands; values are kept as strings and fed
/// through apply_setting() so flags and config files validate identically.
struct CliOptions {
  std::string config;
  std::map<std::string, std::string> values;
  bool ci = false;
  bool dump_system = false;
};

inline void add_common_options(CLI::App* app, CliOptions& o) {
  app->add_option("--config", o.config, "flat key = value config file; flags override its values");
  auto opt = [&](const std::string& name, const std::string& help) {
    app->add_option("--" + name, o.values[name], help);
  };
  opt("example", "built-in example: 1, 2 or 3");
  opt("approach", "dto, otd or both");
  opt("degree", "state polynomial degree k");
  opt("control-degree", "control polynomial degree m (default k)");
  opt("adjoint-degree", "adjoint polynomial degree l (default k)");
  opt("levels", "number of mesh levels, halving h");
  opt("coarsest", "coarsest mesh size");
  opt("tau", "paper, general:T1:T2, coth or zero");
  opt("format", "csv or markdown");
  opt("out", "output path (default: standard output)");
  opt("epsilon", "override the diffusion coefficient");
  opt("omega", "override the control cost");
  opt("example2-profile", "steep or literal state profile for example 2");
  opt("error-rule", "composite (default) or element error quadrature");
  opt("error-degree", "error quadrature exactness degree");
  opt("error-subdivisions", "error quadrature subdivisions per element edge");
  opt("dump-dir", "directory for --dump-system files");
  app->add_flag("--ci", o.ci, "2D studies: keep only h >= 1.25e-2");
  app->add_flag("--dump-system", o.dump_system, "write each level's system matrix and header");
}

inline StudyConfig resolve_config(CLI::App* app, const CliOptions& o) {
  StudyConfig c;
  if (!o.config.empty()) load_config_file(c, o.config);
  for (const auto& [name, value] : o.values)
    if (app->get_option("--" + name)->count() > 0) apply_setting(c, name, value);
  if (o.ci) c.ci = true;
  if (o.dump_system) c.dump_system = true;
  validate(c);
  return c;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"SUPG optimal control of advection-diffusion: convergence studies"};
  app.require_subcommand(1);
  CliOptions study_opts, compare_opts, profile_opts;
  auto* study = app.add_subcommand("study", "errors and convergence orders over halved mesh levels");
  auto* compare = app.add_subcommand("compare", "side-by-side dto/otd adjoint and control errors");
  auto* profile = app.add_subcommand("profile", "nodal solution values on one mesh level");
  add_common_options(study, study_opts);
  add_common_options(compare, compare_opts);
  add_common_options(profile, profile_opts);
  profile->add_option("--threshold", profile_opts.values["threshold"], "oscillation threshold relative to max|u_h|");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (study->parsed()) {
      const auto c = resolve_config(study, study_opts);
      return c.dim() == 1 ? cli_detail::study<1>(c, out, err) : cli_detail::study<2>(c, out, err);
    }
    if (compare->parsed()) {
      auto c = resolve_config(compare, compare_opts);
      if (compare->get_option("--approach")->count() > 0 && c.approach != "both")
        throw ConfigError("compare: approach must be both");
      c.approach = "both";
      validate(c);
      return c.dim() == 1 ? cli_detail::compare<1>(c, out, err) : cli_detail::compare<2>(c, out, err);
    }
    const auto c = resolve_config(profile, profile_opts);
    return c.dim() == 1 ? cli_detail::profile<1>(c, out, err) : cli_detail::profile<2>(c, out, err);
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace supgoc
