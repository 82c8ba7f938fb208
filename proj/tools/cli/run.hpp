#pragma once

// Argument parsing and dispatch. Returns the process exit code.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "cli/acceptance_suite.hpp"
#include "cli/app.hpp"
#include "cli/config.hpp"

namespace ricciflux::cli {

struct FlagSpec {
  const char* flag;
  const char* key;
  const char* help;
};

inline const std::vector<FlagSpec>& value_flags() {
  static const std::vector<FlagSpec> f = {
      {"--kappa0", "kappa0", "constant curvature of the tube axis"},
      {"--kappa-table", "kappa_table", "tabulated curvature \"s:v, s:v, ...\""},
      {"--tau0", "tau0", "constant torsion of the tube axis"},
      {"--tau-table", "tau_table", "tabulated torsion \"s:v, s:v, ...\""},
      {"--r0", "r0", "tube radius"},
      {"--mode", "mode", "thin|thick"},
      {"--r", "r", "radial coordinate (defaults to r0)"},
      {"--theta", "theta", "angle theta_R"},
      {"--s", "s", "arc length"},
      {"--phi", "phi", "sphere azimuth"},
      {"--x1", "x1", "flat chart coordinate"},
      {"--x2", "x2", "flat chart coordinate"},
      {"--x3", "x3", "flat chart coordinate"},
      {"--metric", "metric", "tube|surface|sphere|polar|flat (curvature, ricci-flow)"},
      {"--sphere-radius", "sphere_radius", "radius of the sphere metric"},
      {"--vr", "vr", "radial velocity"},
      {"--vs", "vs", "axial velocity"},
      {"--vtheta", "vtheta", "azimuthal velocity"},
      {"--omega1", "omega1", "rotation rate"},
      {"--vr-pert", "vr_pert", "radial perturbation for the sectional curvature column"},
      {"--eps", "eps", "diffusivity"},
      {"--kappa", "kappa", "constant surface curvature (cl-spectrum)"},
      {"--rem", "rem", "magnetic Reynolds number"},
      {"--t-end", "t_end", "final time / Lyapunov horizon"},
      {"--dt", "dt", "time step"},
      {"--record-every", "record_every", "trajectory record stride"},
      {"--threads", "threads", "worker threads for sweeps"},
      {"--format", "format", "csv|json"},
      {"--out", "out", "output file (default: $RICCIFLUX_OUT_DIR/<command>.<ext> or stdout)"},
      {"--tol", "", "tolerance override name=value, e.g. fd_step=1e-6"},
  };
  return f;
}

inline int report_error(std::ostream& err, const Error& e) {
  err << "ricciflux: " << to_string(e.kind()) << " error: " << e.what() << "\n";
  return exit_code_for(e);
}

inline int run_verify(std::ostream& out) {
  const auto rep = acceptance::run();
  acceptance::print(out, rep);
  return rep.all_pass() ? kExitOk : kExitVerifyFailed;
}

inline int run_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"ricciflux: flux-tube curvature, Ricci flow and dynamo diagnostics", "ricciflux"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  std::vector<std::pair<std::string, std::string>> flags;
  std::optional<std::string> config_path;
  app.add_option_function<std::string>("--config", [&](const std::string& v) { config_path = v; },
                                       "key = value configuration file");
  for (const auto& fs : value_flags()) {
    std::string key = fs.key;
    auto* opt = app.add_option_function<std::string>(
        fs.flag,
        [&flags, key](const std::string& v) {
          if (key.empty()) {
            const auto eq = v.find('=');
            if (eq == std::string::npos) throw ConfigError("flag --tol: expected name=value");
            flags.push_back({"tol." + v.substr(0, eq), v.substr(eq + 1)});
          } else {
            flags.push_back({key, v});
          }
        },
        fs.help);
    opt->allow_extra_args(false);
  }
  app.add_option_function<std::vector<std::string>>(
      "--sweep",
      [&](const std::vector<std::string>& vs) {
        for (const auto& v : vs) flags.push_back({"sweep", v});
      },
      "var=start:stop:count, inclusive, repeatable");
  app.add_flag_callback("--eps-from-rem", [&] { flags.push_back({"eps_from_rem", "true"}); },
                        "use eps = 1/Re_m in cl-spectrum");

  for (const auto& c : commands::all()) app.add_subcommand(c.name, c.help);
  app.add_subcommand("verify", "run the acceptance suite");

  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
  try {
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << (dynamic_cast<const CLI::CallForVersion*>(&e) ? std::string(kVersion) + "\n" : app.help());
      return kExitOk;
    }
    err << "ricciflux: validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    return report_error(err, e);
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (command == "verify") return run_verify(out);
    const RunConfig cfg = parse_config(command, config_path, flags);
    const ResultTable table = evaluate(cfg);
    const std::string path = output_path(cfg);
    if (path.empty()) {
      write_table(out, table, cfg.format);
    } else {
      std::ofstream f(path, std::ios::binary);
      if (!f) fail(ErrorKind::validation, "cannot write output file '" + path + "'");
      write_table(f, table, cfg.format);
      if (!f) fail(ErrorKind::validation, "failed writing output file '" + path + "'");
    }
    return kExitOk;
  } catch (const Error& e) {
    return report_error(err, e);
  } catch (const std::exception& e) {
    err << "ricciflux: internal error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace ricciflux::cli
