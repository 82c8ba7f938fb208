#pragma once

// Subcommands, grid evaluation and CSV/JSON writers for the ricciflux tool.

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cli/config.hpp"
#include "ricciflux/ricciflux.hpp"

namespace ricciflux::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumerical = 2;
inline constexpr int kExitVerifyFailed = 3;

inline constexpr double kThetaClamp = 1e-6;
inline const double kNaN = std::numeric_limits<double>::quiet_NaN();

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::string> flags;
};

struct PointResult {
  std::vector<std::vector<double>> rows;
  std::set<std::string> flags;
};

struct Command {
  std::string name;
  std::string help;
  std::vector<std::string> columns;
  std::function<PointResult(const RunConfig&)> evaluate;
  std::function<std::set<std::string>(const RunConfig&)> static_flags;
};

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Moves theta off the tangent singularity at pi/2 + k pi, keeping its side.
inline double clamp_theta(double theta, bool* clamped = nullptr) {
  using std::numbers::pi;
  const double k = std::round((theta - pi / 2) / pi);
  const double c = pi / 2 + k * pi;
  if (std::abs(theta - c) >= kThetaClamp) return theta;
  if (clamped) *clamped = true;
  return theta > c ? c + kThetaClamp : c - kThetaClamp;
}

namespace commands {

struct ChartSetup {
  MetricSpec spec;
  ChartPoint point;
  std::array<double, 3> coords{kNaN, kNaN, kNaN};
};

inline ChartSetup chart(const RunConfig& c) {
  ChartSetup cs;
  if (c.metric == "tube") {
    cs.spec = tube_metric_3d(c.tube(), false, c.tol);
    cs.point = ChartPoint{c.r, c.theta, c.s};
  } else if (c.metric == "surface") {
    cs.spec = tube_surface_metric(c.tube(), false, c.tol);
    cs.point = ChartPoint{c.theta, c.s};
  } else if (c.metric == "sphere") {
    cs.spec = metrics::sphere(c.sphere_radius);
    cs.point = ChartPoint{c.theta, c.phi};
  } else if (c.metric == "polar") {
    cs.spec = metrics::polar();
    cs.point = ChartPoint{c.r, c.theta};
  } else {
    cs.spec = metrics::flat(3);
    cs.point = ChartPoint{c.x1, c.x2, c.x3};
  }
  for (int i = 0; i < cs.point.dim(); ++i) cs.coords[static_cast<std::size_t>(i)] = cs.point[i];
  return cs;
}

inline double entry(const Mat& m, int i, int j) { return i < m.rows() && j < m.cols() ? m(i, j) : kNaN; }

inline Command curvature() {
  Command cmd;
  cmd.name = "curvature";
  cmd.help = "Christoffel-based curvature of a metric at one chart point";
  cmd.columns = {"x1",       "x2",       "x3",       "scalar", "ricci_11", "ricci_12", "ricci_13",
                 "ricci_22", "ricci_23", "ricci_33", "R_1212", "R_1313",   "R_2323",   "sectional_12"};
  cmd.evaluate = [](const RunConfig& c) {
    const auto cs = chart(c);
    const auto cb = curvature_bundle(cs.spec, cs.point, 0.0, c.tol);
    const int n = cs.spec.dim;
    auto riem = [&](int a, int b) { return a < n && b < n ? cb.riemann_down(a, b, a, b) : kNaN; };
    Vec e1 = Vec::Zero(n), e2 = Vec::Zero(n);
    e1(0) = 1.0;
    e2(1) = 1.0;
    const double k12 = sectional_curvature(cs.spec, cs.point, {e1, cs.point}, {e2, cs.point}, 0.0, c.tol);
    PointResult pr;
    pr.rows.push_back({cs.coords[0], cs.coords[1], cs.coords[2], cb.scalar, entry(cb.ricci, 0, 0),
                       entry(cb.ricci, 0, 1), entry(cb.ricci, 0, 2), entry(cb.ricci, 1, 1),
                       entry(cb.ricci, 1, 2), entry(cb.ricci, 2, 2), riem(0, 1), riem(0, 2), riem(1, 2), k12});
    return pr;
  };
  cmd.static_flags = [](const RunConfig& c) {
    std::set<std::string> f;
    if (c.metric == "surface" || c.metric == "sphere" || c.metric == "polar")
      f.insert("two_dimensional_metric_third_index_columns_are_nan");
    return f;
  };
  return cmd;
}

inline Command tube() {
  Command cmd;
  cmd.name = "tube";
  cmd.help = "Flux-tube surface curvature: closed forms against the numeric metric";
  cmd.columns = {"s",        "theta_R", "theta",     "K",       "R1212_numeric", "R1212_closed_form",
                 "R1212_published", "K_G", "K_G_numeric", "K_G_det", "sectional_perturbation",
                 "negative_gauss"};
  cmd.evaluate = [](const RunConfig& c) {
    const TubeParams tp = c.tube();
    tp.validate();
    TubeParams thick = tp;
    thick.mode = TubeMode::thick;
    const double th = twist_angle(tp, c.theta, c.s, c.tol);
    const double k = stretch_coefficient(tp, tp.r0, c.theta, c.s, c.tol);
    PointResult pr;
    double r_num = kNaN, kg_num = kNaN;
    try {
      const auto surf = tube_surface_metric(thick, false, c.tol);
      const ChartPoint p{c.theta, c.s};
      r_num = curvature_bundle(surf, p, 0.0, c.tol).riemann_down(0, 1, 0, 1);
      kg_num = gauss_curvature_2d(surf, p, 0.0, c.tol);
    } catch (const Error&) {
      pr.flags.insert("numeric_curvature_undefined_where_K_nonpositive");
    }
    double sect = kNaN;
    if (c.vr_pert != 0.0 && c.vs != 0.0) sect = analytic_sectional(tp, c.flow(), c.vr_pert, th, c.s);
    const double kg = analytic_gauss(tp, c.s, th);
    const double neg = tp.mode == TubeMode::thin ? (negative_gauss_condition(tp, th) ? 1.0 : 0.0)
                                                 : (kg < 0.0 ? 1.0 : 0.0);
    pr.rows.push_back({c.s, c.theta, th, k, r_num, surface_r1212_exact(thick, c.s, th),
                       analytic_r1212(thick, c.s, th), kg, kg_num,
                       analytic_gauss(thick, c.s, th, GaussConvention::determinant), sect, neg});
    return pr;
  };
  cmd.static_flags = [](const RunConfig& c) {
    std::set<std::string> f{"published_r1212_lacks_factor_r0",
                            "published_thick_gauss_divides_by_r0_squared_not_det_g"};
    if (c.mode == TubeMode::thin) f.insert("numeric_columns_use_thick_surface_metric");
    if (c.vr_pert == 0.0 || c.vs == 0.0) f.insert("sectional_perturbation_undefined_for_zero_velocity");
    return f;
  };
  return cmd;
}

inline Command ricci_flow() {
  Command cmd;
  cmd.name = "ricci-flow";
  cmd.help = "Pointwise Ricci flow dg/dt = -2 Ric by RK4 with fixed step";
  cmd.columns = {"t", "g11", "g12", "g13", "g22", "g23", "g33", "lambda1", "lambda2", "lambda3"};
  cmd.evaluate = [](const RunConfig& c) {
    const auto cs = chart(c);
    const auto traj = ricci_flow_trajectory(cs.spec, cs.point, c.dt, c.t_end, c.record_every, c.tol);
    PointResult pr;
    for (const auto& rec : traj) {
      auto lam = [&](int i) { return i < rec.lambdas.size() ? rec.lambdas(i) : kNaN; };
      pr.rows.push_back({rec.t, entry(rec.metric, 0, 0), entry(rec.metric, 0, 1), entry(rec.metric, 0, 2),
                         entry(rec.metric, 1, 1), entry(rec.metric, 1, 2), entry(rec.metric, 2, 2), lam(0),
                         lam(1), lam(2)});
    }
    return pr;
  };
  cmd.static_flags = [](const RunConfig&) {
    return std::set<std::string>{"flow_sign_differs_between_definitions_integrating_minus_two_ricci"};
  };
  return cmd;
}

inline Command lyapunov() {
  Command cmd;
  cmd.name = "lyapunov";
  cmd.help = "Lyapunov spectrum of the tube flow and the induced metric";
  cmd.columns = {"r",       "theta",   "lambda1", "lambda2", "lambda3", "Lambda1", "Lambda2", "Lambda3",
                 "ftle1",   "ftle2",   "ftle3",   "gamma1",  "gamma2",  "gamma3",  "positive_count"};
  cmd.evaluate = [](const RunConfig& c) {
    PointResult pr;
    bool clamped = false;
    const double th = clamp_theta(c.theta, &clamped);
    if (clamped) pr.flags.insert("theta_clamped_near_tangent_singularity");
    if (!(c.t_end > 0.0)) fail(ErrorKind::validation, "lyapunov: t_end must be > 0");
    const auto spec = tube_lyapunov_spectrum(c.flow(), c.r, th, c.tol);
    Vec lam(3), Lam(3);
    for (int i = 0; i < 3; ++i) {
      lam(i) = spec[static_cast<std::size_t>(i)];
      Lam(i) = std::exp(2.0 * lam(i) * c.t_end);
    }
    const Mat g = metric_from_lyapunov(Lam, Mat::Identity(3, 3), c.tol);
    const auto ftle = finite_time_lyapunov(g.diagonal(), c.t_end);
    const auto rl = ricci_to_lyapunov(lam);
    if (!rl.flagged.empty()) pr.flags.insert("positive_exponent_contradicts_nonpositive_ricci_eigenvalues");
    pr.rows.push_back({c.r, th, lam(0), lam(1), lam(2), Lam(0), Lam(1), Lam(2), ftle.lambdas(0),
                       ftle.lambdas(1), ftle.lambdas(2), rl.gammas(0), rl.gammas(1), rl.gammas(2),
                       static_cast<double>(rl.flagged.size())});
    return pr;
  };
  cmd.static_flags = [](const RunConfig&) {
    return std::set<std::string>{"lambda2_is_two_vr_over_r_while_constraint_uses_vr_over_r"};
  };
  return cmd;
}

inline Command dynamo() {
  Command cmd;
  cmd.name = "dynamo";
  cmd.help = "Dynamo-action constraint and field growth factors";
  cmd.columns = {"r",           "theta",    "satisfied", "margin",    "satisfied_spectrum",
                 "margin_spectrum", "stretch_ok", "contract_ok", "rate_theta", "rate_s",
                 "amplification_theta", "amplification_s"};
  cmd.evaluate = [](const RunConfig& c) {
    PointResult pr;
    bool clamped = false;
    const double th = clamp_theta(c.theta, &clamped);
    if (clamped) pr.flags.insert("theta_clamped_near_tangent_singularity");
    const auto flow = c.flow();
    const auto v = dynamo_constraint(flow, th, c.r, c.tol);
    const auto g = field_growth(flow, th, c.r, c.t_end, c.tol);
    auto b = [](bool x) { return x ? 1.0 : 0.0; };
    pr.rows.push_back({c.r, th, b(v.satisfied), v.margin, b(v.satisfied_spectrum), v.margin_spectrum,
                       b(v.stretch_ok), b(v.contract_ok), g.rate_theta, g.rate_s, g.amplification_theta,
                       g.amplification_s});
    return pr;
  };
  cmd.static_flags = [](const RunConfig&) {
    return std::set<std::string>{"constraint_uses_vr_over_r_while_spectrum_gives_two_vr_over_r",
                                 "axial_growth_rate_carries_extra_vr_factor"};
  };
  return cmd;
}

inline Command cl_spectrum() {
  Command cmd;
  cmd.name = "cl-spectrum";
  cmd.help = "Diffusive eigenvalue on a surface of constant curvature";
  cmd.columns = {"eps", "kappa", "re", "im", "re_ideal", "im_ideal", "rem", "fast_dynamo"};
  cmd.evaluate = [](const RunConfig& c) {
    const double eps = c.eps_from_rem ? epsilon_from_reynolds(c.rem) : c.eps;
    const auto lam = chicone_latushkin_lambda(eps, c.kappa);
    const auto ideal = ideal_lambda(c.kappa);
    PointResult pr;
    pr.rows.push_back({eps, c.kappa, lam.real(), lam.imag(), ideal.real(), ideal.imag(), c.rem,
                       fast_dynamo_condition(c.rem, c.kappa) ? 1.0 : 0.0});
    return pr;
  };
  cmd.static_flags = [](const RunConfig& c) {
    std::set<std::string> f;
    if (c.eps_from_rem) f.insert("eps_taken_as_inverse_magnetic_reynolds_number");
    return f;
  };
  return cmd;
}

inline const std::vector<Command>& all() {
  static const std::vector<Command> cmds = {curvature(), tube(), ricci_flow(), lyapunov(), dynamo(), cl_spectrum()};
  return cmds;
}

inline const Command& find(const std::string& name) {
  for (const auto& c : all())
    if (c.name == name) return c;
  fail(ErrorKind::validation, "unknown command '" + name + "'");
}

}  // namespace commands

inline std::vector<double> linspace(const SweepRange& s) {
  std::vector<double> v(static_cast<std::size_t>(s.count));
  for (int i = 0; i < s.count; ++i)
    v[static_cast<std::size_t>(i)] =
        s.count == 1 ? s.start : s.start + (s.stop - s.start) * static_cast<double>(i) / (s.count - 1);
  if (s.count > 1) v.back() = s.stop;
  return v;
}

inline void set_numeric(RunConfig& c, const std::string& var, double v) {
  double* slot = numeric_slot(c, var);
  if (!slot) fail(ErrorKind::validation, "cannot sweep '" + var + "': not a numeric parameter");
  *slot = v;
  if (var == "kappa0") c.kappa_table.reset();
  if (var == "tau0") c.tau_table.reset();
  if (var == "r") c.r_set = true;
  if (var == "r0" && !c.r_set) c.r = v;
}

/// Evaluates the command over the Cartesian sweep grid (first sweep
/// outermost). Rows come out in grid order regardless of `threads`.
inline ResultTable evaluate(const RunConfig& cfg) {
  const auto& cmd = commands::find(cfg.command);
  ResultTable table;
  std::vector<std::string> prefix;
  for (const auto& s : cfg.sweeps) {
    if (!numeric_slot(const_cast<RunConfig&>(cfg), s.var))
      fail(ErrorKind::validation, "cannot sweep '" + s.var + "': not a numeric parameter");
    if (std::find(cmd.columns.begin(), cmd.columns.end(), s.var) == cmd.columns.end() &&
        std::find(prefix.begin(), prefix.end(), s.var) == prefix.end())
      prefix.push_back(s.var);
  }
  table.columns = prefix;
  table.columns.insert(table.columns.end(), cmd.columns.begin(), cmd.columns.end());

  std::vector<std::vector<double>> axes;
  std::size_t total = 1;
  for (const auto& s : cfg.sweeps) {
    axes.push_back(linspace(s));
    total *= axes.back().size();
  }

  std::vector<RunConfig> points(total, cfg);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    for (std::size_t a = axes.size(); a-- > 0;) {
      const std::size_t n = axes[a].size();
      set_numeric(points[idx], cfg.sweeps[a].var, axes[a][rem % n]);
      rem /= n;
    }
  }

  std::vector<PointResult> results(total);
  std::vector<std::exception_ptr> errors(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      try {
        results[i] = cmd.evaluate(points[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int nthreads = std::max(1, std::min<int>(cfg.threads, static_cast<int>(total)));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::set<std::string> flags = cmd.static_flags(cfg);
  for (std::size_t i = 0; i < total; ++i) {
    flags.insert(results[i].flags.begin(), results[i].flags.end());
    for (auto& row : results[i].rows) {
      std::vector<double> full;
      for (const auto& v : prefix) full.push_back(*numeric_slot(points[i], v));
      full.insert(full.end(), row.begin(), row.end());
      table.rows.push_back(std::move(full));
    }
  }
  table.config = echo(cfg);
  table.flags.assign(flags.begin(), flags.end());
  return table;
}

inline void write_csv(std::ostream& os, const ResultTable& t) {
  os << "# ricciflux " << kVersion << "\n";
  for (const auto& [k, v] : t.config) os << "# " << k << " = " << v << "\n";
  for (const auto& f : t.flags) os << "# flag: " << f << "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_number(row[i]);
    os << "\n";
  }
}

inline void write_json(std::ostream& os, const ResultTable& t) {
  nlohmann::ordered_json j;
  j["metadata"]["version"] = kVersion;
  for (const auto& [k, v] : t.config) j["metadata"]["config"][k] = v;
  j["metadata"]["flags"] = t.flags;
  j["metadata"]["columns"] = t.columns;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json r;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (std::isfinite(row[i])) r[t.columns[i]] = row[i];
      else r[t.columns[i]] = nullptr;
    }
    j["rows"].push_back(r);
  }
  os << j.dump(2) << "\n";
}

inline void write_table(std::ostream& os, const ResultTable& t, Format f) {
  if (f == Format::csv) write_csv(os, t);
  else write_json(os, t);
}

inline std::string render(const ResultTable& t, Format f) {
  std::ostringstream ss;
  write_table(ss, t, f);
  return ss.str();
}

/// Output path: --out, else $RICCIFLUX_OUT_DIR/<command>.<ext>, else stdout ("").
inline std::string output_path(const RunConfig& c) {
  if (!c.out.empty()) return c.out;
  if (const char* dir = std::getenv("RICCIFLUX_OUT_DIR"); dir && *dir)
    return std::string(dir) + "/" + c.command + (c.format == Format::csv ? ".csv" : ".json");
  return {};
}

inline int exit_code_for(const Error& e) { return e.numerical() ? kExitNumerical : kExitValidation; }

}  // namespace ricciflux::cli
