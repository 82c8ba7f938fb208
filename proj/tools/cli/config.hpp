#pragma once

// Run configuration: defaults <- key-value file <- command-line flags.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ricciflux/ricciflux.hpp"

namespace ricciflux::cli {

enum class Format { csv, json };

struct SweepRange {
  std::string var;
  double start = 0.0;
  double stop = 0.0;
  int count = 1;
};

using Table = std::vector<std::pair<double, double>>;

struct RunConfig {
  std::string command;

  // tube geometry
  double kappa0 = 1.0;
  std::optional<Table> kappa_table;
  double tau0 = 0.0;
  std::optional<Table> tau_table;
  double r0 = 0.1;
  TubeMode mode = TubeMode::thin;

  // evaluation point; tube chart is (r, theta, s), sphere is (theta, phi)
  double r = 0.1;  // follows r0 unless set
  bool r_set = false;
  double theta = 0.0;
  double s = 0.0;
  double phi = 0.0;
  double x1 = 0.0, x2 = 0.0, x3 = 0.0;
  std::string metric = "tube";
  double sphere_radius = 1.0;

  // flow
  double vr = 0.0;
  double vs = 0.0;
  double vtheta = 0.0;
  double omega1 = 0.0;
  double vr_pert = -0.1;

  // diffusive spectrum
  double eps = 0.0;
  double kappa = 4.0;
  double rem = 1.0;
  bool eps_from_rem = false;

  // time integration / horizons
  double t_end = 0.1;
  double dt = 1e-3;
  int record_every = 1;

  std::vector<SweepRange> sweeps;
  std::string out;
  Format format = Format::csv;
  int threads = 1;
  Tolerances tol;

  TubeParams tube() const {
    TubeParams tp;
    tp.kappa = kappa_table ? Profile::tabulated(*kappa_table) : Profile::constant(kappa0);
    tp.tau = tau_table ? Profile::tabulated(*tau_table) : Profile::constant(tau0);
    tp.r0 = r0;
    tp.mode = mode;
    return tp;
  }

  FlowField flow() const { return FlowField::uniform(vr, vtheta, vs, omega1); }
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& v, const std::string& where) {
  const std::string t = trim(v);
  char* end = nullptr;
  const double d = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(d))
    throw ConfigError(where + ": expected a finite number, got '" + v + "'");
  return d;
}

inline int parse_int(const std::string& v, const std::string& where) {
  const double d = parse_double(v, where);
  if (d != std::floor(d) || std::abs(d) > 1e9) throw ConfigError(where + ": expected an integer, got '" + v + "'");
  return static_cast<int>(d);
}

inline bool parse_bool(const std::string& v, const std::string& where) {
  const std::string t = trim(v);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError(where + ": expected a boolean, got '" + v + "'");
}

/// "s0:v0, s1:v1, ..."
inline Table parse_table(const std::string& v, const std::string& where) {
  Table out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError(where + ": table entries must be s:value, got '" + item + "'");
    out.push_back({parse_double(item.substr(0, colon), where), parse_double(item.substr(colon + 1), where)});
  }
  if (out.size() < 2) throw ConfigError(where + ": table needs at least two entries");
  return out;
}

/// "var=start:stop:count"
inline SweepRange parse_sweep(const std::string& v, const std::string& where) {
  const auto eq = v.find('=');
  if (eq == std::string::npos) throw ConfigError(where + ": sweep must look like var=start:stop:count");
  SweepRange r;
  r.var = trim(v.substr(0, eq));
  std::vector<std::string> parts;
  std::stringstream ss(v.substr(eq + 1));
  std::string p;
  while (std::getline(ss, p, ':')) parts.push_back(p);
  if (parts.size() != 3) throw ConfigError(where + ": sweep must look like var=start:stop:count");
  r.start = parse_double(parts[0], where);
  r.stop = parse_double(parts[1], where);
  r.count = parse_int(parts[2], where);
  if (r.count < 1) throw ConfigError(where + ": sweep count must be >= 1");
  return r;
}

}  // namespace detail

/// Numeric keys that can be set directly or swept.
inline double* numeric_slot(RunConfig& c, const std::string& key) {
  static const std::map<std::string, double RunConfig::*> slots = {
      {"kappa0", &RunConfig::kappa0}, {"tau0", &RunConfig::tau0},     {"r0", &RunConfig::r0},
      {"r", &RunConfig::r},           {"theta", &RunConfig::theta},   {"s", &RunConfig::s},
      {"phi", &RunConfig::phi},       {"x1", &RunConfig::x1},         {"x2", &RunConfig::x2},
      {"x3", &RunConfig::x3},         {"vr", &RunConfig::vr},         {"vs", &RunConfig::vs},
      {"vtheta", &RunConfig::vtheta}, {"omega1", &RunConfig::omega1}, {"vr_pert", &RunConfig::vr_pert},
      {"eps", &RunConfig::eps},       {"kappa", &RunConfig::kappa},   {"rem", &RunConfig::rem},
      {"t_end", &RunConfig::t_end},   {"dt", &RunConfig::dt},         {"sphere_radius", &RunConfig::sphere_radius},
  };
  const auto it = slots.find(key);
  return it == slots.end() ? nullptr : &(c.*(it->second));
}

inline double* tolerance_slot(Tolerances& t, const std::string& key) {
  static const std::map<std::string, double Tolerances::*> slots = {
      {"tol.fd_step", &Tolerances::fd_step},           {"tol.fd_step2", &Tolerances::fd_step2},
      {"tol.pd_ratio", &Tolerances::pd_ratio},         {"tol.plane_ratio", &Tolerances::plane_ratio},
      {"tol.tangent_guard", &Tolerances::tangent_guard}, {"tol.quad_rel", &Tolerances::quad_rel},
      {"tol.frame_ortho", &Tolerances::frame_ortho},
  };
  const auto it = slots.find(key);
  return it == slots.end() ? nullptr : &(t.*(it->second));
}

/// Sets one key. `where` names the source (file line or flag) for errors.
inline void apply_setting(RunConfig& c, const std::string& raw_key, const std::string& value,
                          const std::string& where) {
  std::string key = raw_key;
  std::replace(key.begin(), key.end(), '-', '_');
  if (key.rfind("tol_", 0) == 0) key = "tol." + key.substr(4);
  using namespace detail;
  if (double* slot = numeric_slot(c, key)) {
    *slot = parse_double(value, where);
    if (key == "r") c.r_set = true;
    if (key == "kappa0") c.kappa_table.reset();
    if (key == "tau0") c.tau_table.reset();
  } else if (double* tslot = tolerance_slot(c.tol, key)) {
    *tslot = parse_double(value, where);
  } else if (key == "kappa_table") {
    c.kappa_table = parse_table(value, where);
  } else if (key == "tau_table") {
    c.tau_table = parse_table(value, where);
  } else if (key == "mode") {
    const std::string v = trim(value);
    if (v == "thin") c.mode = TubeMode::thin;
    else if (v == "thick") c.mode = TubeMode::thick;
    else throw ConfigError(where + ": mode must be thin or thick, got '" + v + "'");
  } else if (key == "metric") {
    const std::string v = trim(value);
    if (v != "tube" && v != "surface" && v != "sphere" && v != "polar" && v != "flat")
      throw ConfigError(where + ": metric must be one of tube|surface|sphere|polar|flat, got '" + v + "'");
    c.metric = v;
  } else if (key == "format") {
    const std::string v = trim(value);
    if (v == "csv") c.format = Format::csv;
    else if (v == "json") c.format = Format::json;
    else throw ConfigError(where + ": format must be csv or json, got '" + v + "'");
  } else if (key == "out") {
    c.out = trim(value);
  } else if (key == "sweep") {
    c.sweeps.push_back(parse_sweep(value, where));
  } else if (key == "threads") {
    c.threads = parse_int(value, where);
    if (c.threads < 1) throw ConfigError(where + ": threads must be >= 1");
  } else if (key == "record_every") {
    c.record_every = parse_int(value, where);
    if (c.record_every < 1) throw ConfigError(where + ": record_every must be >= 1");
  } else if (key == "eps_from_rem") {
    c.eps_from_rem = parse_bool(value, where);
  } else {
    throw ConfigError(where + ": unknown key '" + raw_key + "'");
  }
}

/// Key-value text: `key = value`, '#' starts a comment. `sweep` may repeat.
inline void apply_config_text(RunConfig& c, const std::string& text, const std::string& name) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = name + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    apply_setting(c, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)), where);
  }
}

inline void apply_config_file(RunConfig& c, const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  apply_config_text(c, ss.str(), path);
}

/// Flags are (key, value) pairs in command-line order, applied after the file.
inline RunConfig parse_config(const std::string& command, const std::optional<std::string>& path,
                              const std::vector<std::pair<std::string, std::string>>& flags) {
  RunConfig c;
  c.command = command;
  if (path) apply_config_file(c, *path);
  for (const auto& [k, v] : flags) apply_setting(c, k, v, "flag --" + k);
  if (!c.r_set) c.r = c.r0;
  return c;
}

/// Effective configuration as sorted "key=value" strings.
inline std::vector<std::pair<std::string, std::string>> echo(const RunConfig& c) {
  auto num = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  auto table = [&](const Table& t) {
    std::string s;
    for (std::size_t i = 0; i < t.size(); ++i) s += (i ? "," : "") + num(t[i].first) + ":" + num(t[i].second);
    return s;
  };
  std::vector<std::pair<std::string, std::string>> e = {
      {"command", c.command},
      {"kappa0", c.kappa_table ? "table:" + table(*c.kappa_table) : num(c.kappa0)},
      {"tau0", c.tau_table ? "table:" + table(*c.tau_table) : num(c.tau0)},
      {"r0", num(c.r0)},
      {"mode", c.mode == TubeMode::thin ? "thin" : "thick"},
      {"metric", c.metric},
      {"r", num(c.r)},
      {"theta", num(c.theta)},
      {"s", num(c.s)},
      {"phi", num(c.phi)},
      {"x1", num(c.x1)},
      {"x2", num(c.x2)},
      {"x3", num(c.x3)},
      {"sphere_radius", num(c.sphere_radius)},
      {"vr", num(c.vr)},
      {"vs", num(c.vs)},
      {"vtheta", num(c.vtheta)},
      {"omega1", num(c.omega1)},
      {"vr_pert", num(c.vr_pert)},
      {"eps", num(c.eps)},
      {"kappa", num(c.kappa)},
      {"rem", num(c.rem)},
      {"eps_from_rem", c.eps_from_rem ? "true" : "false"},
      {"t_end", num(c.t_end)},
      {"dt", num(c.dt)},
      {"record_every", std::to_string(c.record_every)},
      {"format", c.format == Format::csv ? "csv" : "json"},
  };
  for (std::size_t i = 0; i < c.sweeps.size(); ++i) {
    const auto& s = c.sweeps[i];
    e.push_back({"sweep" + std::to_string(i), s.var + "=" + num(s.start) + ":" + num(s.stop) + ":" + std::to_string(s.count)});
  }
  std::sort(e.begin(), e.end());
  return e;
}

}  // namespace ricciflux::cli
