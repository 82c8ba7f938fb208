#pragma once

// Acceptance criteria 1-10. Shared by `ricciflux verify` and the ctest
// acceptance binary; the latter also drives the built executable for the
// determinism criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <complex>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include <Eigen/Geometry>

#include "cli/app.hpp"
#include "ricciflux/ricciflux.hpp"

namespace ricciflux::acceptance {

namespace tol {
inline constexpr double kCurvatureRel = 1e-6;
inline constexpr double kCurvatureSeconds = 5.0;
inline constexpr double kFlatAbs = 1e-8;
inline constexpr double kSphereAbs = 1e-6;
inline constexpr double kFlowAbs = 1e-8;
inline constexpr double kOrderLo = 12.0;
inline constexpr double kOrderHi = 20.0;
inline constexpr double kEigenrateAbs = 1e-6;
inline constexpr double kSpectrumAbs = 1e-12;
inline constexpr double kLimitFactor = 5.0;
inline constexpr double kRoundTripNormwise = 1e-12;
}  // namespace tol

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct InfoResult {
  std::string title;
  bool pass = false;
  std::string detail;
};

struct Report {
  std::vector<CriterionResult> criteria;
  std::vector<InfoResult> info;
  bool all_pass() const {
    for (const auto& c : criteria)
      if (!c.pass) return false;
    return !criteria.empty();
  }
};

struct Options {
  /// Path of the built executable. Empty: criterion 10 runs in-process.
  std::string cli_path;
};

namespace detail {

using std::numbers::pi;

inline std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

inline TubeParams tube(double kappa0, double r0, TubeMode mode, double tau0 = 0.0) {
  TubeParams tp;
  tp.kappa = Profile::constant(kappa0);
  tp.tau = Profile::constant(tau0);
  tp.r0 = r0;
  tp.mode = mode;
  return tp;
}

inline double grid(int i) { return 2.0 * pi * i / 9.0; }

inline const double kR0[] = {0.05, 0.1};
inline const double kKappa0[] = {0.5, 1.0, 2.0};

struct CurvatureScan {
  double max_rel_published = 0.0;
  double max_rel_exact = 0.0;
  double seconds = 0.0;
};

inline CurvatureScan scan_surface_curvature() {
  CurvatureScan out;
  const auto t0 = std::chrono::steady_clock::now();
  for (double r0 : kR0)
    for (double k0 : kKappa0) {
      const TubeParams tp = tube(k0, r0, TubeMode::thick);
      const auto m = tube_surface_metric(tp);
      for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) {
          const double s = grid(i), th = grid(j);
          const double num = curvature_bundle(m, ChartPoint{th, s}).riemann_down(0, 1, 0, 1);
          const double pub = analytic_r1212(tp, s, th);
          const double ex = surface_r1212_exact(tp, s, th);
          out.max_rel_published = std::max(out.max_rel_published, std::abs(num - pub) / std::abs(pub));
          out.max_rel_exact = std::max(out.max_rel_exact, std::abs(num - ex) / std::abs(ex));
        }
    }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

inline void c1(Report& rep, const CurvatureScan& scan) {
  CriterionResult r{1, "numeric R_1212 of the tube surface metric matches the published closed form"};
  r.pass = scan.max_rel_published <= tol::kCurvatureRel && scan.seconds < tol::kCurvatureSeconds;
  r.detail = fmt("max rel err %.3e (tol %.0e), %.2f s", scan.max_rel_published, tol::kCurvatureRel, scan.seconds);
  rep.criteria.push_back(r);
  rep.info.push_back({"numeric R_1212 against -r0 kappa K cos(theta)", scan.max_rel_exact <= tol::kCurvatureRel,
                      fmt("max rel err %.3e (tol %.0e)", scan.max_rel_exact, tol::kCurvatureRel)});
}

inline void c2(Report& rep) {
  CriterionResult r{2, "thin-tube Gauss curvature negative exactly where kappa0 cos(theta) > 0"};
  int mismatches = 0, points = 0;
  for (double r0 : kR0)
    for (double k0 : kKappa0) {
      const TubeParams tp = tube(k0, r0, TubeMode::thin);
      for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) {
          const double s = grid(i), th = grid(j);
          const bool neg = analytic_gauss(tp, s, th) < 0.0;
          const bool cond = k0 * std::cos(th) > 0.0;
          mismatches += (neg != cond) || (negative_gauss_condition(tp, th) != cond);
          ++points;
        }
    }
  r.pass = mismatches == 0;
  r.detail = std::to_string(mismatches) + " mismatches over " + std::to_string(points) + " points";
  rep.criteria.push_back(r);
}

inline void c3(Report& rep) {
  CriterionResult r{3, "straight tube has vanishing Riemann tensor"};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ur(0.05, 2.0), ua(0.0, 2.0 * pi);
  const auto m = tube_metric_3d(tube(0.0, 0.1, TubeMode::thick, 0.7));
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const ChartPoint p{ur(rng), ua(rng), ua(rng)};
    const auto cb = curvature_bundle(m, p);
    worst = std::max({worst, cb.riemann_up.max_abs(), cb.riemann_down.max_abs()});
  }
  r.pass = worst < tol::kFlatAbs;
  r.detail = fmt("max |R| %.3e over 50 points (tol %.0e)", worst, tol::kFlatAbs);
  rep.criteria.push_back(r);
}

inline void c4(Report& rep) {
  CriterionResult r{4, "unit sphere sectional and Gauss curvature equal 1"};
  const auto m = metrics::sphere(1.0);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> uphi(0.0, 2.0 * pi);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const ChartPoint p{0.3 + (pi - 0.6) * k / 19.0, uphi(rng)};
    Vec e1(2), e2(2);
    e1 << 1.0, 0.0;
    e2 << 0.3, 1.0;
    const double ks = sectional_curvature(m, p, {e1, p}, {e2, p});
    const double kg = gauss_curvature_2d(m, p);
    worst = std::max({worst, std::abs(ks - 1.0), std::abs(kg - 1.0)});
  }
  r.pass = worst <= tol::kSphereAbs;
  r.detail = fmt("max |K - 1| %.3e over 20 points (tol %.0e)", worst, tol::kSphereAbs);
  rep.criteria.push_back(r);
}

inline double sphere_flow_error(double dt, double t_end, double* max_along = nullptr) {
  const auto s = metrics::sphere(1.0);
  const ChartPoint p{1.0, 0.0};
  const Mat g0 = metric_at(s, p);
  FlowState st{0.0, g0};
  const auto n = std::llround(t_end / dt);
  double worst = 0.0;
  for (long long i = 1; i <= n; ++i) {
    st = ricci_flow_step(s, st, dt, p);
    const double t = static_cast<double>(i) * dt;
    worst = std::max(worst, (st.metric - (1.0 - 2.0 * t) * g0).cwiseAbs().maxCoeff());
  }
  if (max_along) *max_along = worst;
  return (st.metric - (1.0 - 2.0 * t_end) * g0).cwiseAbs().maxCoeff();
}

inline double warped_flow_error(double dt, double t_end) {
  MetricSpec warped;
  warped.dim = 3;
  warped.eval = [](const ChartPoint& q, double) -> Mat {
    Mat g = Mat::Zero(3, 3);
    g(0, 0) = 1.0;
    g(1, 1) = std::exp(2.0 * q[0]);
    g(2, 2) = std::exp(4.0 * q[0]);
    return g;
  };
  const ChartPoint p{0.0, 0.0, 0.0};
  FlowState st{0.0, metric_at(warped, p)};
  const auto n = std::llround(t_end / dt);
  for (long long i = 0; i < n; ++i) st = ricci_flow_step(warped, st, dt, p);
  const double a = 1.0 + 10.0 * t_end;
  return std::max({std::abs(st.metric(0, 0) - a), std::abs(st.metric(1, 1) - std::pow(a, 0.6)),
                   std::abs(st.metric(2, 2) - std::pow(a, 1.2))});
}

inline void c5(Report& rep) {
  CriterionResult r{5, "Einstein sphere flow exact to 1e-8 and fourth order in dt"};
  double along = 0.0;
  const double e1 = sphere_flow_error(1e-3, 0.1, &along);
  const double e2 = sphere_flow_error(5e-4, 0.1);
  const double ratio = e1 / e2;
  const bool exact_ok = along <= tol::kFlowAbs;
  const bool order_ok = ratio >= tol::kOrderLo && ratio <= tol::kOrderHi;
  r.pass = exact_ok && order_ok;
  r.detail = fmt("max err %.3e (tol %.0e); ", along, tol::kFlowAbs) +
             fmt("err(dt)/err(dt/2) = %.3e / %.3e = %.3f, required [12, 20]", e1, e2, ratio);
  rep.criteria.push_back(r);

  const double w1 = warped_flow_error(0.02, 0.4), w2 = warped_flow_error(0.01, 0.4);
  const double wr = w1 / w2;
  rep.info.push_back({"RK4 order on a non-Einstein pointwise flow", wr >= tol::kOrderLo && wr <= tol::kOrderHi,
                      fmt("err ratio %.3f", wr)});
}

inline void c6(Report& rep) {
  CriterionResult r{6, "flow_eigenrate inverts the diagonal closed form"};
  Vec lam(3);
  lam << 1.0, 0.5, -0.25;
  std::vector<std::pair<double, Mat>> samples;
  for (int k = 0; k < 3; ++k) samples.push_back({1e-3 * k, closed_form_diagonal(lam, 1e-3 * k)});
  const Vec back = flow_eigenrate(samples);
  const double err = (back - lam).cwiseAbs().maxCoeff();
  r.pass = err <= tol::kEigenrateAbs;
  r.detail = fmt("max err %.3e (tol %.0e)", err, tol::kEigenrateAbs);
  rep.criteria.push_back(r);
}

inline void c7(Report& rep) {
  CriterionResult r{7, "tube Lyapunov spectrum and dynamo constraint"};
  const auto flow = FlowField::uniform(-0.1, 0.0, 0.0, 1.0);
  const auto spec = tube_lyapunov_spectrum(flow, 1.0, pi / 4);
  const double spec_err =
      std::max({std::abs(spec[0]), std::abs(spec[1] + 0.2), std::abs(spec[2] - 0.9)});
  const auto v = dynamo_constraint(flow, pi / 4, 1.0);
  const bool example_ok = spec_err <= tol::kSpectrumAbs && v.satisfied && std::abs(v.margin - 0.9) <= tol::kSpectrumAbs;

  int mismatches = 0, tuples = 0;
  for (int a = 0; a < 10; ++a)
    for (int b = 0; b < 10; ++b)
      for (int c = 0; c < 10; ++c)
        for (int d = 0; d < 10; ++d) {
          const double vr = -1.0 + 2.0 * a / 9.0;
          const double rr = 0.1 + 1.9 * b / 9.0;
          const double w = -2.0 + 4.0 * c / 9.0;
          const double th = 0.05 + 2.95 * d / 9.0;
          const auto verdict = dynamo_constraint(FlowField::uniform(vr, 0.0, 0.0, w), th, rr);
          const bool direct = std::abs(w * std::tan(th)) >= std::abs(vr / rr);
          mismatches += verdict.satisfied != direct;
          ++tuples;
        }
  r.pass = example_ok && mismatches == 0;
  r.detail = fmt("spectrum (%.3g, %.3g, %.3g), ", spec[0], spec[1], spec[2]) +
             fmt("margin %.17g; ", v.margin) + std::to_string(mismatches) + " verdict mismatches over " +
             std::to_string(tuples) + " tuples";
  rep.criteria.push_back(r);
}

inline void c8(Report& rep) {
  CriterionResult r{8, "diffusive eigenvalue tends to 2i within 5 eps; ideal value 2 at kappa = -4"};
  bool limit_ok = true;
  std::string d;
  double worst_ratio = 0.0;
  for (double eps : {1e-2, 1e-4, 1e-6}) {
    const double dev = std::abs(chicone_latushkin_lambda(eps, 4.0) - std::complex<double>(0.0, 2.0));
    limit_ok &= dev <= tol::kLimitFactor * eps;
    worst_ratio = std::max(worst_ratio, dev / eps);
    d += fmt("eps %.0e: |dev|/eps %.4f; ", eps, dev / eps);
  }
  const auto l0 = chicone_latushkin_lambda(0.0, -4.0);
  const auto li = ideal_lambda(-4.0);
  const bool ideal_ok = l0.real() == 2.0 && l0.imag() == 0.0 && li.real() == 2.0 && li.imag() == 0.0;
  r.pass = limit_ok && ideal_ok;
  r.detail = d + "required <= 5; lambda_0(-4) = " + fmt("%.17g%+.17gi", l0.real(), l0.imag());
  rep.criteria.push_back(r);

  const double c = 0.5 * (1.0 + 16.0);
  const double dev = std::abs(chicone_latushkin_lambda(1e-6, 4.0) - std::complex<double>(0.0, 2.0)) / 1e-6;
  rep.info.push_back({"small-eps deviation constant equals (1 + kappa^2)/2", std::abs(dev - c) <= 1e-3 * c,
                      fmt("|dev|/eps %.6f, (1 + kappa^2)/2 = %.6f", dev, c)});
}

inline Mat random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

inline void c9(Report& rep) {
  CriterionResult r{9, "Lyapunov metric round trip reproduces stretching factors"};
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ulog(-3.0, 3.0);
  double worst_norm = 0.0, worst_rel = 0.0, worst_lambda = 0.0;
  const double t = 1.0;
  for (int k = 0; k < 1000; ++k) {
    Vec L(3);
    for (int i = 0; i < 3; ++i) L(i) = std::pow(10.0, ulog(rng));
    const Mat g = metric_from_lyapunov(L, random_rotation(rng));
    const auto eig = jacobi_eigen(g);
    const auto spec = finite_time_lyapunov(eig.values, t);
    Vec sorted = L;
    std::sort(sorted.data(), sorted.data() + 3);
    const double scale = sorted.maxCoeff();
    for (int i = 0; i < 3; ++i) {
      const double back = std::exp(2.0 * t * spec.lambdas(i));
      worst_norm = std::max(worst_norm, std::abs(back - sorted(i)) / scale);
      worst_rel = std::max(worst_rel, std::abs(back - sorted(i)) / sorted(i));
      worst_lambda = std::max(worst_lambda, std::abs(spec.lambdas(i) - std::log(sorted(i)) / (2.0 * t)));
    }
  }
  r.pass = worst_norm <= tol::kRoundTripNormwise;
  r.detail = fmt("max |dLambda|/max Lambda %.3e (tol %.0e); ", worst_norm, tol::kRoundTripNormwise) +
             fmt("componentwise rel %.3e, max |dlambda| %.3e", worst_rel, worst_lambda);
  rep.criteria.push_back(r);
}

inline cli::RunConfig determinism_config() {
  cli::RunConfig c = cli::parse_config("tube", std::nullopt, {});
  c.sweeps.push_back({"theta", 0.0, 2.0 * pi, 25});
  c.sweeps.push_back({"s", 0.0, 1.0, 4});
  return c;
}

inline int run_process(const std::string& cmd) {
  const int st = std::system(cmd.c_str());
  if (st == -1 || !WIFEXITED(st)) return -1;
  return WEXITSTATUS(st);
}

inline std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline void c10(Report& rep, const Options& opt) {
  CriterionResult r{10, "verify exits 0 and repeated tube runs are byte-identical"};
  if (opt.cli_path.empty()) {
    auto c = determinism_config();
    const std::string a = cli::render(cli::evaluate(c), cli::Format::csv);
    c.threads = 4;
    const std::string b = cli::render(cli::evaluate(c), cli::Format::csv);
    const bool same = a == b && !a.empty();
    bool rest = true;
    for (const auto& cr : rep.criteria) rest &= cr.pass;
    r.pass = same && rest;
    r.detail = std::string(same ? "tube CSV identical across runs" : "tube CSV differs between runs") +
               "; verify exit status " + (rest ? "0" : "3") + " (criteria 1-9 " +
               (rest ? "all pass)" : "not all pass)");
  } else {
    const char* tmp = std::getenv("TMPDIR");
    const std::string dir = tmp && *tmp ? tmp : "/tmp";
    const std::string base = dir + "/ricciflux_accept_" + std::to_string(::getpid());
    const std::string args = " tube --kappa0 1 --r0 0.1 --sweep theta=0:6.283185307179586:25 --sweep s=0:1:4";
    const int e1 = run_process("\"" + opt.cli_path + "\"" + args + " --out " + base + "_a.csv");
    const int e2 = run_process("\"" + opt.cli_path + "\"" + args + " --threads 4 --out " + base + "_b.csv");
    const std::string a = slurp(base + "_a.csv"), b = slurp(base + "_b.csv");
    const bool same = e1 == 0 && e2 == 0 && a == b && !a.empty();
    const int ev = run_process("\"" + opt.cli_path + "\" verify > /dev/null 2>&1");
    std::remove((base + "_a.csv").c_str());
    std::remove((base + "_b.csv").c_str());
    r.pass = same && ev == 0;
    r.detail = std::string(same ? "tube CSV identical across runs" : "tube CSV differs or a run failed") +
               "; verify exit status " + std::to_string(ev);
  }
  rep.criteria.push_back(r);
}

}  // namespace detail

inline Report run(const Options& opt = {}) {
  Report rep;
  auto timed = [&](auto&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t before = rep.criteria.size();
    try {
      f();
    } catch (const std::exception& e) {
      rep.criteria.push_back({static_cast<int>(before) + 1, "criterion raised", false, e.what()});
    }
    if (rep.criteria.size() > before)
      rep.criteria.back().seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  timed([&] { detail::c1(rep, detail::scan_surface_curvature()); });
  timed([&] { detail::c2(rep); });
  timed([&] { detail::c3(rep); });
  timed([&] { detail::c4(rep); });
  timed([&] { detail::c5(rep); });
  timed([&] { detail::c6(rep); });
  timed([&] { detail::c7(rep); });
  timed([&] { detail::c8(rep); });
  timed([&] { detail::c9(rep); });
  timed([&] { detail::c10(rep, opt); });
  return rep;
}

inline void print(std::ostream& os, const Report& rep) {
  for (const auto& c : rep.criteria)
    os << (c.pass ? "PASS" : "FAIL") << "  criterion " << c.id << ": " << c.title << " | " << c.detail
       << detail::fmt(" | %.2f s", c.seconds) << "\n";
  for (const auto& i : rep.info)
    os << "INFO  " << (i.pass ? "ok  " : "off ") << i.title << " | " << i.detail << "\n";
  int passed = 0;
  for (const auto& c : rep.criteria) passed += c.pass;
  os << passed << "/" << rep.criteria.size() << " criteria pass\n";
}

}  // namespace ricciflux::acceptance
