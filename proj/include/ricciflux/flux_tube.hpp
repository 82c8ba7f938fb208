#pragma once

// Twisted magnetic flux tube: axis profiles, the tube metric family on the
// chart (r, theta_R, s), the constant-radius surface metric on
// (theta_R, s), Frenet data, and the closed-form curvature results.
//
// K(r, s) = 1 - r kappa(s) cos(theta(s)) with the twisted angle
// theta(s) = theta_R - int_0^s tau(u) du. Thin mode freezes K = 1.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ricciflux/config.hpp"
#include "ricciflux/errors.hpp"
#include "ricciflux/geom_core.hpp"

namespace ricciflux {

/// A scalar profile along the tube axis: constant, callable, or tabulated
/// (natural cubic spline, linear beyond the table ends).
class Profile {
 public:
  static Profile constant(double c) {
    Profile p;
    p.value_ = [c](double) { return c; };
    p.deriv_ = [](double) { return 0.0; };
    p.constant_ = c;
    return p;
  }

  /// `df` may be empty, in which case derivatives are central differences.
  static Profile function(std::function<double(double)> f,
                          std::function<double(double)> df = {}) {
    Profile p;
    p.value_ = std::move(f);
    if (df) {
      p.deriv_ = std::move(df);
    } else {
      p.deriv_ = [f = p.value_](double s) {
        const double h = detail::fd_step(std::cbrt(std::numeric_limits<double>::epsilon()), s);
        return (f(s + h) - f(s - h)) / (2.0 * h);
      };
    }
    return p;
  }

  static Profile tabulated(std::vector<std::pair<double, double>> samples);

  double operator()(double s) const { return value_(s); }
  double derivative(double s) const { return deriv_(s); }
  const std::optional<double>& constant_value() const { return constant_; }

  /// int_a^b of the profile. Composite Simpson, doubling panels until
  /// successive estimates agree to `rel` (relative to int |f|).
  double integral(double a, double b, double rel = 1e-10) const {
    if (constant_) return *constant_ * (b - a);
    if (a == b) return 0.0;
    auto simpson = [&](int panels, double& abs_out) {
      const double h = (b - a) / panels;
      double sum = 0.0, abs_sum = 0.0;
      for (int i = 0; i <= panels; ++i) {
        const double f = value_(a + i * h);
        if (!std::isfinite(f)) fail(ErrorKind::validation, "non-finite profile sample at s=" + std::to_string(a + i * h));
        const double w = (i == 0 || i == panels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        sum += w * f;
        abs_sum += w * std::abs(f);
      }
      abs_out = std::abs(abs_sum * h / 3.0);
      return sum * h / 3.0;
    };
    double abs_int = 0.0;
    double prev = simpson(2, abs_int);
    for (int panels = 4; panels <= (1 << 22); panels *= 2) {
      const double cur = simpson(panels, abs_int);
      if (std::abs(cur - prev) <= rel * std::max(abs_int, std::numeric_limits<double>::min()))
        return cur;
      prev = cur;
    }
    return prev;
  }

 private:
  std::function<double(double)> value_;
  std::function<double(double)> deriv_;
  std::optional<double> constant_;
};

namespace detail {

struct NaturalSpline {
  std::vector<double> x, y, m;  // m = second derivatives at knots

  explicit NaturalSpline(std::vector<std::pair<double, double>> pts) {
    std::sort(pts.begin(), pts.end());
    for (auto& [a, b] : pts) {
      if (!std::isfinite(a) || !std::isfinite(b))
        fail(ErrorKind::validation, "profile table contains a non-finite sample");
      x.push_back(a);
      y.push_back(b);
    }
    const std::size_t n = x.size();
    if (n < 2) fail(ErrorKind::validation, "profile table needs at least two samples");
    for (std::size_t i = 1; i < n; ++i)
      if (!(x[i] > x[i - 1])) fail(ErrorKind::validation, "profile table has duplicate s values");
    m.assign(n, 0.0);
    if (n < 3) return;
    // Tridiagonal solve for interior second derivatives.
    std::vector<double> c(n, 0.0), d(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
      const double a = h0, b = 2.0 * (h0 + h1), cc = h1;
      const double r = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
      const double denom = b - a * c[i - 1];
      c[i] = cc / denom;
      d[i] = (r - a * d[i - 1]) / denom;
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
      m[i] = d[i] - c[i] * m[i + 1];
      if (i == 1) break;
    }
  }

  std::size_t segment(double s) const {
    auto it = std::upper_bound(x.begin(), x.end(), s);
    std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, it - x.begin()));
    return std::min(i, x.size() - 1) - 1;
  }

  double value(double s) const {
    if (s <= x.front()) return y.front() + slope(x.front()) * (s - x.front());
    if (s >= x.back()) return y.back() + slope(x.back()) * (s - x.back());
    const std::size_t i = segment(s);
    const double h = x[i + 1] - x[i];
    const double a = (x[i + 1] - s) / h, b = (s - x[i]) / h;
    return a * y[i] + b * y[i + 1] + ((a * a * a - a) * m[i] + (b * b * b - b) * m[i + 1]) * h * h / 6.0;
  }

  double slope(double s) const {
    const double sc = std::clamp(s, x.front(), x.back());
    const std::size_t i = segment(sc);
    const double h = x[i + 1] - x[i];
    const double a = (x[i + 1] - sc) / h, b = (sc - x[i]) / h;
    return (y[i + 1] - y[i]) / h - (3.0 * a * a - 1.0) / 6.0 * h * m[i] +
           (3.0 * b * b - 1.0) / 6.0 * h * m[i + 1];
  }
};

}  // namespace detail

inline Profile Profile::tabulated(std::vector<std::pair<double, double>> samples) {
  auto spline = std::make_shared<detail::NaturalSpline>(std::move(samples));
  Profile p;
  p.value_ = [spline](double s) { return spline->value(s); };
  p.deriv_ = [spline](double s) { return spline->slope(s); };
  return p;
}

enum class TubeMode { thin, thick };

struct TubeParams {
  Profile kappa = Profile::constant(1.0);
  Profile tau = Profile::constant(0.0);
  double r0 = 0.1;
  TubeMode mode = TubeMode::thin;

  /// Axis curvature at s = 0, the constant used by thin-tube formulas.
  double kappa0() const { return kappa(0.0); }

  void validate() const {
    if (!(r0 >= 0.0) || !std::isfinite(r0)) fail(ErrorKind::validation, "tube radius r0 must be finite and >= 0");
  }
};

struct TwistState {
  double theta_R = 0.0;
  double theta = 0.0;
};

/// theta(s) = theta_R - int_0^s tau(u) du.
inline double twist_angle(const TubeParams& params, double theta_R, double s,
                          const Tolerances& tol = {}) {
  return theta_R - params.tau.integral(0.0, s, tol.quad_rel);
}

inline TwistState twist_state(const TubeParams& params, double theta_R, double s,
                              const Tolerances& tol = {}) {
  return {theta_R, twist_angle(params, theta_R, s, tol)};
}

/// Stretching coefficient K(r, s) at twisted angle theta(theta_R, s).
inline double stretch_coefficient(const TubeParams& params, double r, double theta_R, double s,
                                  const Tolerances& tol = {}) {
  if (params.mode == TubeMode::thin) return 1.0;
  return 1.0 - r * params.kappa(s) * std::cos(twist_angle(params, theta_R, s, tol));
}

namespace detail {

// Partials of K in (r, theta_R, s); theta_R enters only through theta.
struct StretchJet {
  double k, dk_dr, dk_dthetaR, dk_ds;
};

inline StretchJet stretch_jet(const TubeParams& params, double r, double theta_R, double s,
                              const Tolerances& tol) {
  if (params.mode == TubeMode::thin) return {1.0, 0.0, 0.0, 0.0};
  const double th = twist_angle(params, theta_R, s, tol);
  const double kap = params.kappa(s);
  const double c = std::cos(th), sn = std::sin(th);
  return {1.0 - r * kap * c, -kap * c, r * kap * sn,
          -r * params.kappa.derivative(s) * c - r * kap * params.tau(s) * sn};
}

}  // namespace detail

/// dl^2 = dr^2 + r^2 dtheta_R^2 + K^2 ds^2 on (r, theta_R, s), domain K > 0.
inline MetricSpec tube_metric_3d(const TubeParams& params, bool analytic_partials = false,
                                 const Tolerances& tol = {}) {
  params.validate();
  MetricSpec spec;
  spec.dim = 3;
  spec.eval = [params, tol](const ChartPoint& p, double) -> Mat {
    const double k = stretch_coefficient(params, p[0], p[1], p[2], tol);
    Mat g = Mat::Zero(3, 3);
    g(0, 0) = 1.0;
    g(1, 1) = p[0] * p[0];
    g(2, 2) = k * k;
    return g;
  };
  spec.domain = [params, tol](const ChartPoint& p) {
    return stretch_coefficient(params, p[0], p[1], p[2], tol) > 0.0;
  };
  if (analytic_partials) {
    spec.partial = [params, tol](const ChartPoint& p, double, int i) -> Mat {
      const auto j = detail::stretch_jet(params, p[0], p[1], p[2], tol);
      Mat d = Mat::Zero(3, 3);
      const double dk = i == 0 ? j.dk_dr : (i == 1 ? j.dk_dthetaR : j.dk_ds);
      if (i == 0) d(1, 1) = 2.0 * p[0];
      d(2, 2) = 2.0 * j.k * dk;
      return d;
    };
  }
  return spec;
}

/// dl^2 = r0^2 dtheta_R^2 + K(s)^2 ds^2 on (theta_R, s), K = 1 - r0 kappa cos(theta).
/// det g = r0^2 K^2.
inline MetricSpec tube_surface_metric(const TubeParams& params, bool analytic_partials = false,
                                      const Tolerances& tol = {}) {
  params.validate();
  if (!(params.r0 > 0.0)) fail(ErrorKind::validation, "tube_surface_metric requires r0 > 0");
  const double r0 = params.r0;
  MetricSpec spec;
  spec.dim = 2;
  spec.eval = [params, r0, tol](const ChartPoint& p, double) -> Mat {
    const double k = stretch_coefficient(params, r0, p[0], p[1], tol);
    Mat g = Mat::Zero(2, 2);
    g(0, 0) = r0 * r0;
    g(1, 1) = k * k;
    return g;
  };
  spec.domain = [params, r0, tol](const ChartPoint& p) {
    return stretch_coefficient(params, r0, p[0], p[1], tol) > 0.0;
  };
  if (analytic_partials) {
    spec.partial = [params, r0, tol](const ChartPoint& p, double, int i) -> Mat {
      const auto j = detail::stretch_jet(params, r0, p[0], p[1], tol);
      Mat d = Mat::Zero(2, 2);
      d(1, 1) = 2.0 * j.k * (i == 0 ? j.dk_dthetaR : j.dk_ds);
      return d;
    };
  }
  return spec;
}

/// R_1212 = -kappa(s) K(s) cos(theta), K(s) = 1 - r0 kappa(s) cos(theta),
/// transcribed as published. The exact value for tube_surface_metric is
/// surface_r1212_exact(), which carries an extra factor r0.
inline double analytic_r1212(const TubeParams& params, double s, double theta) {
  const double kap = params.kappa(s);
  const double c = std::cos(theta);
  return -kap * (1.0 - params.r0 * kap * c) * c;
}

/// Closed form of R_1212 for diag(r0^2, K^2) with K = 1 - r0 kappa cos(theta_R + ...):
/// R_1212 = -K d^2K/dtheta_R^2 = -r0 kappa K cos(theta).
inline double surface_r1212_exact(const TubeParams& params, double s, double theta) {
  const double kap = params.kappa(s);
  const double c = std::cos(theta);
  if (params.mode == TubeMode::thin) return 0.0;  // K == 1, flat
  return -params.r0 * kap * (1.0 - params.r0 * kap * c) * c;
}

/// Which determinant divides R_1212 in K_G = R_1212 / g.
enum class GaussConvention {
  published,    // g = r0^2
  determinant,  // g = det g_ij = r0^2 K^2
};

/// Thick: -kappa K cos(theta) / r0 (published) or -kappa cos(theta) / (r0 K)
/// (true determinant). Thin: -kappa0 cos(theta) / r0.
inline double analytic_gauss(const TubeParams& params, double s, double theta,
                             GaussConvention conv = GaussConvention::published) {
  if (!(params.r0 > 0.0)) fail(ErrorKind::validation, "analytic_gauss: zero tube radius");
  const double c = std::cos(theta);
  if (params.mode == TubeMode::thin) return -params.kappa0() * c / params.r0;
  const double kap = params.kappa(s);
  const double k = 1.0 - params.r0 * kap * c;
  if (conv == GaussConvention::published) return -kap * k * c / params.r0;
  return -kap * c / (params.r0 * k);
}

/// Thin tube: K_G < 0 iff kappa0 cos(theta) > 0.
inline bool negative_gauss_condition(const TubeParams& params, double theta) {
  if (params.mode != TubeMode::thin)
    fail(ErrorKind::validation, "negative_gauss_condition is defined for thin tubes only");
  return params.kappa0() * std::cos(theta) > 0.0;
}

struct FrenetFrame {
  Vec3 t, n, b;
};

inline FrenetFrame make_frenet_frame(const Vec3& t, const Vec3& n, const Tolerances& tol = {}) {
  if (std::abs(t.norm() - 1.0) > tol.frame_ortho || std::abs(n.norm() - 1.0) > tol.frame_ortho ||
      std::abs(t.dot(n)) > tol.frame_ortho)
    fail(ErrorKind::validation, "Frenet frame: t and n must be orthonormal");
  return {t, n, t.cross(n)};
}

struct CurveFrenet {
  FrenetFrame frame;
  double curvature = 0.0;
  double torsion = 0.0;
};

/// Frenet frame, curvature and torsion of a space curve c(u) at u, from
/// five-point central differences. The parameter need not be arclength.
inline CurveFrenet frenet_of_curve(const std::function<Vec3(double)>& curve, double u,
                                   double h = 1e-3) {
  const Vec3 m2 = curve(u - 2 * h), m1 = curve(u - h), c0 = curve(u), p1 = curve(u + h),
             p2 = curve(u + 2 * h);
  const Vec3 d1 = (m2 - 8 * m1 + 8 * p1 - p2) / (12 * h);
  const Vec3 d2 = (-m2 + 16 * m1 - 30 * c0 + 16 * p1 - p2) / (12 * h * h);
  const Vec3 d3 = (-m2 + 2 * m1 - 2 * p1 + p2) / (2 * h * h * h);
  const Vec3 cr = d1.cross(d2);
  if (cr.norm() < 1e-12 * std::pow(d1.norm(), 3))
    fail(ErrorKind::singularity, "frenet_of_curve: curvature vanishes, normal undefined");
  CurveFrenet out;
  out.frame.t = d1.normalized();
  out.frame.b = cr.normalized();
  out.frame.n = out.frame.b.cross(out.frame.t);
  out.curvature = cr.norm() / std::pow(d1.norm(), 3);
  out.torsion = cr.dot(d3) / cr.squaredNorm();
  return out;
}

/// Plasma flow inside the tube. v_theta and v_s are functions of the tube
/// chart point (r, theta_R, s).
struct FlowField {
  std::function<double(double)> v_r = [](double) { return 0.0; };
  std::function<double(const ChartPoint&)> v_theta = [](const ChartPoint&) { return 0.0; };
  std::function<double(const ChartPoint&)> v_s = [](const ChartPoint&) { return 0.0; };
  double omega1 = 0.0;

  static FlowField uniform(double vr, double vtheta, double vs, double omega1) {
    FlowField f;
    f.v_r = [vr](double) { return vr; };
    f.v_theta = [vtheta](const ChartPoint&) { return vtheta; };
    f.v_s = [vs](const ChartPoint&) { return vs; };
    f.omega1 = omega1;
    return f;
  }
};

/// R(X,Y)Y ~ [v_s - 1/tau][v_theta kappa tau sin(theta) e_theta
///           - tau v_theta sin(theta) t + v_s kappa n]
/// in the frame (e_theta, t, n), velocities sampled at (r0, theta, s).
/// Valid under the small-gradient approximations of the thin-tube
/// reduction; those are not checked here.
inline TangentVector riemann_xyy_tube(const FlowField& flow, const TubeParams& params,
                                      double theta, double s) {
  const double tau = params.tau(s);
  if (tau == 0.0) fail(ErrorKind::singularity, "riemann_xyy_tube: zero torsion (1/tau singular)");
  const ChartPoint at{params.r0, theta, s};
  const double vth = flow.v_theta(at);
  const double vs = flow.v_s(at);
  const double kap = params.kappa(s);
  const double sn = std::sin(theta);
  const double pre = vs - 1.0 / tau;
  Vec v(3);
  v << pre * vth * kap * tau * sn, -pre * tau * vth * sn, pre * vs * kap;
  return {v, at};
}

/// K(X,Y) = kappa(s) cos(theta) / (v1_r v_s) for a radial perturbation v1_r.
inline double analytic_sectional(const TubeParams& params, const FlowField& flow, double vr_pert,
                                 double theta, double s) {
  const double vs = flow.v_s(ChartPoint{params.r0, theta, s});
  if (vr_pert == 0.0 || vs == 0.0)
    fail(ErrorKind::validation, "analytic_sectional: perturbation and axial velocity must be non-zero");
  return params.kappa(s) * std::cos(theta) / (vr_pert * vs);
}

/// d_s v_theta - kappa tau r sin(theta) v_theta at p = (r, theta_R, s);
/// theta is the twisted angle at s.
inline double incompressibility_residual(const FlowField& flow, const TubeParams& params,
                                         const ChartPoint& p, const Tolerances& tol = {}) {
  if (p.dim() != 3) fail(ErrorKind::validation, "incompressibility_residual expects (r, theta_R, s)");
  const double r = p[0], s = p[2];
  const double h = detail::fd_step(tol.fd_step, s);
  const double fwd = flow.v_theta(p.shifted(2, h));
  const double bwd = flow.v_theta(p.shifted(2, -h));
  if (!std::isfinite(fwd) || !std::isfinite(bwd))
    fail(ErrorKind::stencil, "incompressibility_residual: v_theta not finite on the stencil");
  const double ds_vtheta = (fwd - bwd) / (2.0 * h);
  const double th = twist_angle(params, p[1], s, tol);
  return ds_vtheta - params.kappa(s) * params.tau(s) * r * std::sin(th) * flow.v_theta(p);
}

}  // namespace ricciflux
