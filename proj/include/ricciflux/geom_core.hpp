#pragma once

// Metric-generic tensor calculus on a single coordinate chart.
//
// Every quantity is derived numerically from a MetricSpec: first
// derivatives by central differences (or analytic partials when the spec
// supplies them), second derivatives by a central stencil with one
// Richardson level. Index convention for the curvature tensor:
//
//   R(X,Y)Z = R^l_{jkp} Z^j X^k Y^p d_l
//   R^l_{jkp} = d_k G^l_{pj} - d_p G^l_{kj} + G^l_{km} G^m_{pj} - G^l_{pm} G^m_{kj}
//   R_{ljkp}  = g_{lm} R^m_{jkp},   Ric_{jp} = R^l_{jlp},   R = g^{jp} Ric_{jp}
//
// With this convention <R(X,Y)Y,X> = R_{ljkp} X^l Y^j X^k Y^p and the unit
// sphere has R_{1212} = sin^2(x1).

#include <array>
#include <cmath>
#include <functional>
#include <initializer_list>
#include <string>

#include "ricciflux/config.hpp"
#include "ricciflux/errors.hpp"
#include "ricciflux/linalg.hpp"

namespace ricciflux {

struct ChartPoint {
  Vec x;

  ChartPoint() = default;
  explicit ChartPoint(Vec coords) : x(std::move(coords)) {}
  ChartPoint(std::initializer_list<double> coords) : x(static_cast<Eigen::Index>(coords.size())) {
    Eigen::Index i = 0;
    for (double c : coords) x(i++) = c;
  }

  int dim() const { return static_cast<int>(x.size()); }
  double operator[](int i) const { return x(i); }

  ChartPoint shifted(int i, double h) const {
    ChartPoint q = *this;
    q.x(i) += h;
    return q;
  }
};

using MetricFn = std::function<Mat(const ChartPoint&, double)>;
using DomainFn = std::function<bool(const ChartPoint&)>;
/// d g / d x^coord at (point, time).
using PartialFn = std::function<Mat(const ChartPoint&, double, int)>;

struct MetricSpec {
  int dim = 3;
  MetricFn eval;
  DomainFn domain = [](const ChartPoint&) { return true; };
  PartialFn partial;  // optional

  bool has_partials() const { return static_cast<bool>(partial); }
};

struct TangentVector {
  Vec components;
  ChartPoint base;

  int dim() const { return static_cast<int>(components.size()); }
};

struct VectorField {
  int dim = 3;
  std::function<Vec(const ChartPoint&)> eval;
  DomainFn domain = [](const ChartPoint&) { return true; };
};

/// Rank-3 array Gamma[k][i][j] = Gamma^k_{ij}.
struct ChristoffelSymbols {
  int dim = 0;
  std::array<double, 27> data{};

  double& operator()(int k, int i, int j) { return data[static_cast<std::size_t>(9 * k + 3 * i + j)]; }
  double operator()(int k, int i, int j) const { return data[static_cast<std::size_t>(9 * k + 3 * i + j)]; }
};

struct Rank4 {
  int dim = 0;
  std::array<double, 81> data{};

  double& operator()(int a, int b, int c, int d) {
    return data[static_cast<std::size_t>(27 * a + 9 * b + 3 * c + d)];
  }
  double operator()(int a, int b, int c, int d) const {
    return data[static_cast<std::size_t>(27 * a + 9 * b + 3 * c + d)];
  }
  double max_abs() const {
    double m = 0.0;
    for (double v : data) m = std::max(m, std::abs(v));
    return m;
  }
};

struct CurvatureBundle {
  int dim = 0;
  Rank4 riemann_up;    // R^l_{jkp}
  Rank4 riemann_down;  // R_{ljkp}
  Mat ricci;           // R_{jp}
  double scalar = 0.0;
};

namespace detail {

inline double fd_step(double base, double x) {
  // Make x+h exactly representable so the difference quotient divides by
  // the step actually taken.
  volatile double xp = x + base * std::max(1.0, std::abs(x));
  return xp - x;
}

inline void require_dim(const MetricSpec& spec, const ChartPoint& p) {
  if (spec.dim != 2 && spec.dim != 3)
    fail(ErrorKind::validation, "MetricSpec dim must be 2 or 3");
  if (p.dim() != spec.dim)
    fail(ErrorKind::validation, "ChartPoint dimension " + std::to_string(p.dim()) +
                                    " does not match metric dimension " + std::to_string(spec.dim));
  if (!p.x.allFinite()) fail(ErrorKind::validation, "ChartPoint has non-finite coordinates");
}

/// Evaluate g at a stencil node; the node must lie in the domain.
inline Mat stencil_eval(const MetricSpec& spec, const ChartPoint& q, double t) {
  if (!spec.domain(q)) fail(ErrorKind::stencil, "finite-difference stencil leaves the metric domain");
  return spec.eval(q, t);
}

inline Mat stencil_partial(const MetricSpec& spec, const ChartPoint& q, double t, int i) {
  if (!spec.domain(q)) fail(ErrorKind::stencil, "finite-difference stencil leaves the metric domain");
  return spec.partial(q, t, i);
}

}  // namespace detail

/// g evaluated at p, checked for domain membership, symmetry and positivity.
inline Mat metric_at(const MetricSpec& spec, const ChartPoint& p, double t = 0.0,
                     const Tolerances& tol = {}) {
  detail::require_dim(spec, p);
  if (!spec.domain(p)) fail(ErrorKind::domain, "chart point outside the metric domain");
  Mat g = spec.eval(p, t);
  if (g.rows() != spec.dim || g.cols() != spec.dim)
    fail(ErrorKind::validation, "metric evaluator returned a matrix of the wrong size");
  require_positive_definite(g, tol);
  return g;
}

/// Metric with its first and (optionally) second coordinate derivatives.
struct MetricJet {
  int dim = 0;
  Mat g;
  Mat ginv;
  std::array<Mat, 3> dg;                  // dg[i] = d_i g
  std::array<std::array<Mat, 3>, 3> ddg;  // ddg[i][j] = d_i d_j g
};

inline MetricJet metric_jet(const MetricSpec& spec, const ChartPoint& p, double t, int order,
                            const Tolerances& tol = {}) {
  MetricJet jet;
  jet.dim = spec.dim;
  jet.g = metric_at(spec, p, t, tol);
  jet.ginv = jet.g.inverse();
  const int n = spec.dim;

  for (int i = 0; i < n; ++i) {
    if (spec.has_partials()) {
      jet.dg[i] = spec.partial(p, t, i);
    } else {
      const double h = detail::fd_step(tol.fd_step, p[i]);
      jet.dg[i] = (detail::stencil_eval(spec, p.shifted(i, h), t) -
                   detail::stencil_eval(spec, p.shifted(i, -h), t)) /
                  (2.0 * h);
    }
  }
  if (order < 2) return jet;

  if (spec.has_partials()) {
    // Central differences of the analytic partials.
    std::array<std::array<Mat, 3>, 3> raw;
    for (int i = 0; i < n; ++i) {
      const double h = detail::fd_step(tol.fd_step, p[i]);
      for (int j = 0; j < n; ++j)
        raw[i][j] = (detail::stencil_partial(spec, p.shifted(i, h), t, j) -
                     detail::stencil_partial(spec, p.shifted(i, -h), t, j)) /
                    (2.0 * h);
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) jet.ddg[i][j] = 0.5 * (raw[i][j] + raw[j][i]);
    return jet;
  }

  const Mat& g0 = jet.g;
  auto second = [&](int i, int j, double hi, double hj) -> Mat {
    if (i == j) {
      return (detail::stencil_eval(spec, p.shifted(i, hi), t) - 2.0 * g0 +
              detail::stencil_eval(spec, p.shifted(i, -hi), t)) /
             (hi * hi);
    }
    const Mat pp = detail::stencil_eval(spec, p.shifted(i, hi).shifted(j, hj), t);
    const Mat pm = detail::stencil_eval(spec, p.shifted(i, hi).shifted(j, -hj), t);
    const Mat mp = detail::stencil_eval(spec, p.shifted(i, -hi).shifted(j, hj), t);
    const Mat mm = detail::stencil_eval(spec, p.shifted(i, -hi).shifted(j, -hj), t);
    return (pp - pm - mp + mm) / (4.0 * hi * hj);
  };
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double hi = detail::fd_step(tol.fd_step2, p[i]);
      const double hj = detail::fd_step(tol.fd_step2, p[j]);
      const Mat coarse = second(i, j, hi, hj);
      const Mat fine = second(i, j, 0.5 * hi, 0.5 * hj);
      jet.ddg[i][j] = (4.0 * fine - coarse) / 3.0;
      jet.ddg[j][i] = jet.ddg[i][j];
    }
  }
  return jet;
}

/// Levi-Civita symbols from a precomputed jet.
inline ChristoffelSymbols christoffel(const MetricJet& jet) {
  ChristoffelSymbols gam;
  gam.dim = jet.dim;
  const int n = jet.dim;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double s = 0.0;
        for (int l = 0; l < n; ++l)
          s += jet.ginv(k, l) * (jet.dg[i](l, j) + jet.dg[j](l, i) - jet.dg[l](i, j));
        gam(k, i, j) = gam(k, j, i) = 0.5 * s;
      }
  return gam;
}

inline ChristoffelSymbols christoffel(const MetricSpec& spec, const ChartPoint& p, double t = 0.0,
                                      const Tolerances& tol = {}) {
  return christoffel(metric_jet(spec, p, t, 1, tol));
}

inline CurvatureBundle curvature_bundle(const MetricSpec& spec, const ChartPoint& p,
                                        double t = 0.0, const Tolerances& tol = {}) {
  const MetricJet jet = metric_jet(spec, p, t, 2, tol);
  const ChristoffelSymbols gam = christoffel(jet);
  const int n = jet.dim;

  // dgam[m](k,i,j) = d_m Gamma^k_{ij}
  std::array<ChristoffelSymbols, 3> dgam;
  for (int m = 0; m < n; ++m) {
    const Mat dginv = -jet.ginv * jet.dg[m] * jet.ginv;
    dgam[m].dim = n;
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          double s = 0.0;
          for (int l = 0; l < n; ++l) {
            const double first = jet.dg[i](l, j) + jet.dg[j](l, i) - jet.dg[l](i, j);
            const double second =
                jet.ddg[m][i](l, j) + jet.ddg[m][j](l, i) - jet.ddg[m][l](i, j);
            s += dginv(k, l) * first + jet.ginv(k, l) * second;
          }
          dgam[m](k, i, j) = dgam[m](k, j, i) = 0.5 * s;
        }
  }

  CurvatureBundle cb;
  cb.dim = n;
  cb.riemann_up.dim = n;
  cb.riemann_down.dim = n;
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int q = 0; q < n; ++q) {
          double r = dgam[k](l, q, j) - dgam[q](l, k, j);
          for (int m = 0; m < n; ++m) r += gam(l, k, m) * gam(m, q, j) - gam(l, q, m) * gam(m, k, j);
          cb.riemann_up(l, j, k, q) = r;
        }
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int q = 0; q < n; ++q) {
          double r = 0.0;
          for (int m = 0; m < n; ++m) r += jet.g(l, m) * cb.riemann_up(m, j, k, q);
          cb.riemann_down(l, j, k, q) = r;
        }
  cb.ricci = Mat::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int q = 0; q < n; ++q) {
      double r = 0.0;
      for (int l = 0; l < n; ++l) r += cb.riemann_up(l, j, l, q);
      cb.ricci(j, q) = r;
    }
  cb.ricci = 0.5 * (cb.ricci + cb.ricci.transpose());
  cb.scalar = (jet.ginv.cwiseProduct(cb.ricci)).sum();
  return cb;
}

inline double inner(const Mat& g, const Vec& x, const Vec& y) { return x.dot(g * y); }

/// K(X,Y) = <R(X,Y)Y,X> / (|X|^2 |Y|^2 - <X,Y>^2), inner products with g at p.
inline double sectional_curvature(const MetricSpec& spec, const ChartPoint& p,
                                  const TangentVector& x, const TangentVector& y, double t = 0.0,
                                  const Tolerances& tol = {}) {
  detail::require_dim(spec, p);
  if (x.dim() != spec.dim || y.dim() != spec.dim)
    fail(ErrorKind::validation, "tangent vector dimension does not match metric");
  const Mat g = metric_at(spec, p, t, tol);
  const double xx = inner(g, x.components, x.components);
  const double yy = inner(g, y.components, y.components);
  const double xy = inner(g, x.components, y.components);
  const double area = xx * yy - xy * xy;
  if (!(area > tol.plane_ratio * xx * yy))
    fail(ErrorKind::degenerate_plane, "sectional_curvature: X and Y are (nearly) parallel");

  const CurvatureBundle cb = curvature_bundle(spec, p, t, tol);
  const int n = spec.dim;
  const Vec& X = x.components;
  const Vec& Y = y.components;
  double num = 0.0;
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int q = 0; q < n; ++q) num += cb.riemann_down(l, j, k, q) * X(l) * Y(j) * X(k) * Y(q);
  return num / area;
}

/// K_G = R_1212 / det g for a two-dimensional metric.
inline double gauss_curvature_2d(const MetricSpec& spec, const ChartPoint& p, double t = 0.0,
                                 const Tolerances& tol = {}) {
  if (spec.dim != 2) fail(ErrorKind::validation, "gauss_curvature_2d requires a 2D metric");
  const CurvatureBundle cb = curvature_bundle(spec, p, t, tol);
  const double det = metric_at(spec, p, t, tol).determinant();
  return cb.riemann_down(0, 1, 0, 1) / det;
}

/// J(k, j) = d_j Y^k by central differences.
inline Mat field_jacobian(const VectorField& f, const ChartPoint& p, const Tolerances& tol = {}) {
  const int n = f.dim;
  if (p.dim() != n) fail(ErrorKind::validation, "vector field and point dimensions differ");
  Mat jac(n, n);
  for (int j = 0; j < n; ++j) {
    const double h = detail::fd_step(tol.fd_step, p[j]);
    const ChartPoint fwd = p.shifted(j, h);
    const ChartPoint bwd = p.shifted(j, -h);
    if (!f.domain(fwd) || !f.domain(bwd))
      fail(ErrorKind::stencil, "finite-difference stencil leaves the vector field domain");
    jac.col(j) = (f.eval(fwd) - f.eval(bwd)) / (2.0 * h);
  }
  return jac;
}

/// Lie bracket [X,Y]^k = X^j d_j Y^k - Y^j d_j X^k.
inline TangentVector commutator(const VectorField& xf, const VectorField& yf, const ChartPoint& p,
                                const Tolerances& tol = {}) {
  if (xf.dim != yf.dim) fail(ErrorKind::validation, "commutator: field dimensions differ");
  const Vec x = xf.eval(p);
  const Vec y = yf.eval(p);
  return {field_jacobian(yf, p, tol) * x - field_jacobian(xf, p, tol) * y, p};
}

/// (nabla_X Y)^k = X^j d_j Y^k + Gamma^k_{jm} X^j Y^m.
inline TangentVector covariant_derivative(const TangentVector& x, const VectorField& yf,
                                          const ChartPoint& p, const MetricSpec& spec,
                                          double t = 0.0, const Tolerances& tol = {}) {
  detail::require_dim(spec, p);
  if (x.dim() != spec.dim || yf.dim != spec.dim)
    fail(ErrorKind::validation, "covariant_derivative: dimension mismatch");
  const ChristoffelSymbols gam = christoffel(spec, p, t, tol);
  const Vec y = yf.eval(p);
  Vec out = field_jacobian(yf, p, tol) * x.components;
  const int n = spec.dim;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int m = 0; m < n; ++m) out(k) += gam(k, j, m) * x.components(j) * y(m);
  return {out, p};
}

/// Reference metrics used by tests, the CLI and the self-check.
namespace metrics {

inline MetricSpec flat(int dim) {
  MetricSpec s;
  s.dim = dim;
  s.eval = [dim](const ChartPoint&, double) -> Mat { return Mat::Identity(dim, dim); };
  return s;
}

/// diag(1, r^2) on r > 0.
inline MetricSpec polar() {
  MetricSpec s;
  s.dim = 2;
  s.eval = [](const ChartPoint& p, double) -> Mat {
    Mat g = Mat::Zero(2, 2);
    g(0, 0) = 1.0;
    g(1, 1) = p[0] * p[0];
    return g;
  };
  s.domain = [](const ChartPoint& p) { return p[0] > 0.0; };
  return s;
}

/// Round 2-sphere of radius a: a^2 diag(1, sin^2 x1), 0 < x1 < pi.
inline MetricSpec sphere(double a = 1.0) {
  MetricSpec s;
  s.dim = 2;
  s.eval = [a](const ChartPoint& p, double) -> Mat {
    Mat g = Mat::Zero(2, 2);
    const double sn = std::sin(p[0]);
    g(0, 0) = a * a;
    g(1, 1) = a * a * sn * sn;
    return g;
  };
  s.domain = [](const ChartPoint& p) { return p[0] > 0.0 && p[0] < M_PI; };
  return s;
}

}  // namespace metrics

}  // namespace ricciflux
