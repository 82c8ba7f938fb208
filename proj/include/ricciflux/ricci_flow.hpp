#pragma once

// Ricci flow dg/dt = -2 Ric(g) integrated pointwise, the generalized Ricci
// eigenproblem Ric chi = lambda g chi, the diagonal exponential solution
// g_ii(t) = exp(-2 lambda_i t), and the flux-tube eigen-matrix and
// Lyapunov spectrum.

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ricciflux/config.hpp"
#include "ricciflux/errors.hpp"
#include "ricciflux/flux_tube.hpp"
#include "ricciflux/geom_core.hpp"
#include "ricciflux/linalg.hpp"

namespace ricciflux {

struct RicciEigenSpectrum {
  Vec lambdas;  // ascending
  Mat eigvecs;  // columns, g-orthonormal
};

/// Solves R chi = lambda g chi.
inline RicciEigenSpectrum ricci_eigenproblem(const Mat& ricci, const Mat& g,
                                             const Tolerances& tol = {}) {
  const auto eig = generalized_eigen(ricci, g, tol);
  return {eig.values, eig.vectors};
}

struct FlowState {
  double t = 0.0;
  Mat metric;
};

/// One classical RK4 step of dg/dt = rhs(t, g).
template <class Rhs>
Mat rk4_advance(Rhs&& rhs, double t, const Mat& g, double dt) {
  const Mat k1 = rhs(t, g);
  const Mat k2 = rhs(t + 0.5 * dt, Mat(g + 0.5 * dt * k1));
  const Mat k3 = rhs(t + 0.5 * dt, Mat(g + 0.5 * dt * k2));
  const Mat k4 = rhs(t + dt, Mat(g + dt * k3));
  return g + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// The metric field whose value at `p` is `target` and whose shape
/// elsewhere is the base field transported by the fixed congruence
/// A g(x) A^T, A = chol(target) chol(g(p))^-1.
inline MetricSpec evolved_field(const MetricSpec& base, const ChartPoint& p, const Mat& target,
                                double t = 0.0, const Tolerances& tol = {}) {
  const Mat g0 = metric_at(base, p, t, tol);
  const Mat l0 = cholesky_lower(g0);
  const Mat lt = cholesky_lower(target);
  const Mat a = l0.transpose().triangularView<Eigen::Upper>().solve(lt.transpose()).transpose();
  MetricSpec out;
  out.dim = base.dim;
  out.domain = base.domain;
  out.eval = [base, a](const ChartPoint& x, double tt) -> Mat {
    Mat g = a * base.eval(x, tt) * a.transpose();
    return 0.5 * (g + g.transpose());
  };
  if (base.has_partials()) {
    out.partial = [base, a](const ChartPoint& x, double tt, int i) -> Mat {
      return a * base.partial(x, tt, i) * a.transpose();
    };
  }
  return out;
}

namespace detail {

inline void require_flow_positive(const Mat& g, const Tolerances& tol, const char* where) {
  try {
    require_positive_definite(g, tol, where);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::degenerate_metric)
      fail(ErrorKind::positivity_loss, std::string("Ricci flow singularity: ") + e.what());
    throw;
  }
}

}  // namespace detail

/// Ricci tensor at `p` of the base field deformed so that g(p) = `g`.
inline Mat pointwise_ricci(const MetricSpec& spec, const ChartPoint& p, const Mat& g, double t,
                           const Tolerances& tol = {}) {
  return curvature_bundle(evolved_field(spec, p, g, t, tol), p, t, tol).ricci;
}

/// Advances the pointwise flow dg/dt = -2 Ric by one RK4 step; Ricci is
/// recomputed from the deformed field at every stage.
inline FlowState ricci_flow_step(const MetricSpec& spec, const FlowState& state, double dt,
                                 const ChartPoint& p, const Tolerances& tol = {}) {
  if (!(dt > 0.0) || !std::isfinite(dt)) fail(ErrorKind::validation, "ricci_flow_step: dt must be > 0");
  detail::require_flow_positive(state.metric, tol, "ricci_flow_step (state)");
  auto rhs = [&](double t, const Mat& g) -> Mat {
    detail::require_flow_positive(g, tol, "ricci_flow_step (stage)");
    return -2.0 * pointwise_ricci(spec, p, g, t, tol);
  };
  FlowState next{state.t + dt, rk4_advance(rhs, state.t, state.metric, dt)};
  next.metric = 0.5 * (next.metric + next.metric.transpose());
  detail::require_flow_positive(next.metric, tol, "ricci_flow_step (result)");
  return next;
}

struct FlowRecord {
  double t = 0.0;
  Mat metric;
  Vec lambdas;  // Ricci eigenvalues relative to the metric at t
};

/// Integrates from t = 0 to t_end with fixed step dt, recording every
/// `every`-th state (the first and last are always recorded).
inline std::vector<FlowRecord> ricci_flow_trajectory(const MetricSpec& spec, const ChartPoint& p,
                                                     double dt, double t_end, int every = 1,
                                                     const Tolerances& tol = {}) {
  if (!(dt > 0.0) || !(t_end >= 0.0)) fail(ErrorKind::validation, "trajectory: need dt > 0 and t_end >= 0");
  if (every < 1) fail(ErrorKind::validation, "trajectory: record stride must be >= 1");
  const auto steps = static_cast<long>(std::llround(t_end / dt));
  FlowState state{0.0, metric_at(spec, p, 0.0, tol)};
  std::vector<FlowRecord> out;
  auto record = [&] {
    const Mat ric = pointwise_ricci(spec, p, state.metric, state.t, tol);
    out.push_back({state.t, state.metric, ricci_eigenproblem(ric, state.metric, tol).lambdas});
  };
  record();
  for (long i = 1; i <= steps; ++i) {
    state = ricci_flow_step(spec, state, dt, p, tol);
    state.t = static_cast<double>(i) * dt;
    if (i % every == 0 || i == steps) record();
  }
  return out;
}

/// g_ij = exp(-2 lambda_i t) delta_ij, no summation.
inline Mat closed_form_diagonal(const Vec& lambdas, double t) {
  const auto n = lambdas.size();
  Mat g = Mat::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) g(i, i) = std::exp(-2.0 * lambdas(i) * t);
  return g;
}

struct DiagonalFlowSolution {
  Vec lambdas;

  Mat operator()(double t) const { return closed_form_diagonal(lambdas, t); }
};

/// lambda_i = -(d_t g_ii) / (2 g_ii) from a time series of diagonal
/// metrics, by three-point central differences (non-uniform spacing
/// allowed), averaged over the interior samples.
inline Vec flow_eigenrate(const std::vector<std::pair<double, Mat>>& series) {
  if (series.size() < 3) fail(ErrorKind::validation, "flow_eigenrate: need at least three samples");
  const auto n = series.front().second.rows();
  for (std::size_t k = 0; k < series.size(); ++k) {
    const Mat& g = series[k].second;
    if (g.rows() != n || g.cols() != n) fail(ErrorKind::validation, "flow_eigenrate: inconsistent sizes");
    if ((g - Mat(g.diagonal().asDiagonal())).cwiseAbs().maxCoeff() != 0.0)
      fail(ErrorKind::validation, "flow_eigenrate: metric sample is not diagonal");
    if (!(g.diagonal().minCoeff() > 0.0))
      fail(ErrorKind::validation, "flow_eigenrate: non-positive diagonal entry");
    if (k > 0 && !(series[k].first > series[k - 1].first))
      fail(ErrorKind::validation, "flow_eigenrate: times must increase strictly");
  }
  Vec acc = Vec::Zero(n);
  for (std::size_t k = 1; k + 1 < series.size(); ++k) {
    const double h0 = series[k].first - series[k - 1].first;
    const double h1 = series[k + 1].first - series[k].first;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double gm = series[k - 1].second(i, i), g0 = series[k].second(i, i),
                   gp = series[k + 1].second(i, i);
      const double d = (-h1 / (h0 * (h0 + h1))) * gm + ((h1 - h0) / (h0 * h1)) * g0 +
                       (h0 / (h1 * (h0 + h1))) * gp;
      acc(i) += -d / (2.0 * g0);
    }
  }
  return acc / static_cast<double>(series.size() - 2);
}

struct TubeEigenMatrix {
  Mat matrix;
  double determinant = 0.0;
};

namespace detail {
inline void require_diag3(const Mat& m, const char* what) {
  if (m.rows() != 3 || m.cols() != 3 ||
      (m - Mat(m.diagonal().asDiagonal())).cwiseAbs().maxCoeff() != 0.0)
    fail(ErrorKind::validation, std::string(what) + " must be a diagonal 3x3 matrix");
}
}  // namespace detail

/// diag(2 lambda g11, d_t g22 + lambda g22, d_t g33 + lambda g33) and its
/// determinant.
inline TubeEigenMatrix tube_eigen_matrix(const Mat& g, const Mat& dtg, double lam) {
  detail::require_diag3(g, "tube_eigen_matrix: g");
  detail::require_diag3(dtg, "tube_eigen_matrix: dtg");
  Mat m = Mat::Zero(3, 3);
  m(0, 0) = 2.0 * lam * g(0, 0);
  m(1, 1) = dtg(1, 1) + lam * g(1, 1);
  m(2, 2) = dtg(2, 2) + lam * g(2, 2);
  return {m, m(0, 0) * m(1, 1) * m(2, 2)};
}

/// Every lambda with det M = 0: {0, -d_t g22 / g22, -d_t g33 / g33}. The
/// first root comes from the 2 lambda g11 entry, which has no d_t g11 term.
inline std::array<double, 3> tube_eigen_roots(const Mat& g, const Mat& dtg) {
  detail::require_diag3(g, "tube_eigen_roots: g");
  detail::require_diag3(dtg, "tube_eigen_roots: dtg");
  if (g(0, 0) == 0.0 || g(1, 1) == 0.0 || g(2, 2) == 0.0)
    fail(ErrorKind::degenerate_metric, "tube_eigen_roots: zero diagonal metric entry");
  return {0.0, -dtg(1, 1) / g(1, 1), -dtg(2, 2) / g(2, 2)};
}

namespace detail {
inline double guarded_tan(double theta, const Tolerances& tol) {
  const double c = std::cos(theta);
  if (std::abs(c) < tol.tangent_guard)
    fail(ErrorKind::singularity, "tan(theta) singular at theta = " + std::to_string(theta));
  return std::sin(theta) / c;
}
}  // namespace detail

/// lambda1 = 0, lambda2 = 2 v_r / r, lambda3 = lambda2 / 2 + omega1 tan(theta).
inline std::array<double, 3> tube_lyapunov_spectrum(const FlowField& flow, double r, double theta,
                                                    const Tolerances& tol = {}) {
  if (!(r > 0.0)) fail(ErrorKind::validation, "tube_lyapunov_spectrum: r must be > 0");
  const double tn = detail::guarded_tan(theta, tol);
  const double l2 = 2.0 * flow.v_r(r) / r;
  return {0.0, l2, 0.5 * l2 + flow.omega1 * tn};
}

}  // namespace ricciflux
