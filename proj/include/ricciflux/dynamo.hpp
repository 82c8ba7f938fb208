#pragma once

// Lyapunov spectra from stretching factors and metrics, dynamo-action
// criteria for the flux tube flow, magnetic field growth factors, and the
// diffusive fast-dynamo eigenvalue on a surface of constant curvature.

#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "ricciflux/config.hpp"
#include "ricciflux/errors.hpp"
#include "ricciflux/flux_tube.hpp"
#include "ricciflux/linalg.hpp"
#include "ricciflux/ricci_flow.hpp"

namespace ricciflux {

struct LyapunovSpectrum {
  Vec Lambdas;  // stretching factors, > 0
  Vec lambdas;  // ln(Lambda_i) / (2t)
  Vec gammas;   // -lambda_i
  double horizon = 0.0;
};

/// lambda_i = ln(Lambda_i) / (2t), gamma_i = -lambda_i.
inline LyapunovSpectrum finite_time_lyapunov(const Vec& Lambdas, double t) {
  if (!(t > 0.0)) fail(ErrorKind::validation, "finite_time_lyapunov: horizon must be > 0");
  for (Eigen::Index i = 0; i < Lambdas.size(); ++i)
    if (!(Lambdas(i) > 0.0)) fail(ErrorKind::validation, "finite_time_lyapunov: stretching factors must be > 0");
  LyapunovSpectrum out;
  out.Lambdas = Lambdas;
  out.lambdas = Lambdas.array().log().matrix() / (2.0 * t);
  out.gammas = -out.lambdas;
  out.horizon = t;
  return out;
}

struct LyapunovLimit {
  double estimate = 0.0;
  double error_bar = 0.0;
};

/// Estimates lim ln(Lambda)/(2t) per direction as the finite-time value at
/// the last sample. The error bar is |d lambda/dt| * t_last with the slope
/// fitted by least squares over the last three samples, which equals the
/// residual c/t for lambda(t) = lambda_inf + c/t.
inline std::vector<LyapunovLimit> infinite_lyapunov(
    const std::vector<std::pair<Vec, double>>& series) {
  if (series.size() < 3) fail(ErrorKind::validation, "infinite_lyapunov: need at least three samples");
  const auto n = series.front().first.size();
  for (std::size_t k = 1; k < series.size(); ++k) {
    if (!(series[k].second > series[k - 1].second))
      fail(ErrorKind::validation, "infinite_lyapunov: times must increase strictly");
    if (series[k].first.size() != n) fail(ErrorKind::validation, "infinite_lyapunov: inconsistent sizes");
  }
  std::array<LyapunovSpectrum, 3> last;
  for (int k = 0; k < 3; ++k) {
    const auto& [L, t] = series[series.size() - 3 + static_cast<std::size_t>(k)];
    last[static_cast<std::size_t>(k)] = finite_time_lyapunov(L, t);
  }
  std::vector<LyapunovLimit> out(static_cast<std::size_t>(n));
  const double tbar = (last[0].horizon + last[1].horizon + last[2].horizon) / 3.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ybar = (last[0].lambdas(i) + last[1].lambdas(i) + last[2].lambdas(i)) / 3.0;
    double sxy = 0.0, sxx = 0.0;
    for (const auto& s : last) {
      sxy += (s.horizon - tbar) * (s.lambdas(i) - ybar);
      sxx += (s.horizon - tbar) * (s.horizon - tbar);
    }
    const double slope = sxy / sxx;
    out[static_cast<std::size_t>(i)] = {last[2].lambdas(i), std::abs(slope) * last[2].horizon};
  }
  return out;
}

/// g = sum_i Lambda_i e_i (x) e_i for an orthonormal frame (columns of `frame`).
inline Mat metric_from_lyapunov(const Vec& Lambdas, const Mat& frame, const Tolerances& tol = {}) {
  const auto n = Lambdas.size();
  if (frame.rows() != n || frame.cols() != n)
    fail(ErrorKind::validation, "metric_from_lyapunov: frame size mismatch");
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(Lambdas(i) > 0.0)) fail(ErrorKind::validation, "metric_from_lyapunov: stretching factors must be > 0");
  const double gram_dev = (frame.transpose() * frame - Mat::Identity(n, n)).cwiseAbs().maxCoeff();
  if (gram_dev > tol.frame_ortho)
    fail(ErrorKind::validation, "metric_from_lyapunov: frame is not orthonormal");
  Mat g = Mat::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) g += Lambdas(i) * frame.col(i) * frame.col(i).transpose();
  return 0.5 * (g + g.transpose());
}

struct DynamoVerdict {
  bool satisfied = false;
  /// |omega1 tan(theta)| - |v_r / r|, the published constraint.
  double margin = 0.0;
  /// |omega1 tan(theta)| - |lambda2| with lambda2 = 2 v_r / r from the spectrum.
  double margin_spectrum = 0.0;
  bool satisfied_spectrum = false;
  bool stretch_ok = false;   // lambda3 > 0
  bool contract_ok = false;  // lambda2 < 0
};

inline DynamoVerdict dynamo_constraint(const FlowField& flow, double theta, double r,
                                       const Tolerances& tol = {}) {
  const auto spec = tube_lyapunov_spectrum(flow, r, theta, tol);
  const double lhs = std::abs(flow.omega1 * detail::guarded_tan(theta, tol));
  DynamoVerdict v;
  v.margin = lhs - std::abs(flow.v_r(r) / r);
  v.satisfied = v.margin >= 0.0;
  v.margin_spectrum = lhs - std::abs(spec[1]);
  v.satisfied_spectrum = v.margin_spectrum >= 0.0;
  v.stretch_ok = spec[2] > 0.0;
  v.contract_ok = spec[1] < 0.0;
  return v;
}

struct FieldGrowth {
  double rate_theta = 0.0;     // v_r / r
  double rate_s = 0.0;         // v_r / r + omega1 v_r tan(theta)
  double amplification_theta = 1.0;
  double amplification_s = 1.0;
};

/// B_theta ~ exp((v_r/r) t), B_s ~ exp((v_r/r + omega1 v_r tan(theta)) t).
inline FieldGrowth field_growth(const FlowField& flow, double theta, double r, double t,
                                const Tolerances& tol = {}) {
  if (!(r > 0.0)) fail(ErrorKind::validation, "field_growth: r must be > 0");
  const double tn = detail::guarded_tan(theta, tol);
  const double vr = flow.v_r(r);
  FieldGrowth g;
  g.rate_theta = vr / r;
  g.rate_s = vr / r + flow.omega1 * vr * tn;
  g.amplification_theta = std::exp(g.rate_theta * t);
  g.amplification_s = std::exp(g.rate_s * t);
  return g;
}

/// lambda_eps = (-eps (1 + kappa^2) + sqrt(eps^2 (1 - kappa^2)^2 - 4 kappa)) / 2
/// with the principal complex square root. Re(lambda) is the growth rate.
inline std::complex<double> chicone_latushkin_lambda(double eps, double kappa) {
  if (!(eps >= 0.0)) fail(ErrorKind::validation, "chicone_latushkin_lambda: eps must be >= 0");
  const double a = 1.0 - kappa * kappa;
  const std::complex<double> disc(eps * eps * a * a - 4.0 * kappa, 0.0);
  return 0.5 * (-eps * (1.0 + kappa * kappa) + std::sqrt(disc));
}

/// eps -> 0 limit: i sqrt(kappa) for kappa >= 0, sqrt(-kappa) (real) for kappa < 0.
inline std::complex<double> ideal_lambda(double kappa) {
  if (kappa >= 0.0) return {0.0, std::sqrt(kappa)};
  return {std::sqrt(-kappa), 0.0};
}

/// Geodesic-flow fast dynamo: requires constant negative curvature and
/// Re_m > sqrt(-kappa).
inline bool fast_dynamo_condition(double re_m, double kappa) {
  if (!(re_m > 0.0)) fail(ErrorKind::validation, "fast_dynamo_condition: Re_m must be > 0");
  return kappa < 0.0 && re_m > std::sqrt(-kappa);
}

/// Optional identification eps = 1 / Re_m.
inline double epsilon_from_reynolds(double re_m) {
  if (!(re_m > 0.0)) fail(ErrorKind::validation, "epsilon_from_reynolds: Re_m must be > 0");
  return 1.0 / re_m;
}

struct LyapunovFromRicci {
  Vec gammas;
  std::vector<int> flagged;  // indices with lambda_i > 0, contrary to lambda_i <= 0
};

/// gamma_i = -lambda_i, flagging positive Ricci eigenvalues.
inline LyapunovFromRicci ricci_to_lyapunov(const Vec& ricci_lambdas) {
  LyapunovFromRicci out;
  out.gammas = -ricci_lambdas;
  for (Eigen::Index i = 0; i < ricci_lambdas.size(); ++i)
    if (ricci_lambdas(i) > 0.0) out.flagged.push_back(static_cast<int>(i));
  return out;
}

}  // namespace ricciflux
