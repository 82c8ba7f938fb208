#pragma once

// Small dense linear algebra for 2x2 / 3x3 chart quantities.
//
// Storage is Eigen with a compile-time upper bound of 3 so nothing
// allocates; the symmetric eigensolver is a cyclic Jacobi written here.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ricciflux/config.hpp"
#include "ricciflux/errors.hpp"

namespace ricciflux {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;
using Vec3 = Eigen::Vector3d;

struct SymmetricEigen {
  Vec values;   // ascending
  Mat vectors;  // columns, orthonormal
  int sweeps = 0;
};

namespace detail {

inline double off_diagonal_norm(const Mat& a) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

/// Sort eigenpairs ascending; flip each vector so its largest-magnitude
/// component is positive.
inline void sort_and_fix_signs(Vec& values, Mat& vectors) {
  const auto n = values.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return values(a) < values(b);
  });
  Vec v(n);
  Mat m(vectors.rows(), n);
  for (Eigen::Index k = 0; k < n; ++k) {
    v(k) = values(order[static_cast<std::size_t>(k)]);
    m.col(k) = vectors.col(order[static_cast<std::size_t>(k)]);
    Eigen::Index imax = 0;
    m.col(k).cwiseAbs().maxCoeff(&imax);
    if (m(imax, k) < 0.0) m.col(k) = -m.col(k);
  }
  values = v;
  vectors = m;
}

}  // namespace detail

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix.
inline SymmetricEigen jacobi_eigen(const Mat& sym, const Tolerances& tol = {}) {
  const auto n = sym.rows();
  if (n != sym.cols() || n == 0)
    fail(ErrorKind::validation, "jacobi_eigen: matrix must be square and non-empty");
  if (!sym.allFinite())
    fail(ErrorKind::validation, "jacobi_eigen: non-finite matrix entry");

  Mat a = 0.5 * (sym + sym.transpose());
  Mat v = Mat::Identity(n, n);
  const double scale = std::max(a.norm(), std::numeric_limits<double>::min());

  int sweep = 0;
  for (; sweep < tol.jacobi_max_sweeps; ++sweep) {
    if (detail::off_diagonal_norm(a) <= tol.jacobi_rel * scale) break;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  SymmetricEigen out;
  out.values = a.diagonal();
  out.vectors = v;
  out.sweeps = sweep;
  detail::sort_and_fix_signs(out.values, out.vectors);
  return out;
}

/// Throws degenerate_metric unless `g` is symmetric positive-definite with
/// smallest eigenvalue above `pd_ratio` times the largest.
inline void require_positive_definite(const Mat& g, const Tolerances& tol = {},
                                      const char* where = "metric") {
  if (!g.allFinite())
    fail(ErrorKind::degenerate_metric, std::string(where) + ": non-finite entry");
  const double asym = (g - g.transpose()).cwiseAbs().maxCoeff();
  const double big = std::max(g.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  if (asym > tol.symmetry_rel * big)
    fail(ErrorKind::validation, std::string(where) + ": matrix is not symmetric");
  const auto eig = jacobi_eigen(g, tol);
  const double lo = eig.values(0);
  const double hi = eig.values(eig.values.size() - 1);
  if (!(hi > 0.0) || !(lo > tol.pd_ratio * hi))
    fail(ErrorKind::degenerate_metric,
         std::string(where) + ": not positive-definite (eigenvalues " +
             std::to_string(lo) + " .. " + std::to_string(hi) + ")");
  if (std::abs(g.determinant()) < tol.det_floor)
    fail(ErrorKind::degenerate_metric, std::string(where) + ": determinant below tolerance");
}

/// Lower Cholesky factor of a positive-definite matrix.
inline Mat cholesky_lower(const Mat& g) {
  const auto n = g.rows();
  Mat l = Mat::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = g(j, j);
    for (Eigen::Index k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) fail(ErrorKind::degenerate_metric, "cholesky: matrix not positive-definite");
    l(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = g(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

/// Solves A x = lambda B x for symmetric A and positive-definite B.
/// Eigenvectors are B-orthonormal: x_i^T B x_j = delta_ij.
inline SymmetricEigen generalized_eigen(const Mat& a, const Mat& b, const Tolerances& tol = {}) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols())
    fail(ErrorKind::validation, "generalized_eigen: shape mismatch");
  require_positive_definite(b, tol, "generalized_eigen");
  const Mat l = cholesky_lower(b);
  // C = L^-1 A L^-T
  const Mat linv_a = l.triangularView<Eigen::Lower>().solve(a);
  const Mat c = l.triangularView<Eigen::Lower>().solve(linv_a.transpose()).transpose();
  auto eig = jacobi_eigen(c, tol);
  Mat x = l.transpose().triangularView<Eigen::Upper>().solve(eig.vectors);
  Vec values = eig.values;
  detail::sort_and_fix_signs(values, x);
  eig.values = values;
  eig.vectors = x;
  return eig;
}

}  // namespace ricciflux
