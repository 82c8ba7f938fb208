#pragma once

#include <cmath>
#include <limits>

namespace ricciflux {

/// Numerical tolerances shared by every module. Each operation takes a
/// `const Tolerances&` defaulting to `Tolerances{}`; override per call.
struct Tolerances {
  /// First-derivative central-difference step, relative: cbrt(eps).
  double fd_step = std::cbrt(std::numeric_limits<double>::epsilon());
  /// Step for second derivatives (one Richardson level): eps^(1/6).
  double fd_step2 = std::pow(std::numeric_limits<double>::epsilon(), 1.0 / 6.0);
  /// Positive-definiteness: min eigenvalue must exceed this times the max.
  double pd_ratio = 1e-12;
  /// Absolute floor on |det g|.
  double det_floor = 1e-300;
  /// S(X,Y) / (|X|^2 |Y|^2) below this is a degenerate plane.
  double plane_ratio = 1e-12;
  /// |cos(theta)| below this is treated as the tan(theta) singularity.
  double tangent_guard = 1e-12;
  /// Relative tolerance for the adaptive Simpson twist quadrature.
  double quad_rel = 1e-10;
  /// Orthonormality tolerance (Gram deviation) for frames.
  double frame_ortho = 1e-10;
  /// Symmetry check on evaluated metrics, relative to the largest entry.
  double symmetry_rel = 1e-12;
  /// Jacobi sweep limit and off-diagonal convergence threshold.
  int jacobi_max_sweeps = 100;
  double jacobi_rel = 1e-15;
};

}  // namespace ricciflux
