#pragma once

#include <stdexcept>
#include <string>

namespace ricciflux {

/// Broad failure classes. The CLI maps these onto exit codes.
enum class ErrorKind {
  validation,        // bad input: parameters, config, preconditions
  domain,            // chart point outside the metric's domain
  degenerate_metric, // det g or smallest eigenvalue below tolerance
  stencil,           // finite-difference stencil leaves the domain
  degenerate_plane,  // sectional curvature of a (near) parallel pair
  singularity,       // tan(theta) or 1/tau blow-up
  positivity_loss,   // Ricci flow lost positive-definiteness
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// True for failures of the numerics rather than of the caller's input.
  bool numerical() const noexcept { return kind_ != ErrorKind::validation; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::validation: return "validation";
    case ErrorKind::domain: return "domain";
    case ErrorKind::degenerate_metric: return "degenerate-metric";
    case ErrorKind::stencil: return "stencil-out-of-domain";
    case ErrorKind::degenerate_plane: return "degenerate-plane";
    case ErrorKind::singularity: return "singularity";
    case ErrorKind::positivity_loss: return "positivity-loss";
  }
  return "unknown";
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace ricciflux
