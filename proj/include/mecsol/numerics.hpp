#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace mecsol::numerics {

/// Thrown by bisect() when f(lo) and f(hi) do not bracket a root.
/// Carries both endpoint values so callers can report what went wrong.
struct NoBracketError : std::runtime_error {
  double f_lo;
  double f_hi;
  NoBracketError(double flo, double fhi, const std::string& what_arg)
      : std::runtime_error(what_arg), f_lo(flo), f_hi(fhi) {}
};

struct BisectConfig {
  double abs_tol = 1e-14;   // interval width stop
  double rel_tol = 1e-13;   // |f| stop, relative to f scale
  int max_iters = 200;
};

struct Search1DConfig {
  int grid_points = 64;
  double refine_tol = 1e-10;  // interval width stop for golden refinement
  double lo = 0.0;
  double hi = 1.0;
};

/// Principal branch W0 of the Lambert W function: returns w >= -1 with
/// w * exp(w) = x for x >= -1/e. Inputs within 1e-12 below -1/e are
/// clamped to the branch point; anything lower throws std::domain_error.
///
/// Series seed near the branch point and near zero, log-log seed for
/// large arguments, then Halley iteration to double precision.
double lambert_w0(double x);

/// Root of a monotone function f on [lo, hi] by bisection.
/// Requires sign(f(lo)) != sign(f(hi)), or one endpoint already within
/// tolerance of zero. Stops when |f| <= rel_tol * scale or the interval
/// shrinks below abs_tol.
double bisect(const std::function<double(double)>& f, double lo, double hi,
              const BisectConfig& cfg = {});

struct Min1DResult {
  double argmin;
  double min;
};

/// Bounded 1-D minimization: scan an inclusive grid of cfg.grid_points
/// over [lo, hi], then golden-section refine the bracket around the best
/// grid cell. f may return +inf for infeasible points; if the whole grid
/// is infeasible a std::runtime_error is thrown. Ties keep the lowest
/// grid point, so minimizing a constant returns lo.
Min1DResult minimize_1d(const std::function<double(double)>& f,
                        const Search1DConfig& cfg);

/// Golden-section refinement on [lo, hi] for a unimodal f. Used by
/// minimize_1d and directly by callers that already hold a bracket.
Min1DResult golden_section(const std::function<double(double)>& f, double lo,
                           double hi, double tol, int max_iters = 200);

}  // namespace mecsol::numerics
