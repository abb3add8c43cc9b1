#include "mecsol/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace mecsol::numerics {

namespace {
constexpr double kInvE = 0.36787944117144232160;  // 1/e
constexpr double kInf = std::numeric_limits<double>::infinity();

// Series around the branch point x = -1/e in p = sqrt(2(e*x + 1)).
// Corless et al. (4.22), enough terms for the region |p| < ~1e-3.
double branch_series(double p) {
  return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p -
         43.0 / 540.0 * p * p * p * p;
}
}  // namespace

double lambert_w0(double x) {
  if (std::isnan(x)) return x;
  if (x < -kInvE) {
    if (x < -kInvE - 1e-12)
      throw std::domain_error("lambert_w0: argument below -1/e");
    x = -kInvE;
  }
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return x;

  const double ex1 = std::exp(1.0) * x + 1.0;  // e*x + 1 >= 0
  if (ex1 <= 0.0) return -1.0;

  double w;
  if (ex1 < 1e-6) {
    // So close to the branch point that Halley's denominator degenerates;
    // the series alone already satisfies the residual bound here because
    // d(we^w)/dw vanishes at w = -1.
    return branch_series(std::sqrt(2.0 * ex1));
  } else if (x < -0.25) {
    w = branch_series(std::sqrt(2.0 * ex1));
  } else if (x < 1.0) {
    // Pade-like seed around zero.
    w = x * (1.0 - x + 1.5 * x * x) / (1.0 + 0.5 * x * (1.0 + x));
  } else {
    const double l1 = std::log(x);
    const double l2 = std::log(l1 > 0 ? l1 : 1e-300);
    w = l1 - l2 + (l1 > 1.0 ? l2 / l1 : 0.0);
  }

  // Halley iteration.
  for (int i = 0; i < 40; ++i) {
    const double ew = std::exp(w);
    const double wew = w * ew;
    const double r = wew - x;
    const double wp1 = w + 1.0;
    const double denom = ew * wp1 - (w + 2.0) * r / (2.0 * wp1);
    if (denom == 0.0) break;
    const double dw = r / denom;
    w -= dw;
    if (std::abs(dw) <= 1e-16 * (1.0 + std::abs(w))) break;
  }
  return std::max(w, -1.0);
}

double bisect(const std::function<double(double)>& f, double lo, double hi,
              const BisectConfig& cfg) {
  if (!(lo < hi)) throw std::invalid_argument("bisect: lo must be < hi");
  double flo = f(lo);
  double fhi = f(hi);
  const double fscale = std::max({std::abs(flo), std::abs(fhi), 1.0});
  if (std::abs(flo) <= cfg.rel_tol * fscale) return lo;
  if (std::abs(fhi) <= cfg.rel_tol * fscale) return hi;
  if ((flo > 0) == (fhi > 0))
    throw NoBracketError(flo, fhi, "bisect: endpoints do not bracket a root");

  double mid = 0.5 * (lo + hi);
  for (int i = 0; i < cfg.max_iters; ++i) {
    mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (std::abs(fm) <= cfg.rel_tol * fscale || (hi - lo) <= cfg.abs_tol)
      return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return mid;
}

Min1DResult golden_section(const std::function<double(double)>& f, double lo,
                           double hi, double tol, int max_iters) {
  constexpr double kPhi = 0.61803398874989484820;
  double a = lo, b = hi;
  double x1 = b - kPhi * (b - a);
  double x2 = a + kPhi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < max_iters && (b - a) > tol; ++i) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kPhi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kPhi * (b - a);
      f2 = f(x2);
    }
  }
  const double xm = 0.5 * (a + b);
  const double fm = f(xm);
  Min1DResult best{xm, fm};
  if (f1 < best.min) best = {x1, f1};
  if (f2 < best.min) best = {x2, f2};
  return best;
}

Min1DResult minimize_1d(const std::function<double(double)>& f,
                        const Search1DConfig& cfg) {
  if (!(cfg.lo < cfg.hi))
    throw std::invalid_argument("minimize_1d: lo must be < hi");
  if (cfg.grid_points < 3)
    throw std::invalid_argument("minimize_1d: grid_points must be >= 3");

  const int n = cfg.grid_points;
  std::vector<double> xs(n), fs(n);
  int best = -1;
  for (int i = 0; i < n; ++i) {
    xs[i] = cfg.lo + (cfg.hi - cfg.lo) * double(i) / double(n - 1);
    fs[i] = f(xs[i]);
    if (std::isfinite(fs[i]) && (best < 0 || fs[i] < fs[best])) best = i;
  }
  if (best < 0)
    throw std::runtime_error("minimize_1d: no feasible point on the grid");

  double a = xs[std::max(0, best - 1)];
  double b = xs[std::min(n - 1, best + 1)];
  Min1DResult refined{xs[best], fs[best]};
  if (b > a) {
    const auto g = golden_section(f, a, b, cfg.refine_tol);
    if (g.min < refined.min) refined = g;
  }
  return refined;
}

}  // namespace mecsol::numerics
