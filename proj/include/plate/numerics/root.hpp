#pragma once

#include <cmath>
#include <concepts>
#include <string>

#include "plate/errors.hpp"

namespace plate::numerics {

struct Bracket {
  double lo;
  double hi;
};

template <typename F>
concept ScalarFunction = requires(F f, double x) {
  { f(x) } -> std::convertible_to<double>;
};

/// Bracketed bisection. The returned point lies inside an interval of
/// relative width <= tol_rel on which f changes sign. Bisection is fully
/// deterministic; no secant polish is applied so results depend only on the
/// sign pattern of f.
template <ScalarFunction F>
double find_root(F&& f, Bracket b, double tol_rel = 1e-12, int max_iters = 400) {
  if (!(b.lo < b.hi)) {
    throw Error(ErrorCode::NoSignChange, "empty bracket");
  }
  double lo = b.lo;
  double hi = b.hi;
  double flo = f(lo);
  double fhi = f(hi);
  if (!std::isfinite(flo) || !std::isfinite(fhi)) {
    throw Error(ErrorCode::NonFinite, "non-finite value at bracket endpoint");
  }
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0)) {
    throw Error(ErrorCode::NoSignChange,
                "f(" + std::to_string(lo) + ") and f(" + std::to_string(hi) + ") share a sign");
  }
  const bool lo_negative = flo < 0.0;
  for (int it = 0; it < max_iters; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double scale = std::max(std::abs(lo), std::abs(hi));
    if (hi - lo <= tol_rel * scale || mid <= lo || mid >= hi) {
      return mid;
    }
    const double fm = f(mid);
    if (!std::isfinite(fm)) {
      throw Error(ErrorCode::NonFinite, "non-finite value at x=" + std::to_string(mid));
    }
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == lo_negative) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace plate::numerics
