#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance runner. None of these reuse the code paths they check.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "plate/numerics/sym_eig.hpp"
#include "plate/weights.hpp"

namespace oracle {

/// Number of eigenvalues of A below x, from the signs of the pivots of
/// A - x I under Gaussian elimination with symmetric pivoting avoided
/// (Sylvester's law of inertia; a zero pivot is nudged off zero).
inline int count_below(const plate::numerics::SymMatrix& a, double x) {
  const std::size_t n = a.size();
  std::vector<double> m(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m[i * n + j] = a(i, j) - (i == j ? x : 0.0);
  }
  int negatives = 0;
  for (std::size_t k = 0; k < n; ++k) {
    double piv = m[k * n + k];
    if (piv == 0.0) piv = 1e-300;
    if (piv < 0.0) ++negatives;
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = m[i * n + k] / piv;
      for (std::size_t j = k + 1; j < n; ++j) m[i * n + j] -= f * m[k * n + j];
    }
  }
  return negatives;
}

/// Eigenvalues of a symmetric matrix by bisection on the inertia count.
inline std::vector<double> eigenvalues_by_bisection(const plate::numerics::SymMatrix& a) {
  const std::size_t n = a.size();
  double radius = 0.0;  // Gershgorin
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    for (std::size_t j = 0; j < n; ++j) r += std::abs(a(i, j));
    radius = std::max(radius, r);
  }
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    double lo = -radius - 1.0;
    double hi = radius + 1.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (count_below(a, mid) > static_cast<int>(k)) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    out[k] = 0.5 * (lo + hi);
  }
  return out;
}

inline plate::numerics::SymMatrix random_symmetric(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  plate::numerics::SymMatrix a(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) a.set(i, j, u(rng));
  }
  return a;
}

/// A random admissible weight: alpha/beta bands in x, in y, or crossed,
/// with band lengths adjusted so the mass is exactly |Omega|.
inline plate::Weight random_band_weight(const plate::PlateConfig& cfg, std::mt19937_64& rng) {
  using plate::Interval;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double pi = std::numbers::pi;
  const double frac = (1.0 - cfg.alpha) / (cfg.beta - cfg.alpha);  // beta share of the area
  const int kind = static_cast<int>(u(rng) * 3.0);
  auto split = [&](double length, double total, int bands, double lo) {
    // `bands` intervals of total length `length` placed in [lo, lo + total)
    // with random gaps.
    std::vector<double> w(bands), g(bands + 1);
    double sw = 0.0, sg = 0.0;
    for (auto& v : w) sw += (v = 0.2 + u(rng));
    for (auto& v : g) sg += (v = 0.05 + u(rng));
    std::vector<Interval> ivs;
    double pos = lo + g[0] / sg * (total - length);
    for (int b = 0; b < bands; ++b) {
      const double len = w[static_cast<std::size_t>(b)] / sw * length;
      ivs.push_back({pos, pos + len});
      pos += len + g[static_cast<std::size_t>(b) + 1] / sg * (total - length);
    }
    return ivs;
  };
  const int bands = 1 + static_cast<int>(u(rng) * 4.0);
  if (kind == 0) return plate::x_bands(split(frac * pi, pi, bands, 0.0), cfg.beta, cfg.alpha, cfg, "random_x");
  if (kind == 1) {
    // symmetric y bands: mirror bands placed in (0, ell)
    auto half = split(frac * cfg.ell, cfg.ell, bands, 0.0);
    std::vector<Interval> ivs;
    for (auto it = half.rbegin(); it != half.rend(); ++it) ivs.push_back({-it->hi, -it->lo});
    for (const auto& iv : half) ivs.push_back(iv);
    std::sort(ivs.begin(), ivs.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    // merge a band touching y = 0 with its mirror
    std::vector<Interval> merged;
    for (const auto& iv : ivs) {
      if (!merged.empty() && iv.lo <= merged.back().hi) {
        merged.back().hi = std::max(merged.back().hi, iv.hi);
      } else {
        merged.push_back(iv);
      }
    }
    return plate::y_bands(merged, cfg.beta, cfg.alpha, cfg, "random_y");
  }
  // cross (min rule): beta on the product of x-bands of fraction fx and a
  // central y-band of fraction fy with fx fy = frac.
  const double fy = std::sqrt(frac) + (1.0 - std::sqrt(frac)) * u(rng) * 0.9;
  const double fx = frac / fy;
  plate::Weight w = plate::uniform_weight(cfg);
  w.kind = plate::WeightKind::Cross;
  w.combine = plate::CombineRule::Min;
  w.x_intervals = split(fx * pi, pi, bands, 0.0);
  w.y_intervals = {{-fy * cfg.ell, fy * cfg.ell}};
  w.inside = cfg.beta;
  w.outside = cfg.alpha;
  w.label = "random_cross";
  return w;
}

/// Published homogeneous eigenvalues at sigma = 0.2, ell = pi/150
/// (three significant digits).
inline constexpr std::array<double, 12> kTable1Mu = {9.60e-1, 1.54e1, 7.78e1, 2.46e2, 6.00e2, 1.24e3,
                                                     2.31e3,  3.93e3, 6.30e3, 9.61e3, 1.41e4, 1.99e4};
inline constexpr std::array<double, 12> kTable1Nu = {1.09e4, 4.38e4, 9.86e4, 1.75e5, 2.74e5, 3.95e5,
                                                     5.38e5, 7.04e5, 8.93e5, 1.10e6, 1.34e6, 1.60e6};

/// Rounds to three significant digits.
inline double sig3(double v) {
  if (v == 0.0) return 0.0;
  const double e = std::floor(std::log10(std::abs(v)));
  const double scale = std::pow(10.0, 2.0 - e);
  return std::round(v * scale) / scale;
}

}  // namespace oracle
