#pragma once

// Galerkin discretisation of the weighted problem in the homogeneous
// eigenbasis: with D = diag(mu_n(1)) and C^p_{nm} = int p z_n z_m the
// longitudinal problem is D a = mu C a (same for torsional modes with
// theta_n). It is solved as the standard symmetric problem
//   M b = (1/mu) b,  M = D^{-1/2} C D^{-1/2},  a = sqrt(mu) D^{-1/2} b,
// which normalises a^T C a = 1.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "plate/errors.hpp"
#include "plate/numerics/parallel.hpp"
#include "plate/numerics/quadrature.hpp"
#include "plate/numerics/sym_eig.hpp"
#include "plate/spectrum.hpp"
#include "plate/weights.hpp"

namespace plate {

using numerics::SymMatrix;

/// Coefficient vectors are stored column-major: coeffs[k * N + n] is the
/// n-th homogeneous coefficient of the k-th weighted eigenfunction.
struct GalerkinSpectrum {
  std::vector<double> mu_p;
  std::vector<double> nu_p;
  std::vector<double> a_coeffs;
  std::vector<double> b_coeffs;
  int N = 0;

  const std::vector<double>& values(Parity p) const { return p == Parity::Even ? mu_p : nu_p; }
  std::span<const double> coeffs(Parity p, int index) const {
    const auto& c = p == Parity::Even ? a_coeffs : b_coeffs;
    return std::span<const double>(c).subspan(static_cast<std::size_t>(index) * N, static_cast<std::size_t>(N));
  }
};

namespace detail {

/// int_{x0}^{x1} sin(a x) sin(b x) dx, written with half-angle products so
/// thin cells keep full relative accuracy.
inline double sin_product_integral(int a, int b, double x0, double x1) {
  auto cos_integral = [x0, x1](double k) {
    if (k == 0.0) return x1 - x0;
    return 2.0 * std::cos(0.5 * k * (x0 + x1)) * std::sin(0.5 * k * (x1 - x0)) / k;
  };
  return 0.5 * (cos_integral(static_cast<double>(a - b)) - cos_integral(static_cast<double>(a + b)));
}

/// Gauss nodes over a y-cell, dense enough for products of the basis profiles.
inline numerics::NodeSet y_cell_nodes(double y0, double y1, double max_wave, double ell) {
  const auto base = profile_rule(max_wave, ell);
  const int panels = std::max(1, static_cast<int>(std::ceil(base.panels * (y1 - y0) / (2.0 * ell))));
  return numerics::nodes(numerics::QuadratureRule::gauss(16, {}, panels), {y0, y1});
}

inline double max_wave(std::span<const HomEigenpair> basis) {
  double w = 0.0;
  for (const auto& e : basis) w = std::max({w, e.c, e.c_bar});
  return w;
}

/// Per-cell separable factors X_nm(ix) and Y_nm(iy) for the upper triangle
/// (n <= m), packed by pair index.
struct CellFactors {
  std::size_t pairs = 0;
  std::vector<double> x;  // x[ix * pairs + pair]
  std::vector<double> y;  // y[iy * pairs + pair]
};

inline std::size_t pair_index(std::size_t n, std::size_t m, std::size_t N) {
  // n <= m; row-major upper triangle.
  return n * N - n * (n - 1) / 2 + (m - n);
}

inline CellFactors cell_factors(std::span<const HomEigenpair> basis, const std::vector<double>& x_edges,
                                const std::vector<double>& y_edges, double ell) {
  const std::size_t N = basis.size();
  CellFactors f;
  f.pairs = N * (N + 1) / 2;
  const std::size_t ncx = x_edges.size() - 1;
  const std::size_t ncy = y_edges.size() - 1;
  f.x.assign(ncx * f.pairs, 0.0);
  f.y.assign(ncy * f.pairs, 0.0);
  for (std::size_t ix = 0; ix < ncx; ++ix) {
    for (std::size_t n = 0; n < N; ++n) {
      for (std::size_t m = n; m < N; ++m) {
        f.x[ix * f.pairs + pair_index(n, m, N)] =
            sin_product_integral(basis[n].mode.m, basis[m].mode.m, x_edges[ix], x_edges[ix + 1]);
      }
    }
  }
  const double wave = max_wave(basis);
  numerics::parallel_for(ncy, [&](std::size_t iy) {
    const auto ns = y_cell_nodes(y_edges[iy], y_edges[iy + 1], wave, ell);
    std::vector<double> vals(N * ns.x.size());
    for (std::size_t n = 0; n < N; ++n) {
      for (std::size_t q = 0; q < ns.x.size(); ++q) vals[n * ns.x.size() + q] = profile(basis[n], ns.x[q]);
    }
    for (std::size_t n = 0; n < N; ++n) {
      for (std::size_t m = n; m < N; ++m) {
        double s = 0.0;
        for (std::size_t q = 0; q < ns.x.size(); ++q) {
          s += ns.w[q] * vals[n * ns.x.size() + q] * vals[m * ns.x.size() + q];
        }
        f.y[iy * f.pairs + pair_index(n, m, N)] = s;
      }
    }
  });
  return f;
}

}  // namespace detail

/// C^p_{nm} = int_Omega p z_n z_m over the first N basis functions of the
/// requested parity. Exact in x (closed form per cell), Gauss in y.
inline SymMatrix assemble_mass(const Weight& w, const HomSpectrum& spectrum, Parity parity, int N) {
  const auto& full = spectrum.basis(parity);
  if (N < 1 || N > static_cast<int>(full.size())) {
    throw Error(ErrorCode::InvalidConfig, "truncation exceeds the homogeneous spectrum length");
  }
  const std::span<const HomEigenpair> basis(full.data(), static_cast<std::size_t>(N));
  const CellPartition cp = partition(w);
  const auto f = detail::cell_factors(basis, cp.x_edges, cp.y_edges, w.ell);
  const std::size_t ncx = cp.nx_cells();
  const std::size_t ncy = cp.ny_cells();
  std::vector<double> packed(f.pairs, 0.0);
  numerics::parallel_for(f.pairs, [&](std::size_t pr) {
    double s = 0.0;
    for (std::size_t ix = 0; ix < ncx; ++ix) {
      double col = 0.0;
      for (std::size_t iy = 0; iy < ncy; ++iy) col += cp.value(ix, iy) * f.y[iy * f.pairs + pr];
      s += f.x[ix * f.pairs + pr] * col;
    }
    packed[pr] = s;
  });
  SymMatrix C(static_cast<std::size_t>(N));
  for (std::size_t n = 0; n < static_cast<std::size_t>(N); ++n) {
    for (std::size_t m = n; m < static_cast<std::size_t>(N); ++m) {
      const double v = packed[detail::pair_index(n, m, static_cast<std::size_t>(N))];
      if (!std::isfinite(v)) throw Error(ErrorCode::QuadratureFailure, "non-finite mass matrix entry");
      C.set(n, m, v);
    }
  }
  return C;
}

struct ParitySolution {
  std::vector<double> values;
  std::vector<double> coeffs;
};

inline ParitySolution solve_parity(const SymMatrix& C, std::span<const HomEigenpair> basis) {
  const std::size_t N = C.size();
  std::vector<double> dinv(N);
  for (std::size_t n = 0; n < N; ++n) {
    if (!(basis[n].lambda > 0.0)) throw Error(ErrorCode::SingularMass, "non-positive homogeneous eigenvalue");
    dinv[n] = 1.0 / std::sqrt(basis[n].lambda);
  }
  SymMatrix M(N);
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t m = n; m < N; ++m) M.set(n, m, dinv[n] * C(n, m) * dinv[m]);
  }
  const auto es = numerics::sym_eig(M);
  ParitySolution out;
  out.values.resize(N);
  out.coeffs.resize(N * N);
  for (std::size_t k = 0; k < N; ++k) {
    // Largest eigenvalue of M <-> smallest plate eigenvalue.
    const std::size_t src = N - 1 - k;
    const double inv = es.values[src];
    if (!(inv > 0.0)) throw Error(ErrorCode::SingularMass, "mass matrix is not positive definite");
    const double mu = 1.0 / inv;
    out.values[k] = mu;
    const auto b = es.vector(src);
    const double scale = std::sqrt(mu);
    for (std::size_t n = 0; n < N; ++n) out.coeffs[k * N + n] = scale * dinv[n] * b[n];
  }
  return out;
}

inline GalerkinSpectrum solve_weighted(const Weight& w, const HomSpectrum& spectrum, int N) {
  if (N < 1) throw Error(ErrorCode::InvalidConfig, "N must be >= 1");
  GalerkinSpectrum gs;
  gs.N = N;
  for (Parity p : {Parity::Even, Parity::Odd}) {
    const SymMatrix C = assemble_mass(w, spectrum, p, N);
    const std::span<const HomEigenpair> basis(spectrum.basis(p).data(), static_cast<std::size_t>(N));
    auto sol = solve_parity(C, basis);
    if (p == Parity::Even) {
      gs.mu_p = std::move(sol.values);
      gs.a_coeffs = std::move(sol.coeffs);
    } else {
      gs.nu_p = std::move(sol.values);
      gs.b_coeffs = std::move(sol.coeffs);
    }
  }
  return gs;
}

/// sum_n coeffs[n] * basis_n(x, y).
inline double eval_combination(std::span<const double> coeffs, std::span<const HomEigenpair> basis, double x,
                               double y) {
  double s = 0.0;
  for (std::size_t n = 0; n < coeffs.size(); ++n) s += coeffs[n] * eval_eigenfunction(basis[n], x, y);
  return s;
}

enum class SampleMode { Point, CellMeanSquare };

/// Point samples of the truncated eigenfunction (parity of the mode), or the
/// exact mean of its square over each node's dual cell (an even field).
inline GridField reconstruct(const GalerkinSpectrum& gs, const HomSpectrum& spectrum, Parity parity, int index,
                             int nx, int ny, SampleMode mode = SampleMode::Point) {
  if (index < 0 || index >= gs.N) throw Error(ErrorCode::InvalidConfig, "eigenfunction index out of range");
  const auto coeffs = gs.coeffs(parity, index);
  const std::span<const HomEigenpair> basis(spectrum.basis(parity).data(), static_cast<std::size_t>(gs.N));
  const double ell = basis.front().ell;
  if (mode == SampleMode::Point) {
    GridField g(nx, ny, ell, parity);
    numerics::parallel_for(static_cast<std::size_t>(nx), [&](std::size_t i) {
      for (int j = 0; j < ny; ++j) g.at(static_cast<int>(i), j) = eval_combination(coeffs, basis, g.x(static_cast<int>(i)), g.y(j));
    });
    return g;
  }
  GridField g(nx, ny, ell, Parity::Even);
  const auto xe = g.x_edges();
  const auto ye = g.y_edges();
  const auto f = detail::cell_factors(basis, xe, ye, ell);
  const std::size_t N = basis.size();
  std::vector<double> cc(f.pairs);
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t m = n; m < N; ++m) cc[detail::pair_index(n, m, N)] = (n == m ? 1.0 : 2.0) * coeffs[n] * coeffs[m];
  }
  numerics::parallel_for(static_cast<std::size_t>(nx), [&](std::size_t i) {
    for (int j = 0; j < ny; ++j) {
      double s = 0.0;
      for (std::size_t pr = 0; pr < f.pairs; ++pr) s += cc[pr] * f.x[i * f.pairs + pr] * f.y[static_cast<std::size_t>(j) * f.pairs + pr];
      g.at(static_cast<int>(i), j) = s / g.cell_area(static_cast<int>(i), j);
    }
  });
  return g;
}

/// Homogeneous eigenfunction (one basis element) as a Galerkin coefficient
/// vector, so basis modes can be fed through the same machinery.
inline GalerkinSpectrum homogeneous_solution(const HomSpectrum& spectrum, int N) {
  GalerkinSpectrum gs;
  gs.N = N;
  gs.a_coeffs.assign(static_cast<std::size_t>(N) * N, 0.0);
  gs.b_coeffs.assign(static_cast<std::size_t>(N) * N, 0.0);
  for (int k = 0; k < N; ++k) {
    gs.mu_p.push_back(spectrum.mu[static_cast<std::size_t>(k)].lambda);
    gs.nu_p.push_back(spectrum.nu[static_cast<std::size_t>(k)].lambda);
    gs.a_coeffs[static_cast<std::size_t>(k) * N + k] = 1.0;
    gs.b_coeffs[static_cast<std::size_t>(k) * N + k] = 1.0;
  }
  return gs;
}

/// p-weighted inner product a^T C b.
inline double weighted_inner(const SymMatrix& C, std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    for (std::size_t m = 0; m < b.size(); ++m) s += a[n] * C(n, m) * b[m];
  }
  return s;
}

/// ||u||^2_{H^2_*} of sum_n coeffs[n] basis_n evaluated by 2D Gauss quadrature
/// of the bilinear form (independent of the orthogonality of the basis).
inline double energy_by_quadrature(std::span<const double> coeffs, std::span<const HomEigenpair> basis,
                                   double sigma) {
  const double ell = basis.front().ell;
  int mmax = 1;
  for (const auto& e : basis) mmax = std::max(mmax, e.mode.m);
  const auto nx = numerics::nodes(numerics::QuadratureRule::gauss(12, {}, 4 * mmax), {0.0, std::numbers::pi});
  const auto ny = numerics::nodes(profile_rule(detail::max_wave(basis), ell), {-ell, ell});
  const std::size_t N = coeffs.size();
  // Profile values and derivatives at the y nodes.
  std::vector<double> f0(N * ny.x.size()), f1(N * ny.x.size()), f2(N * ny.x.size());
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t q = 0; q < ny.x.size(); ++q) {
      f0[n * ny.x.size() + q] = profile(basis[n], ny.x[q], 0);
      f1[n * ny.x.size() + q] = profile(basis[n], ny.x[q], 1);
      f2[n * ny.x.size() + q] = profile(basis[n], ny.x[q], 2);
    }
  }
  double total = 0.0;
  for (std::size_t i = 0; i < nx.x.size(); ++i) {
    const double x = nx.x[i];
    double col = 0.0;
    for (std::size_t q = 0; q < ny.x.size(); ++q) {
      double uxx = 0.0, uyy = 0.0, uxy = 0.0;
      for (std::size_t n = 0; n < N; ++n) {
        const double m = basis[n].mode.m;
        const double sx = std::sin(m * x);
        const double cx = std::cos(m * x);
        uxx += coeffs[n] * (-m * m) * f0[n * ny.x.size() + q] * sx;
        uyy += coeffs[n] * f2[n * ny.x.size() + q] * sx;
        uxy += coeffs[n] * m * f1[n * ny.x.size() + q] * cx;
      }
      const double lap = uxx + uyy;
      col += ny.w[q] * (lap * lap + (1.0 - sigma) * (2.0 * uxy * uxy - 2.0 * uxx * uyy));
    }
    total += nx.w[i] * col;
  }
  return total;
}

/// Both sequences merged by value, longitudinal first on ties.
inline std::vector<double> merged_eigenvalues(const std::vector<double>& mu, const std::vector<double>& nu) {
  std::vector<double> out;
  out.reserve(mu.size() + nu.size());
  std::size_t i = 0, j = 0;
  while (i < mu.size() || j < nu.size()) {
    if (j == nu.size() || (i < mu.size() && mu[i] <= nu[j])) {
      out.push_back(mu[i++]);
    } else {
      out.push_back(nu[j++]);
    }
  }
  return out;
}

struct WeylReport {
  int h_lo = 0;
  int h_hi = 0;
  double sqrt_p_integral_sq = 0.0;  // (int sqrt(p))^2
  std::vector<double> ratios;       // r_h for h = h_lo..h_hi
  double top_half_spread = 0.0;     // (max - min) / median over the upper half of the window
  double median = 0.0;              // median of r_h over the window
};

/// r_h = lambda_h (int sqrt p)^2 / (16 pi^2 h^2) over h in [h_lo, h_hi]
/// (1-based); `merged` holds lambda_1, lambda_2, ... in order.
inline WeylReport weyl_diagnostic(const Weight& w, const std::vector<double>& merged, int h_lo, int h_hi) {
  if (h_lo < 1 || h_hi < h_lo || static_cast<std::size_t>(h_hi) > merged.size()) {
    throw Error(ErrorCode::InvalidConfig, "Weyl window exceeds the available spectrum");
  }
  const CellPartition cp = partition(w);
  double root_int = 0.0;
  for (std::size_t ix = 0; ix < cp.nx_cells(); ++ix) {
    for (std::size_t iy = 0; iy < cp.ny_cells(); ++iy) {
      root_int += (cp.x_edges[ix + 1] - cp.x_edges[ix]) * (cp.y_edges[iy + 1] - cp.y_edges[iy]) *
                  std::sqrt(cp.value(ix, iy));
    }
  }
  WeylReport r;
  r.h_lo = h_lo;
  r.h_hi = h_hi;
  r.sqrt_p_integral_sq = root_int * root_int;
  const double denom = 16.0 * std::numbers::pi * std::numbers::pi;
  for (int h = h_lo; h <= h_hi; ++h) {
    r.ratios.push_back(merged[static_cast<std::size_t>(h - 1)] * r.sqrt_p_integral_sq / (denom * h * static_cast<double>(h)));
  }
  auto median_of = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };
  r.median = median_of(r.ratios);
  const std::vector<double> top(r.ratios.begin() + static_cast<std::ptrdiff_t>(r.ratios.size() / 2), r.ratios.end());
  const auto [mn, mx] = std::minmax_element(top.begin(), top.end());
  r.top_half_spread = (*mx - *mn) / median_of(top);
  return r;
}

}  // namespace plate
