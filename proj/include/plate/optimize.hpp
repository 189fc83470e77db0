#pragma once

// Two-phase density optimisation. For a fixed eigenfunction u the linear
// functional J(p) = int p u^2 is extremised over the admissible class by
// bang-bang weights aligned with the level sets of u^2 (bathtub principle).
// Lowering mu_j alternates "solve, then maximise J"; raising nu_1 alternates
// "solve, then minimise J".

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plate/errors.hpp"
#include "plate/galerkin.hpp"
#include "plate/spectrum.hpp"
#include "plate/weights.hpp"

namespace plate {

// --- the functional J and its extremisers -----------------------------------

namespace detail {

/// Overlap lengths of the cells [a_k, a_{k+1}) with [b_i, b_{i+1}): for each i
/// the list of (k, length) with length > 0.
inline std::vector<std::vector<std::pair<std::size_t, double>>> overlaps(const std::vector<double>& a,
                                                                        const std::vector<double>& b) {
  std::vector<std::vector<std::pair<std::size_t, double>>> out(b.size() - 1);
  std::size_t k = 0;
  for (std::size_t i = 0; i + 1 < b.size(); ++i) {
    while (k + 1 < a.size() && a[k + 1] <= b[i]) ++k;
    for (std::size_t q = k; q + 1 < a.size() && a[q] < b[i + 1]; ++q) {
      const double len = std::min(a[q + 1], b[i + 1]) - std::max(a[q], b[i]);
      if (len > 0.0) out[i].emplace_back(q, len);
    }
  }
  return out;
}

}  // namespace detail

/// Exact mean of w over each dual cell of `grid` (w is piecewise constant).
inline GridField cell_averages(const Weight& w, const GridField& grid) {
  const CellPartition cp = partition(w);
  const auto ox = detail::overlaps(cp.x_edges, grid.x_edges());
  const auto oy = detail::overlaps(cp.y_edges, grid.y_edges());
  GridField out(grid.nx, grid.ny, grid.ell, Parity::Even);
  for (int i = 0; i < grid.nx; ++i) {
    for (int j = 0; j < grid.ny; ++j) {
      double s = 0.0;
      for (const auto& [kx, lx] : ox[static_cast<std::size_t>(i)]) {
        for (const auto& [ky, ly] : oy[static_cast<std::size_t>(j)]) s += lx * ly * cp.value(kx, ky);
      }
      out.at(i, j) = s / grid.cell_area(i, j);
    }
  }
  return out;
}

/// J(p) = int p u^2 with u^2 given by its dual-cell means.
inline double weighted_energy(const Weight& w, const GridField& u2) {
  const GridField avg = cell_averages(w, u2);
  double s = 0.0;
  for (int i = 0; i < u2.nx; ++i) {
    for (int j = 0; j < u2.ny; ++j) s += avg.at(i, j) * u2.at(i, j) * u2.cell_area(i, j);
  }
  return s;
}

/// Minimiser of J: beta on {u^2 <= t} of area (1 - alpha) / (beta - alpha) |Omega|.
inline Weight rearrange_min(const GridField& u2, const PlateConfig& cfg, std::string label = "rearranged_min") {
  const double target = cfg.area() * (1.0 - cfg.alpha) / (cfg.beta - cfg.alpha);
  return sublevel_weight(u2, target, cfg.beta, cfg.alpha, cfg, std::move(label));
}

/// Maximiser of J: alpha on {u^2 <= t} of area (beta - 1) / (beta - alpha) |Omega|.
inline Weight rearrange_max(const GridField& u2, const PlateConfig& cfg, std::string label = "rearranged_max") {
  const double target = cfg.area() * (cfg.beta - 1.0) / (cfg.beta - cfg.alpha);
  return sublevel_weight(u2, target, cfg.alpha, cfg.beta, cfg, std::move(label));
}

// --- traces -------------------------------------------------------------------

enum class StopReason { Converged, MaxIters, Degenerate };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::Converged: return "converged";
    case StopReason::MaxIters: return "max_iters";
    case StopReason::Degenerate: return "degenerate";
  }
  return "unknown";
}

struct Iterate {
  Weight weight;
  double eigenvalue = 0.0;
  int tracked_index = 0;      // 0-based index of the eigenfunction fed to the next step
  double phase_change = 0.0;  // |S_i symmetric-difference S_{i-1}| / |Omega|, 0 for the first iterate
};

struct OptimizationTrace {
  enum class Target { MinMu, MaxNu1 };
  Target target = Target::MinMu;
  int j = 1;
  double epsilon = 0.0;
  std::vector<Iterate> iterates;
  StopReason stop_reason = StopReason::MaxIters;
  std::string note;

  const Iterate& final() const { return iterates.back(); }
  bool converged() const { return stop_reason == StopReason::Converged; }
};

struct OptimizeOptions {
  int N = 30;
  int nx = 601;
  int ny = 31;
  double epsilon = 1e-4;  // relative change of the eigenvalue between iterates
  int max_iters = 100;
  double phase_tolerance = 0.01;  // fixed-point stop for nu_1, fraction of |Omega|
  double min_damping = 1.0 / 1024.0;  // smallest step fraction tried when a full step raises mu_j
};

namespace detail {

inline double phase_change(const Weight& a, const Weight& b, double area) {
  if (a.kind != WeightKind::Sublevel || b.kind != WeightKind::Sublevel) return 1.0;
  return phase_difference_area(a, b) / area;
}

/// Squared p-norm of the part of u (coefficients c) orthogonal to the first
/// `count` columns of `coeffs`, relative to ||u||_p^2. Columns are
/// p-orthonormal by construction.
inline double projection_residual(const SymMatrix& C, std::span<const double> c, std::span<const double> coeffs,
                                  int N, int count) {
  const double total = weighted_inner(C, c, c);
  double captured = 0.0;
  for (int k = 0; k < count; ++k) {
    const auto v = coeffs.subspan(static_cast<std::size_t>(k) * N, static_cast<std::size_t>(N));
    const double d = weighted_inner(C, c, v);
    captured += d * d;
  }
  return std::max(0.0, total - captured) / total;
}

}  // namespace detail

inline constexpr double kSpanResidualTolerance = 1e-6;

/// Lowers mu_j by alternating: solve, square the tracked eigenfunction,
/// rearrange it to beta where it is large. For j > 1 the previous eigenfunction
/// is checked against the span of the first j - 1 new ones; if it lies inside
/// that span the mode is re-identified among indices >= j by the largest
/// p-weighted overlap. A full step that would raise mu_j is damped towards the
/// current weight; if no damped step lowers mu_j the run has converged.
inline OptimizationTrace minimize_mu_j(int j, const PlateConfig& cfg, const HomSpectrum& spectrum,
                                       const Weight& initial, const OptimizeOptions& opt = {}) {
  if (j < 1 || j > opt.N) throw Error(ErrorCode::InvalidConfig, "j must lie in [1, N]");
  OptimizationTrace trace;
  trace.target = OptimizationTrace::Target::MinMu;
  trace.j = j;
  trace.epsilon = opt.epsilon;

  Weight p = initial;
  GalerkinSpectrum gs = solve_weighted(p, spectrum, opt.N);
  int tracked = j - 1;
  trace.iterates.push_back({p, gs.mu_p[static_cast<std::size_t>(j - 1)], tracked, 0.0});

  for (int it = 0; it < opt.max_iters; ++it) {
    const GridField u2 = reconstruct(gs, spectrum, Parity::Even, tracked, opt.nx, opt.ny, SampleMode::CellMeanSquare);
    Weight next = rearrange_max(u2, cfg, "min_mu_" + std::to_string(j));
    if (next.degenerate) {
      trace.stop_reason = StopReason::Degenerate;
      return trace;
    }
    GalerkinSpectrum gs_next = solve_weighted(next, spectrum, opt.N);
    const double mu_prev = trace.iterates.back().eigenvalue;
    const double mu_next = gs_next.mu_p[static_cast<std::size_t>(j - 1)];

    if (mu_next > mu_prev * (1.0 + 1e-12)) {
      // Full step overshoots: back off along the segment towards the
      // rearranged weight (convex combinations stay admissible).
      const GridField base = p.kind == WeightKind::Sublevel && p.density.nx == next.density.nx &&
                                     p.density.ny == next.density.ny
                                 ? p.density
                                 : cell_averages(p, next.density);
      bool accepted = false;
      for (double theta = 0.5; theta >= opt.min_damping; theta *= 0.5) {
        Weight mixed = next;
        for (std::size_t q = 0; q < mixed.density.values.size(); ++q) {
          mixed.density.values[q] = (1.0 - theta) * base.values[q] + theta * next.density.values[q];
        }
        GalerkinSpectrum gs_mixed = solve_weighted(mixed, spectrum, opt.N);
        if (gs_mixed.mu_p[static_cast<std::size_t>(j - 1)] < mu_prev) {
          next = std::move(mixed);
          gs_next = std::move(gs_mixed);
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        trace.stop_reason = StopReason::Converged;
        trace.note = "no damped step lowers mu_j";
        return trace;
      }
    }
    const double mu_new = gs_next.mu_p[static_cast<std::size_t>(j - 1)];
    int tracked_next = j - 1;
    if (j > 1) {
      const SymMatrix C = assemble_mass(next, spectrum, Parity::Even, opt.N);
      const auto prev = gs.coeffs(Parity::Even, tracked);
      const double res = detail::projection_residual(C, prev, gs_next.a_coeffs, opt.N, j - 1);
      if (res < kSpanResidualTolerance) {
        double best = -1.0;
        for (int k = j - 1; k < opt.N; ++k) {
          const double ov = std::abs(weighted_inner(C, prev, gs_next.coeffs(Parity::Even, k)));
          if (ov > best) {
            best = ov;
            tracked_next = k;
          }
        }
      }
    }
    const double change = detail::phase_change(trace.iterates.back().weight, next, cfg.area());
    trace.iterates.push_back({next, mu_new, tracked_next, change});
    if (std::abs(mu_prev - mu_new) < opt.epsilon * mu_prev || change == 0.0) {
      trace.stop_reason = StopReason::Converged;
      return trace;
    }
    p = std::move(next);
    gs = std::move(gs_next);
    tracked = tracked_next;
  }
  trace.stop_reason = StopReason::MaxIters;
  return trace;
}

/// Squared first torsional homogeneous eigenfunction as dual-cell means.
inline GridField theta1_squared(const HomSpectrum& spectrum, int N, int nx, int ny) {
  return reconstruct(homogeneous_solution(spectrum, N), spectrum, Parity::Odd, 0, nx, ny, SampleMode::CellMeanSquare);
}

/// beta on the sublevel set of theta_1^2 with the mass-preserving area.
inline Weight make_pstar(const PlateConfig& cfg, const HomSpectrum& spectrum, const OptimizeOptions& opt = {}) {
  return rearrange_min(theta1_squared(spectrum, opt.N, opt.nx, opt.ny), cfg, "pstar");
}

/// Raises nu_1 by the sublevel fixed point: start from the rearrangement of
/// theta_1^2, then repeatedly rearrange the current first torsional
/// eigenfunction, until consecutive beta-sets differ by less than
/// phase_tolerance |Omega|.
inline OptimizationTrace maximize_nu1_fixed_point(const PlateConfig& cfg, const HomSpectrum& spectrum,
                                                  const OptimizeOptions& opt = {}) {
  OptimizationTrace trace;
  trace.target = OptimizationTrace::Target::MaxNu1;
  trace.j = 1;
  trace.epsilon = opt.phase_tolerance;
  Weight p = make_pstar(cfg, spectrum, opt);
  if (p.degenerate) {
    trace.iterates.push_back({p, spectrum.nu.front().lambda, 0, 0.0});
    trace.stop_reason = StopReason::Degenerate;
    return trace;
  }
  GalerkinSpectrum gs = solve_weighted(p, spectrum, opt.N);
  trace.iterates.push_back({p, gs.nu_p.front(), 0, 0.0});
  for (int it = 0; it < opt.max_iters; ++it) {
    const GridField u2 = reconstruct(gs, spectrum, Parity::Odd, 0, opt.nx, opt.ny, SampleMode::CellMeanSquare);
    Weight next = rearrange_min(u2, cfg, "max_nu1");
    if (next.degenerate) {
      trace.stop_reason = StopReason::Degenerate;
      return trace;
    }
    gs = solve_weighted(next, spectrum, opt.N);
    const double change = detail::phase_change(trace.iterates.back().weight, next, cfg.area());
    trace.iterates.push_back({next, gs.nu_p.front(), 0, change});
    if (change < opt.phase_tolerance) {
      trace.stop_reason = StopReason::Converged;
      return trace;
    }
  }
  trace.stop_reason = StopReason::MaxIters;
  return trace;
}

// --- upper bound for mu_j from disjointly supported trial functions ----------

struct MuBound {
  double bound = 0.0;                  // max_m j^3 |Omega| / ||sqrt(w) w_m||^2
  std::vector<double> strip_integrals;  // ||sqrt(w) w_m||^2, m = 1..j
  std::optional<double> periodic;      // j^4 |Omega| / ||sqrt(w) sin^2(jx)||^2 for pi/j-periodic w
};

namespace detail {

/// Antiderivative of sin^4(a x).
inline double sin4_antiderivative(double a, double x) {
  return 3.0 * x / 8.0 - std::sin(2.0 * a * x) / (4.0 * a) + std::sin(4.0 * a * x) / (32.0 * a);
}

}  // namespace detail

inline MuBound mu_upper_bound(const Weight& w, int j, const PlateConfig& cfg) {
  if (j < 2) throw Error(ErrorCode::InvalidConfig, "the strip bound needs j >= 2");
  const CellPartition cp = partition(w);
  const double pi = std::numbers::pi;
  MuBound r;
  r.strip_integrals.assign(static_cast<std::size_t>(j), 0.0);
  for (int m = 1; m <= j; ++m) {
    const double a = (m - 1) * pi / j;
    const double b = m * pi / j;
    double s = 0.0;
    for (std::size_t ix = 0; ix < cp.nx_cells(); ++ix) {
      const double lo = std::max(a, cp.x_edges[ix]);
      const double hi = std::min(b, cp.x_edges[ix + 1]);
      if (hi <= lo) continue;
      const double xint = detail::sin4_antiderivative(j, hi) - detail::sin4_antiderivative(j, lo);
      for (std::size_t iy = 0; iy < cp.ny_cells(); ++iy) {
        s += xint * (cp.y_edges[iy + 1] - cp.y_edges[iy]) * cp.value(ix, iy);
      }
    }
    r.strip_integrals[static_cast<std::size_t>(m - 1)] = s;
  }
  const double j3 = static_cast<double>(j) * j * j;
  const double smallest = *std::min_element(r.strip_integrals.begin(), r.strip_integrals.end());
  const double largest = *std::max_element(r.strip_integrals.begin(), r.strip_integrals.end());
  r.bound = j3 * cfg.area() / smallest;
  if (largest - smallest <= 1e-12 * largest) {
    double total = 0.0;
    for (double v : r.strip_integrals) total += v;
    r.periodic = j3 * j * cfg.area() / total;
  }
  return r;
}

// --- ratio study ----------------------------------------------------------------

inline constexpr int kRatioMu = 12;
inline constexpr int kRatioNu = 2;

struct RatioRow {
  std::string label;
  std::array<double, kRatioMu> mu{};
  std::array<double, kRatioNu> nu{};
  double ratio = 0.0;  // nu_1 / mu_{j0}
};

struct RatioReport {
  int j0 = 0;
  int N = 0;
  std::vector<RatioRow> rows;
};

struct LabelledWeight {
  std::string label;
  Weight weight;
};

inline RatioReport ratio_study(const std::vector<LabelledWeight>& weights, const HomSpectrum& spectrum, int N) {
  if (N < kRatioMu) throw Error(ErrorCode::InvalidConfig, "the ratio table needs N >= 12");
  if (spectrum.j0 < 1 || spectrum.j0 > N) throw Error(ErrorCode::InvalidConfig, "j0 outside the truncation");
  RatioReport rep;
  rep.j0 = spectrum.j0;
  rep.N = N;
  rep.rows.resize(weights.size());
  for (std::size_t r = 0; r < weights.size(); ++r) {
    const GalerkinSpectrum gs = solve_weighted(weights[r].weight, spectrum, N);
    RatioRow& row = rep.rows[r];
    row.label = weights[r].label;
    std::copy_n(gs.mu_p.begin(), kRatioMu, row.mu.begin());
    std::copy_n(gs.nu_p.begin(), kRatioNu, row.nu.begin());
    row.ratio = gs.nu_p.front() / gs.mu_p[static_cast<std::size_t>(rep.j0 - 1)];
  }
  return rep;
}

/// The six comparison weights: 1, pbar_10, p*, breve, doublebar, tilde.
inline std::vector<LabelledWeight> comparison_weights(const PlateConfig& cfg, const HomSpectrum& spectrum,
                                                      const OptimizeOptions& opt = {}) {
  return {
      {"1", uniform_weight(cfg)},
      {"pbar10", make_pbar_j(10, cfg)},
      {"pstar", make_pstar(cfg, spectrum, opt)},
      {"breve", make_breve_p(cfg)},
      {"doublebar", make_doublebar_p(cfg)},
      {"tilde", make_tilde_p(cfg)},
  };
}

/// Published three-digit values for the comparison weights at sigma = 0.2,
/// ell = pi/150, alpha = 0.5, beta = 1.5, N = 30.
inline const std::vector<RatioRow>& published_ratio_table() {
  static const std::vector<RatioRow> rows = {
      {"1",
       {9.60e-1, 1.54e1, 7.78e1, 2.46e2, 6.00e2, 1.24e3, 2.31e3, 3.93e3, 6.30e3, 9.61e3, 1.41e4, 1.99e4},
       {1.09e4, 4.38e4},
       1.14},
      {"pbar10",
       {9.60e-1, 1.54e1, 7.77e1, 2.46e2, 5.99e2, 1.24e3, 2.28e3, 3.84e3, 5.87e3, 7.28e3, 1.68e4, 2.27e4},
       {1.09e4, 4.37e4},
       1.50},
      {"pstar",
       {1.16, 1.66e1, 8.06e1, 2.51e2, 6.10e2, 1.27e3, 2.36e3, 4.04e3, 6.48e3, 9.90e3, 1.45e4, 2.05e4},
       {1.98e4, 6.88e4},
       2.00},
      {"breve",
       {9.60e-1, 1.54e1, 7.78e1, 2.46e2, 6.01e2, 1.25e3, 2.31e3, 3.94e3, 6.31e3, 9.62e3, 1.41e4, 2.00e4},
       {1.75e4, 7.01e4},
       1.82},
      {"doublebar",
       {1.40, 1.52e1, 8.05e1, 2.96e2, 6.78e2, 1.31e3, 2.60e3, 4.55e3, 6.85e3, 1.04e4, 1.61e4, 2.24e4},
       {1.56e4, 4.14e4},
       1.49},
      {"tilde",
       {9.86e-1, 1.58e1, 7.98e1, 2.52e2, 6.16e2, 1.28e3, 2.37e3, 4.04e3, 6.47e3, 9.55e3, 1.45e4, 2.05e4},
       {1.71e4, 6.84e4},
       1.79},
  };
  return rows;
}

/// Largest relative deviation of `row` from the published row with the same
/// label, over every mu, nu and R entry; nullopt if there is no such row.
inline std::optional<double> max_published_deviation(const RatioRow& row) {
  for (const auto& ref : published_ratio_table()) {
    if (ref.label != row.label) continue;
    double d = std::abs(row.ratio - ref.ratio) / ref.ratio;
    for (int i = 0; i < kRatioMu; ++i) d = std::max(d, std::abs(row.mu[i] - ref.mu[i]) / ref.mu[i]);
    for (int i = 0; i < kRatioNu; ++i) d = std::max(d, std::abs(row.nu[i] - ref.nu[i]) / ref.nu[i]);
    return d;
  }
  return std::nullopt;
}

}  // namespace plate
