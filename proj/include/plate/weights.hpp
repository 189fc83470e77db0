#pragma once

// Densities p in the admissible class: alpha <= p <= beta, p(x, y) = p(x, -y),
// int p = |Omega|. Every weight is piecewise constant on a tensor partition of
// Omega, which is what the Galerkin assembly consumes.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "plate/errors.hpp"
#include "plate/numerics/quadrature.hpp"
#include "plate/numerics/root.hpp"
#include "plate/spectrum.hpp"

namespace plate {

using numerics::Interval;

/// Samples of a scalar field on the uniform node grid x_i = pi i / (nx - 1),
/// y_j = -ell + 2 ell j / (ny - 1). Node (i, j) owns the dual cell around it
/// (half cells on the boundary). Values are stored x-major: values[i * ny + j].
struct GridField {
  int nx = 0;
  int ny = 0;
  double ell = 0.0;
  Parity parity = Parity::Even;
  std::vector<double> values;

  GridField() = default;
  GridField(int nx_, int ny_, double ell_, Parity parity_ = Parity::Even)
      : nx(nx_), ny(ny_), ell(ell_), parity(parity_),
        values(static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_), 0.0) {
    if (nx < 2 || ny < 3 || ny % 2 == 0) {
      throw Error(ErrorCode::InvalidConfig, "grid needs nx >= 2 and odd ny >= 3");
    }
  }

  double hx() const { return std::numbers::pi / (nx - 1); }
  double hy() const { return 2.0 * ell / (ny - 1); }
  double x(int i) const { return i == nx - 1 ? std::numbers::pi : i * hx(); }
  double y(int j) const { return j == ny - 1 ? ell : (j == (ny - 1) / 2 ? 0.0 : -ell + j * hy()); }
  double& at(int i, int j) { return values[static_cast<std::size_t>(i) * ny + j]; }
  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * ny + j]; }

  std::vector<double> x_edges() const { return dual_edges(nx, 0.0, std::numbers::pi); }
  std::vector<double> y_edges() const { return dual_edges(ny, -ell, ell); }

  double cell_area(int i, int j) const {
    const double wx = (i == 0 || i == nx - 1) ? 0.5 * hx() : hx();
    const double wy = (j == 0 || j == ny - 1) ? 0.5 * hy() : hy();
    return wx * wy;
  }

  /// Nearest node (ties resolved toward the larger index).
  std::pair<int, int> node_of(double xv, double yv) const {
    const int i = std::clamp(static_cast<int>(std::floor(xv / hx() + 0.5)), 0, nx - 1);
    const int j = std::clamp(static_cast<int>(std::floor((yv + ell) / hy() + 0.5)), 0, ny - 1);
    return {i, j};
  }

  /// max |f(x, y) -+ f(x, -y)| relative to max |f|, per the declared parity.
  double parity_residual() const {
    double scale = 0.0;
    for (double v : values) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return 0.0;
    const double sgn = parity == Parity::Even ? 1.0 : -1.0;
    double r = 0.0;
    for (int i = 0; i < nx; ++i) {
      for (int j = 0; j < ny; ++j) r = std::max(r, std::abs(at(i, j) - sgn * at(i, ny - 1 - j)));
    }
    return r / scale;
  }

  template <typename F>
  static GridField sample(int nx, int ny, double ell, Parity parity, F&& f) {
    GridField g(nx, ny, ell, parity);
    for (int i = 0; i < nx; ++i) {
      for (int j = 0; j < ny; ++j) g.at(i, j) = f(g.x(i), g.y(j));
    }
    return g;
  }

 private:
  static std::vector<double> dual_edges(int n, double lo, double hi) {
    const double h = (hi - lo) / (n - 1);
    std::vector<double> e;
    e.push_back(lo);
    for (int i = 0; i < n - 1; ++i) e.push_back(lo + (i + 0.5) * h);
    e.push_back(hi);
    return e;
  }
};

/// Piecewise-constant description of a weight: value(ix, iy) on
/// [x_edges[ix], x_edges[ix + 1]) x [y_edges[iy], y_edges[iy + 1]).
struct CellPartition {
  std::vector<double> x_edges;
  std::vector<double> y_edges;
  std::vector<double> values;  // values[ix * (y_edges.size() - 1) + iy]

  std::size_t nx_cells() const { return x_edges.size() - 1; }
  std::size_t ny_cells() const { return y_edges.size() - 1; }
  double value(std::size_t ix, std::size_t iy) const { return values[ix * ny_cells() + iy]; }
};

enum class WeightKind { Uniform, XBands, YBands, Cross, Sublevel };
enum class CombineRule { Max, Min };

/// A density in the admissible class. Band variants take `inside` on the
/// listed intervals (closed on the left, open on the right) and `outside`
/// elsewhere. Cross takes `inside` where an x-band or (Max) / and (Min) a
/// y-band is active. Sublevel carries the sampled field, its threshold and
/// the per-node density produced by the rearrangement (a single level set
/// of nodes may hold an intermediate value so the mass is exact).
struct Weight {
  WeightKind kind = WeightKind::Uniform;
  double alpha = 0.5;
  double beta = 1.5;
  double ell = std::numbers::pi / 150.0;
  std::vector<Interval> x_intervals;
  std::vector<Interval> y_intervals;
  double inside = 1.0;
  double outside = 1.0;
  CombineRule combine = CombineRule::Max;
  GridField field;
  double threshold = 0.0;
  GridField density;
  bool degenerate = false;
  std::string label;
};

namespace detail {

inline bool in_intervals(const std::vector<Interval>& ivs, double v) {
  return std::any_of(ivs.begin(), ivs.end(), [v](const Interval& iv) { return v >= iv.lo && v < iv.hi; });
}

inline std::vector<double> band_edges(const std::vector<Interval>& ivs, double lo, double hi) {
  std::vector<double> e{lo, hi};
  for (const auto& iv : ivs) {
    if (iv.lo > lo && iv.lo < hi) e.push_back(iv.lo);
    if (iv.hi > lo && iv.hi < hi) e.push_back(iv.hi);
  }
  std::sort(e.begin(), e.end());
  e.erase(std::unique(e.begin(), e.end()), e.end());
  return e;
}

}  // namespace detail

inline double eval(const Weight& w, double x, double y) {
  switch (w.kind) {
    case WeightKind::Uniform: return 1.0;
    case WeightKind::XBands: return detail::in_intervals(w.x_intervals, x) ? w.inside : w.outside;
    case WeightKind::YBands: return detail::in_intervals(w.y_intervals, y) ? w.inside : w.outside;
    case WeightKind::Cross: {
      const bool bx = detail::in_intervals(w.x_intervals, x);
      const bool by = detail::in_intervals(w.y_intervals, y);
      const bool on = w.combine == CombineRule::Max ? (bx || by) : (bx && by);
      return on ? w.inside : w.outside;
    }
    case WeightKind::Sublevel: {
      const auto [i, j] = w.density.node_of(x, y);
      return w.density.at(i, j);
    }
  }
  return 1.0;
}

inline CellPartition partition(const Weight& w) {
  CellPartition cp;
  const double pi = std::numbers::pi;
  if (w.kind == WeightKind::Sublevel) {
    cp.x_edges = w.density.x_edges();
    cp.y_edges = w.density.y_edges();
    cp.values = w.density.values;
    return cp;
  }
  const bool uses_x = w.kind == WeightKind::XBands || w.kind == WeightKind::Cross;
  const bool uses_y = w.kind == WeightKind::YBands || w.kind == WeightKind::Cross;
  cp.x_edges = uses_x ? detail::band_edges(w.x_intervals, 0.0, pi) : std::vector<double>{0.0, pi};
  cp.y_edges = uses_y ? detail::band_edges(w.y_intervals, -w.ell, w.ell) : std::vector<double>{-w.ell, w.ell};
  for (std::size_t ix = 0; ix + 1 < cp.x_edges.size(); ++ix) {
    for (std::size_t iy = 0; iy + 1 < cp.y_edges.size(); ++iy) {
      const double xm = 0.5 * (cp.x_edges[ix] + cp.x_edges[ix + 1]);
      const double ym = 0.5 * (cp.y_edges[iy] + cp.y_edges[iy + 1]);
      cp.values.push_back(eval(w, xm, ym));
    }
  }
  return cp;
}

inline double integral(const CellPartition& cp) {
  double s = 0.0;
  for (std::size_t ix = 0; ix < cp.nx_cells(); ++ix) {
    const double wx = cp.x_edges[ix + 1] - cp.x_edges[ix];
    for (std::size_t iy = 0; iy < cp.ny_cells(); ++iy) {
      s += wx * (cp.y_edges[iy + 1] - cp.y_edges[iy]) * cp.value(ix, iy);
    }
  }
  return s;
}

inline double mass(const Weight& w) { return integral(partition(w)); }

struct MembershipReport {
  double bound_violation = 0.0;    // max amount p leaves [alpha, beta]
  double symmetry_residual = 0.0;  // max |p(x, y) - p(x, -y)| over cells
  double mass_error = 0.0;         // (int p - |Omega|) / |Omega|
  bool passes = false;
  std::vector<std::string> violations;
};

inline constexpr double kMassTolerance = 1e-6;

inline MembershipReport validate(const Weight& w, const PlateConfig& cfg) {
  MembershipReport r;
  const CellPartition cp = partition(w);
  const double lo = cfg.alpha;
  const double hi = cfg.beta;
  for (double v : cp.values) {
    if (!std::isfinite(v)) {
      r.bound_violation = std::numeric_limits<double>::infinity();
      continue;
    }
    r.bound_violation = std::max({r.bound_violation, lo - v, v - hi});
  }
  const std::size_t ny = cp.ny_cells();
  for (std::size_t iy = 0; iy < cp.y_edges.size(); ++iy) {
    const double mirror = -cp.y_edges[cp.y_edges.size() - 1 - iy];
    r.symmetry_residual = std::max(r.symmetry_residual, std::abs(cp.y_edges[iy] - mirror));
  }
  for (std::size_t ix = 0; ix < cp.nx_cells(); ++ix) {
    for (std::size_t iy = 0; iy < ny; ++iy) {
      r.symmetry_residual =
          std::max(r.symmetry_residual, std::abs(cp.value(ix, iy) - cp.value(ix, ny - 1 - iy)));
    }
  }
  const double area = cfg.area();
  r.mass_error = (integral(cp) - area) / area;
  if (std::abs(w.ell - cfg.ell) > 1e-12 * cfg.ell) r.violations.push_back("weight built for a different ell");
  if (r.bound_violation > 0.0) {
    r.violations.push_back("density leaves [alpha, beta] by " + std::to_string(r.bound_violation));
  }
  if (r.symmetry_residual > 1e-10) {
    r.violations.push_back("not even in y (residual " + std::to_string(r.symmetry_residual) + ")");
  }
  if (!(std::abs(r.mass_error) <= kMassTolerance)) {
    r.violations.push_back("mass error " + std::to_string(r.mass_error));
  }
  r.passes = r.violations.empty();
  return r;
}

// --- constructors -------------------------------------------------------------

inline Weight uniform_weight(const PlateConfig& cfg) {
  Weight w;
  w.kind = WeightKind::Uniform;
  w.alpha = cfg.alpha;
  w.beta = cfg.beta;
  w.ell = cfg.ell;
  w.label = "1";
  return w;
}

inline Weight x_bands(std::vector<Interval> intervals, double inside, double outside, const PlateConfig& cfg,
                      std::string label = "xbands") {
  Weight w = uniform_weight(cfg);
  w.kind = WeightKind::XBands;
  w.x_intervals = std::move(intervals);
  w.inside = inside;
  w.outside = outside;
  w.label = std::move(label);
  return w;
}

inline Weight y_bands(std::vector<Interval> intervals, double inside, double outside, const PlateConfig& cfg,
                      std::string label = "ybands") {
  Weight w = uniform_weight(cfg);
  w.kind = WeightKind::YBands;
  w.y_intervals = std::move(intervals);
  w.inside = inside;
  w.outside = outside;
  w.label = std::move(label);
  return w;
}

/// beta on j bands of total length pi (1 - alpha) / (beta - alpha) centred at
/// the peaks pi (2h - 1) / (2j) of sin^2(j x), alpha elsewhere.
inline Weight make_pbar_j(int j, const PlateConfig& cfg, double width_scale = 1.0) {
  if (j < 1) throw Error(ErrorCode::InvalidConfig, "j must be >= 1");
  const double pi = std::numbers::pi;
  const double half = width_scale * (pi / j) * (1.0 - cfg.alpha) / (2.0 * (cfg.beta - cfg.alpha));
  std::vector<Interval> ivs;
  for (int h = 1; h <= j; ++h) {
    const double centre = pi * (2.0 * h - 1.0) / (2.0 * j);
    ivs.push_back({centre - half, centre + half});
  }
  return x_bands(std::move(ivs), cfg.beta, cfg.alpha, cfg, "pbar" + std::to_string(j));
}

/// Threshold t with |{x in (0, pi) : sin^4(j x) <= t}| = fraction * pi, from
/// the closed form |{sin^2(j x) <= s}| = 2 arcsin(sqrt(s)).
inline double sin4_threshold(double fraction) {
  auto measure_gap = [fraction](double t) {
    return 2.0 * std::asin(std::sqrt(std::sqrt(t))) - fraction * std::numbers::pi;
  };
  return numerics::find_root(measure_gap, {0.0, 1.0}, 1e-15);
}

/// alpha on S_j = {sin^4(j x) <= t_j} with |S_j| = (beta - 1)/(beta - alpha) |Omega|,
/// beta on the complement.
inline Weight make_pj_sin4(int j, const PlateConfig& cfg) {
  if (j < 1) throw Error(ErrorCode::InvalidConfig, "j must be >= 1");
  const double pi = std::numbers::pi;
  const double frac = (cfg.beta - 1.0) / (cfg.beta - cfg.alpha);
  const double t = sin4_threshold(frac);
  const double a = std::asin(std::sqrt(std::sqrt(t)));
  std::vector<Interval> ivs;
  for (int h = 0; h < j; ++h) ivs.push_back({(h * pi + a) / j, ((h + 1) * pi - a) / j});
  Weight w = x_bands(std::move(ivs), cfg.beta, cfg.alpha, cfg, "p" + std::to_string(j) + "_sin4");
  w.threshold = t;
  return w;
}

/// beta on the central strip |y| < ell (1 - alpha)/(beta - alpha), alpha
/// elsewhere. At alpha + beta = 2 the half-width equals ell (beta - 1)/(beta - alpha).
inline Weight make_breve_p(const PlateConfig& cfg, double width_scale = 1.0) {
  const double h = width_scale * cfg.ell * (1.0 - cfg.alpha) / (cfg.beta - cfg.alpha);
  return y_bands({{-h, h}}, cfg.beta, cfg.alpha, cfg, "breve");
}

/// alpha on the central x-band of length pi (beta - 1)/(beta - alpha), beta near
/// the short edges.
inline Weight make_doublebar_p(const PlateConfig& cfg) {
  const double pi = std::numbers::pi;
  const double h = pi * (cfg.beta - 1.0) / (2.0 * (cfg.beta - cfg.alpha));
  return x_bands({{0.0, pi / 2 - h}, {pi / 2 + h, pi}}, cfg.beta, cfg.alpha, cfg, "doublebar");
}

/// Union of the pbar_10 x-bands and the breve y-strip, both widths scaled by a
/// common factor so the total mass stays |Omega|.
inline Weight make_tilde_p(const PlateConfig& cfg, int j = 10) {
  auto build = [&](double scale) {
    Weight w = uniform_weight(cfg);
    w.kind = WeightKind::Cross;
    w.combine = CombineRule::Max;
    w.x_intervals = make_pbar_j(j, cfg, scale).x_intervals;
    w.y_intervals = make_breve_p(cfg, scale).y_intervals;
    w.inside = cfg.beta;
    w.outside = cfg.alpha;
    w.label = "tilde";
    return w;
  };
  const double area = cfg.area();
  const double scale = numerics::find_root([&](double s) { return mass(build(s)) - area; }, {1e-6, 1.0}, 1e-14);
  return build(scale);
}

// --- sublevel sets ------------------------------------------------------------

struct ThresholdResult {
  double t = 0.0;
  bool degenerate = false;
  /// Per-node membership in the sublevel set: 1 inside, 0 outside, and a
  /// fraction on the single level that straddles the target area.
  std::vector<double> membership;
};

/// t such that the grid measure of {field <= t} equals target_area. Nodes are
/// grouped by value (mirror nodes y, -y share their averaged value so the set
/// is exactly even); the group that crosses the target is taken fractionally
/// and t interpolates the cumulative measure linearly between group values.
inline ThresholdResult threshold_for_area(const GridField& field, double target_area) {
  const double area = 2.0 * std::numbers::pi * field.ell;
  if (!(target_area > 0.0 && target_area < area)) {
    throw Error(ErrorCode::InvalidConfig, "target area must lie in (0, |Omega|)");
  }
  const int nx = field.nx;
  const int ny = field.ny;
  ThresholdResult r;
  r.membership.assign(field.values.size(), 0.0);

  std::vector<double> key(field.values.size());
  double vmin = std::numeric_limits<double>::infinity();
  double vmax = -vmin;
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const double v = 0.5 * (field.at(i, j) + field.at(i, ny - 1 - j));
      key[static_cast<std::size_t>(i) * ny + j] = v;
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
    }
  }
  if (vmax - vmin <= 1e-14 * std::max(std::abs(vmax), std::abs(vmin))) {
    r.degenerate = true;
    r.t = vmin;
    std::fill(r.membership.begin(), r.membership.end(), target_area / area);
    return r;
  }

  std::vector<std::size_t> order(key.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });

  auto area_of = [&](std::size_t idx) {
    return field.cell_area(static_cast<int>(idx / ny), static_cast<int>(idx % ny));
  };
  double acc = 0.0;
  double prev_value = key[order.front()];
  std::size_t g = 0;
  while (g < order.size()) {
    std::size_t end = g;
    double group_area = 0.0;
    const double v = key[order[g]];
    while (end < order.size() && key[order[end]] == v) group_area += area_of(order[end++]);
    if (acc + group_area >= target_area) {
      const double frac = (target_area - acc) / group_area;
      for (std::size_t q = g; q < end; ++q) r.membership[order[q]] = frac;
      r.t = prev_value + frac * (v - prev_value);
      return r;
    }
    for (std::size_t q = g; q < end; ++q) r.membership[order[q]] = 1.0;
    acc += group_area;
    prev_value = v;
    g = end;
  }
  r.t = vmax;
  return r;
}

/// `inside` on {field <= t}, `outside` elsewhere, |{field <= t}| = target_area.
inline Weight sublevel_weight(const GridField& field, double target_area, double inside, double outside,
                              const PlateConfig& cfg, std::string label = "sublevel") {
  ThresholdResult th = threshold_for_area(field, target_area);
  Weight w = uniform_weight(cfg);
  w.kind = WeightKind::Sublevel;
  w.ell = field.ell;
  w.field = field;
  w.threshold = th.t;
  w.inside = inside;
  w.outside = outside;
  w.degenerate = th.degenerate;
  w.density = GridField(field.nx, field.ny, field.ell, Parity::Even);
  for (std::size_t i = 0; i < th.membership.size(); ++i) {
    w.density.values[i] = outside + th.membership[i] * (inside - outside);
  }
  w.label = std::move(label);
  return w;
}

/// Area of the symmetric difference of the `inside` phases of two sublevel
/// weights on the same grid, with fractional nodes counted by their fraction.
inline double phase_difference_area(const Weight& a, const Weight& b) {
  if (a.kind != WeightKind::Sublevel || b.kind != WeightKind::Sublevel || a.density.nx != b.density.nx ||
      a.density.ny != b.density.ny) {
    throw Error(ErrorCode::InvalidWeight, "phase difference needs two sublevel weights on one grid");
  }
  double s = 0.0;
  const auto& g = a.density;
  for (int i = 0; i < g.nx; ++i) {
    for (int j = 0; j < g.ny; ++j) {
      const double fa = (a.density.at(i, j) - a.outside) / (a.inside - a.outside);
      const double fb = (b.density.at(i, j) - b.outside) / (b.inside - b.outside);
      s += std::abs(fa - fb) * g.cell_area(i, j);
    }
  }
  return s;
}

}  // namespace plate
