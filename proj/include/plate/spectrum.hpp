#pragma once

// Spectrum of the homogeneous (p == 1) partially hinged plate on
// (0, pi) x (-ell, ell): hinged at x = 0, pi and free at y = +-ell.
// Separated eigenfunctions are profile(y) * sin(m x); the profile solves
//   phi'''' - 2 m^2 phi'' + m^4 phi = Lambda phi
// with phi'' - sigma m^2 phi = 0 and phi''' - (2 - sigma) m^2 phi' = 0 at y = ell.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "plate/errors.hpp"
#include "plate/numerics/parallel.hpp"
#include "plate/numerics/quadrature.hpp"
#include "plate/numerics/root.hpp"

namespace plate {

struct PlateConfig {
  double ell = std::numbers::pi / 150.0;
  double sigma = 0.2;
  double alpha = 0.5;
  double beta = 1.5;
  int n_modes = 30;

  double area() const { return 2.0 * std::numbers::pi * ell; }

  void validate() const {
    if (!(ell > 0.0) || !std::isfinite(ell)) throw Error(ErrorCode::InvalidConfig, "ell must be positive");
    if (!(sigma > 0.0 && sigma < 0.5)) throw Error(ErrorCode::InvalidConfig, "sigma must lie in (0, 1/2)");
    if (!(alpha > 0.0 && alpha < 1.0 && beta > 1.0) || !std::isfinite(beta)) {
      throw Error(ErrorCode::InvalidConfig, "density bounds must satisfy 0 < alpha < 1 < beta");
    }
    if (n_modes < 1) throw Error(ErrorCode::InvalidConfig, "n_modes must be >= 1");
  }
};

enum class Parity { Even, Odd };

inline const char* to_string(Parity p) { return p == Parity::Even ? "even" : "odd"; }

/// (m, k, parity): x-frequency, y-branch index and y-parity of a
/// homogeneous mode. Even modes are longitudinal, odd modes torsional.
struct Mode {
  int m = 1;
  int k = 1;
  Parity parity = Parity::Even;

  friend bool operator==(const Mode&, const Mode&) = default;
};

/// Even-low: Lambda < m^4, cosh/cosh profile. Even-high: Lambda > m^4,
/// cosh/cos profile. Odd: sinh/sin above m^4 and sinh/sinh below.
enum class Branch { EvenLow, EvenHigh, Odd };

enum class ProfileKind { CoshCosh, CoshCos, SinhSin, SinhSinh };

struct HomEigenpair {
  Mode mode;
  double lambda = 0.0;
  double c = 0.0;      // sqrt(|sqrt(Lambda) - m^2|)
  double c_bar = 0.0;  // sqrt(sqrt(Lambda) + m^2)
  double norm_const = 1.0;
  ProfileKind kind = ProfileKind::CoshCosh;
  double coef_bar = 0.0;  // coefficient of the c_bar term before normalisation
  double coef = 0.0;      // coefficient of the c term before normalisation
  double ell = 0.0;
};

struct HomSpectrum {
  std::vector<HomEigenpair> mu;  // longitudinal, ascending
  std::vector<HomEigenpair> nu;  // torsional, ascending
  int j0 = 0;
  std::vector<std::string> warnings;

  const std::vector<HomEigenpair>& basis(Parity p) const { return p == Parity::Even ? mu : nu; }
};

namespace detail {

inline double m4(int m) {
  const double mm = static_cast<double>(m) * m;
  return mm * mm;
}

struct Wavenumbers {
  double c;
  double c_bar;
};

inline Wavenumbers wavenumbers(double lam, int m) {
  const double s = std::sqrt(lam);
  const double mm = static_cast<double>(m) * m;
  return {std::sqrt(std::abs(s - mm)), std::sqrt(s + mm)};
}

// -expm1(-2x) = 1 - exp(-2x), accurate for small x.
inline double one_minus_exp2(double x) { return -std::expm1(-2.0 * x); }

// cosh(a y) / cosh(a ell) and sinh(a y) / cosh(a ell) without overflow.
inline double cosh_ratio(double a, double y, double ell) {
  const double ay = std::abs(y) * a;
  return std::exp(ay - a * ell) * (1.0 + std::exp(-2.0 * ay)) / (1.0 + std::exp(-2.0 * a * ell));
}
inline double sinh_over_cosh(double a, double y, double ell) {
  const double ay = std::abs(y) * a;
  const double v = std::exp(ay - a * ell) * one_minus_exp2(ay) / (1.0 + std::exp(-2.0 * a * ell));
  return y < 0.0 ? -v : v;
}
// sinh(a y) / sinh(a ell) and cosh(a y) / sinh(a ell).
inline double sinh_ratio(double a, double y, double ell) {
  const double ay = std::abs(y) * a;
  const double v = std::exp(ay - a * ell) * one_minus_exp2(ay) / one_minus_exp2(a * ell);
  return y < 0.0 ? -v : v;
}
inline double cosh_over_sinh(double a, double y, double ell) {
  const double ay = std::abs(y) * a;
  return std::exp(ay - a * ell) * (1.0 + std::exp(-2.0 * ay)) / one_minus_exp2(a * ell);
}

}  // namespace detail

/// Free-edge determinant of the two-parameter even/odd solution space,
/// divided by cosh(ell c_bar) (and cosh(ell c) on the low branches) and then
/// by the sum of the magnitudes of its two terms, so the result lies in
/// [-1, 1]. Zeros are the homogeneous eigenvalues of the branch.
inline double characteristic_det(double lam, int m, Branch branch, const PlateConfig& cfg) {
  if (!(lam > 0.0)) throw Error(ErrorCode::BranchMismatch, "lambda must be positive");
  const double mm4 = detail::m4(m);
  const bool low = lam < mm4;
  if (lam == mm4) throw Error(ErrorCode::BranchMismatch, "lambda == m^4 is not on any branch");
  if (branch == Branch::EvenLow && !low) {
    throw Error(ErrorCode::BranchMismatch, "even-low branch requires lambda < m^4");
  }
  if (branch == Branch::EvenHigh && low) {
    throw Error(ErrorCode::BranchMismatch, "even-high branch requires lambda > m^4");
  }
  const auto [c, cb] = detail::wavenumbers(lam, m);
  const double ell = cfg.ell;
  const double sm = cfg.sigma * static_cast<double>(m) * m;
  double t1 = 0.0;
  double t2 = 0.0;
  switch (branch) {
    case Branch::EvenLow:
      t1 = cb * (sm - c * c) * (sm - c * c) * std::tanh(cb * ell);
      t2 = -c * (cb * cb - sm) * (cb * cb - sm) * std::tanh(c * ell);
      break;
    case Branch::EvenHigh:
      t1 = (cb * cb - sm) * (cb * cb - sm) * c * std::sin(c * ell);
      t2 = (c * c + sm) * (c * c + sm) * cb * std::tanh(cb * ell) * std::cos(c * ell);
      break;
    case Branch::Odd:
      if (low) {
        t1 = cb * (sm - c * c) * (sm - c * c) * std::tanh(c * ell);
        t2 = -c * (cb * cb - sm) * (cb * cb - sm) * std::tanh(cb * ell);
      } else {
        t1 = (c * c + sm) * (c * c + sm) * cb * std::sin(c * ell);
        t2 = -(cb * cb - sm) * (cb * cb - sm) * c * std::tanh(cb * ell) * std::cos(c * ell);
      }
      break;
  }
  const double scale = std::abs(t1) + std::abs(t2);
  if (scale == 0.0) return 0.0;
  return (t1 + t2) / scale;
}

/// ell m sqrt(2) coth(ell m sqrt(2)) > ((2 - sigma) / sigma)^2.
inline bool torsional_first_exists(int m, const PlateConfig& cfg) {
  const double x = cfg.ell * m * std::numbers::sqrt2;
  const double rhs = (2.0 - cfg.sigma) / cfg.sigma;
  return x / std::tanh(x) > rhs * rhs;
}

struct C0Report {
  bool holds = false;
  double s_star = 0.0;
};

/// Unique s > 0 with tanh(sqrt(2) s ell) = (sigma / (2 - sigma))^2 sqrt(2) s ell;
/// the spectrum is fully described by the four families only when s is not
/// an integer (within 1e-9).
inline C0Report check_c0(const PlateConfig& cfg) {
  const double kappa = std::pow(cfg.sigma / (2.0 - cfg.sigma), 2);
  auto g = [kappa](double z) { return std::tanh(z) - kappa * z; };
  const double z = numerics::find_root(g, {1e-3, 1.0 / kappa + 1.0}, 1e-15);
  C0Report r;
  r.s_star = z / (std::numbers::sqrt2 * cfg.ell);
  r.holds = std::abs(r.s_star - std::round(r.s_star)) > 1e-9;
  return r;
}

/// Unnormalised profile value or derivative (order 0, 1, 2) in y.
inline double raw_profile(const HomEigenpair& e, double y, int deriv) {
  const double ell = e.ell;
  const double a = e.c_bar;
  const double b = e.c;
  const double pa = deriv == 0 ? 1.0 : (deriv == 1 ? a : a * a);
  const double pb = deriv == 0 ? 1.0 : (deriv == 1 ? b : b * b);
  double bar_term = 0.0;
  double term = 0.0;
  switch (e.kind) {
    case ProfileKind::CoshCosh:
    case ProfileKind::CoshCos:
      bar_term = deriv == 1 ? detail::sinh_over_cosh(a, y, ell) : detail::cosh_ratio(a, y, ell);
      break;
    case ProfileKind::SinhSin:
    case ProfileKind::SinhSinh:
      bar_term = deriv == 1 ? detail::cosh_over_sinh(a, y, ell) : detail::sinh_ratio(a, y, ell);
      break;
  }
  switch (e.kind) {
    case ProfileKind::CoshCosh:
      term = deriv == 1 ? detail::sinh_over_cosh(b, y, ell) : detail::cosh_ratio(b, y, ell);
      break;
    case ProfileKind::SinhSinh:
      term = deriv == 1 ? detail::cosh_over_sinh(b, y, ell) : detail::sinh_ratio(b, y, ell);
      break;
    case ProfileKind::CoshCos: {
      const double denom = std::cos(b * ell);
      if (deriv == 0) term = std::cos(b * y) / denom;
      if (deriv == 1) term = -std::sin(b * y) / denom;
      if (deriv == 2) term = -std::cos(b * y) / denom;
      break;
    }
    case ProfileKind::SinhSin: {
      const double denom = std::sin(b * ell);
      if (deriv == 0) term = std::sin(b * y) / denom;
      if (deriv == 1) term = std::cos(b * y) / denom;
      if (deriv == 2) term = -std::sin(b * y) / denom;
      break;
    }
  }
  return e.coef_bar * pa * bar_term + e.coef * pb * term;
}

/// Normalised profile phi(y) (or psi(y)) and its first two derivatives.
inline double profile(const HomEigenpair& e, double y, int deriv = 0) {
  return raw_profile(e, y, deriv) / e.norm_const;
}

/// profile(y) * sin(m x).
inline double eval_eigenfunction(const HomEigenpair& e, double x, double y) {
  return profile(e, y) * std::sin(e.mode.m * x);
}

/// Gauss rule on (-ell, ell) fine enough for products of two profiles with
/// wavenumbers up to `max_wave`.
inline numerics::QuadratureRule profile_rule(double max_wave, double ell) {
  const int panels = 2 + 2 * static_cast<int>(std::ceil(max_wave * ell / std::numbers::pi * 2.0));
  return numerics::QuadratureRule::gauss(16, {}, panels);
}

namespace detail {

inline void finish_pair(HomEigenpair& e, const PlateConfig& cfg) {
  const int m = e.mode.m;
  const double sm = cfg.sigma * static_cast<double>(m) * m;
  const auto [c, cb] = wavenumbers(e.lambda, m);
  e.c = c;
  e.c_bar = cb;
  e.ell = cfg.ell;
  const bool low = e.lambda < m4(m);
  if (e.mode.parity == Parity::Even) {
    e.kind = low ? ProfileKind::CoshCosh : ProfileKind::CoshCos;
    e.coef_bar = low ? sm - c * c : sm + c * c;
  } else {
    e.kind = low ? ProfileKind::SinhSinh : ProfileKind::SinhSin;
    e.coef_bar = low ? sm - c * c : sm + c * c;
  }
  e.coef = cb * cb - sm;
  e.norm_const = 1.0;
  const auto rule = profile_rule(std::max(c, cb), cfg.ell);
  const double ny2 = numerics::integrate_1d(
      [&](double y) {
        const double v = raw_profile(e, y, 0);
        return v * v;
      },
      {-cfg.ell, cfg.ell}, rule);
  e.norm_const = std::sqrt(0.5 * std::numbers::pi * ny2);
  if (!std::isfinite(e.norm_const) || e.norm_const == 0.0) {
    throw Error(ErrorCode::QuadratureFailure, "degenerate eigenfunction normalisation");
  }
}

inline double lam_from_wave(double wave, int m) {
  const double s = static_cast<double>(m) * m + wave * wave;
  return s * s;
}

}  // namespace detail

/// Lower bound on the eigenvalue of `mode` implied by the bracket it is
/// searched in; used to make the ordering scan complete.
inline double eigenvalue_lower_bound(const Mode& mode, const PlateConfig& cfg) {
  const double pi_l = std::numbers::pi / cfg.ell;
  if (mode.k == 1) return (1.0 - cfg.sigma * cfg.sigma) * detail::m4(mode.m);
  if (mode.parity == Parity::Even) return detail::lam_from_wave(pi_l * (mode.k - 1.5), mode.m);
  return detail::lam_from_wave(pi_l * (mode.k - 2.0), mode.m);
}

/// Open interval the eigenvalue of `mode` is isolated in. For odd modes with
/// k >= 2 the wavenumber d ell lies in ((r)pi, (r + 1/2)pi) where r counts the
/// high-branch roots; when the sinh/sinh root exists below m^4 the interval
/// (0, pi/2) holds no root and the count shifts by one.
inline numerics::Bracket eigenvalue_bracket(const Mode& mode, const PlateConfig& cfg,
                                            double even_first = 0.0) {
  const double pi_l = std::numbers::pi / cfg.ell;
  const int m = mode.m;
  const double mm4 = detail::m4(m);
  if (mode.parity == Parity::Even) {
    if (mode.k == 1) return {(1.0 - cfg.sigma * cfg.sigma) * mm4, mm4 * (1.0 - 1e-15)};
    return {detail::lam_from_wave(pi_l * (mode.k - 1.5), m), detail::lam_from_wave(pi_l * (mode.k - 1.0), m)};
  }
  if (mode.k == 1) return {even_first, mm4 * (1.0 - 1e-15)};
  const double r = torsional_first_exists(m, cfg) ? mode.k - 1.0 : mode.k - 2.0;
  // d must stay resolvable next to m^2, or the bracket end collapses onto m^4.
  const double lo_wave = r == 0.0 ? std::max(1e-8 / cfg.ell, 1e-7 * m) : pi_l * r;
  return {detail::lam_from_wave(lo_wave, m), detail::lam_from_wave(pi_l * (r + 0.5), m)};
}

inline HomEigenpair find_hom_eigenvalue(const Mode& mode, const PlateConfig& cfg) {
  if (mode.m < 1 || mode.k < 1) throw Error(ErrorCode::NotAdmissible, "mode indices must be positive");
  double even_first = 0.0;
  if (mode.parity == Parity::Odd && mode.k == 1) {
    if (!torsional_first_exists(mode.m, cfg)) {
      throw Error(ErrorCode::NotAdmissible,
                  "no sinh/sinh torsional eigenvalue for m=" + std::to_string(mode.m));
    }
    even_first = find_hom_eigenvalue({mode.m, 1, Parity::Even}, cfg).lambda;
  }
  const Branch branch = mode.parity == Parity::Odd ? Branch::Odd
                        : mode.k == 1              ? Branch::EvenLow
                                                   : Branch::EvenHigh;
  const numerics::Bracket br = eigenvalue_bracket(mode, cfg, even_first);
  HomEigenpair e;
  e.mode = mode;
  try {
    e.lambda = numerics::find_root(
        [&](double lam) { return characteristic_det(lam, mode.m, branch, cfg); }, br, 1e-12);
  } catch (const Error& err) {
    if (err.code() == ErrorCode::NoSignChange) {
      throw Error(ErrorCode::RootIsolationFailure,
                  "no sign change for (m=" + std::to_string(mode.m) + ", k=" + std::to_string(mode.k) +
                      ", " + to_string(mode.parity) + ")");
    }
    throw;
  }
  detail::finish_pair(e, cfg);
  return e;
}

namespace detail {

/// Every mode of one parity whose bracket lower bound is <= cutoff.
inline std::vector<Mode> modes_below(Parity parity, double cutoff, const PlateConfig& cfg) {
  std::vector<Mode> modes;
  for (int m = 1; (1.0 - cfg.sigma * cfg.sigma) * m4(m) <= cutoff; ++m) {
    if (parity == Parity::Even || torsional_first_exists(m, cfg)) modes.push_back({m, 1, parity});
    for (int k = 2; eigenvalue_lower_bound({m, k, parity}, cfg) <= cutoff; ++k) modes.push_back({m, k, parity});
  }
  return modes;
}

inline std::vector<HomEigenpair> solve_sorted(const std::vector<Mode>& modes, const PlateConfig& cfg) {
  std::vector<HomEigenpair> out(modes.size());
  numerics::parallel_for(modes.size(), [&](std::size_t i) { out[i] = find_hom_eigenvalue(modes[i], cfg); });
  std::stable_sort(out.begin(), out.end(), [](const HomEigenpair& a, const HomEigenpair& b) {
    if (a.lambda != b.lambda) return a.lambda < b.lambda;
    if (a.mode.m != b.mode.m) return a.mode.m < b.mode.m;
    return a.mode.k < b.mode.k;
  });
  return out;
}

}  // namespace detail

/// All eigenpairs of one parity whose bracket lower bound is <= cutoff,
/// sorted ascending (ties by m, then k).
inline std::vector<HomEigenpair> eigenpairs_below(Parity parity, double cutoff, const PlateConfig& cfg) {
  return detail::solve_sorted(detail::modes_below(parity, cutoff, cfg), cfg);
}

/// The n lowest eigenpairs of one parity. A coarse cap (the n-th smallest
/// first-branch value over m = 1..n) bounds the candidate modes; the n-th
/// smallest bracket upper end among them is a cutoff no omitted eigenvalue
/// can undercut, and only modes whose bracket starts below it are solved.
/// `scan_factor` > 1 widens the window (used to check completeness).
inline std::vector<HomEigenpair> lowest_eigenpairs(Parity parity, int n, const PlateConfig& cfg,
                                                   double scan_factor = 1.0) {
  std::vector<double> seeds;
  for (int m = 1; m <= n; ++m) {
    Mode first{m, 1, parity};
    if (parity == Parity::Odd && !torsional_first_exists(m, cfg)) first.k = 2;
    seeds.push_back(find_hom_eigenvalue(first, cfg).lambda);
  }
  std::sort(seeds.begin(), seeds.end());
  const double cap = seeds[static_cast<std::size_t>(n - 1)];
  std::vector<double> upper;
  for (const Mode& mode : detail::modes_below(parity, cap, cfg)) {
    upper.push_back(mode.k == 1 ? detail::m4(mode.m) : eigenvalue_bracket(mode, cfg).hi);
  }
  std::nth_element(upper.begin(), upper.begin() + (n - 1), upper.end());
  const double cutoff = std::min(cap, upper[static_cast<std::size_t>(n - 1)]) * scan_factor;
  auto all = eigenpairs_below(parity, cutoff, cfg);
  all.resize(static_cast<std::size_t>(n));
  return all;
}

inline constexpr int kMaxModes = 200;

inline HomSpectrum build_spectrum(const PlateConfig& cfg) {
  cfg.validate();
  if (cfg.n_modes > kMaxModes) {
    throw Error(ErrorCode::InvalidConfig, "n_modes exceeds the cap of " + std::to_string(kMaxModes));
  }
  const C0Report c0 = check_c0(cfg);
  if (!c0.holds) {
    throw Error(ErrorCode::C0Violated, "s* = " + std::to_string(c0.s_star) + " is an integer");
  }
  HomSpectrum spec;
  spec.nu = lowest_eigenpairs(Parity::Odd, cfg.n_modes, cfg);
  const double nu1 = spec.nu.front().lambda;
  // j0 needs every longitudinal eigenvalue below nu_1, which may exceed n_modes.
  const auto below = eigenpairs_below(Parity::Even, nu1, cfg);
  spec.j0 = static_cast<int>(std::count_if(below.begin(), below.end(),
                                           [nu1](const HomEigenpair& e) { return e.lambda < nu1; }));
  spec.mu = lowest_eigenpairs(Parity::Even, cfg.n_modes, cfg);
  auto flag = [&](const std::vector<HomEigenpair>& v, const char* name) {
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (std::abs(v[i].lambda - v[i - 1].lambda) <= 1e-9 * v[i].lambda) {
        spec.warnings.push_back(std::string("near-multiple ") + name + " eigenvalues at index " +
                                std::to_string(i));
      }
    }
  };
  flag(spec.mu, "longitudinal");
  flag(spec.nu, "torsional");
  for (const auto& e : spec.mu) {
    for (const auto& t : spec.nu) {
      if (std::abs(e.lambda - t.lambda) <= 1e-9 * e.lambda) {
        spec.warnings.push_back("longitudinal and torsional eigenvalue coincide near " +
                                std::to_string(e.lambda));
      }
    }
  }
  return spec;
}

/// H^2_* energy of profile(y) sin(m x), integrated in x analytically:
/// (pi/2) int [(phi'' - m^2 phi)^2 + (1 - sigma)(2 m^2 phi'^2 + 2 m^2 phi phi'')] dy.
inline double hom_energy(const HomEigenpair& e, double sigma) {
  const double mm = static_cast<double>(e.mode.m) * e.mode.m;
  const auto rule = profile_rule(std::max(e.c, e.c_bar), e.ell);
  const double integral = numerics::integrate_1d(
      [&](double y) {
        const double f = profile(e, y, 0);
        const double f1 = profile(e, y, 1);
        const double f2 = profile(e, y, 2);
        const double lap = f2 - mm * f;
        return lap * lap + (1.0 - sigma) * (2.0 * mm * f1 * f1 + 2.0 * mm * f * f2);
      },
      {-e.ell, e.ell}, rule);
  return 0.5 * std::numbers::pi * integral;
}

}  // namespace plate
