#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "plate/errors.hpp"

namespace plate::numerics {

struct Interval {
  double lo;
  double hi;
  double length() const { return hi - lo; }
};

/// Nodes and weights of an n-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

inline GaussLegendre compute_gauss_legendre(int n) {
  GaussLegendre rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi initial guess followed by Newton on P_n.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute derivative at the converged node.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    rule.nodes[lo] = -x;
    rule.nodes[hi] = x;
    rule.weights[lo] = w;
    rule.weights[hi] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return rule;
}

}  // namespace detail

/// Cached rule; safe to call concurrently.
inline const GaussLegendre& gauss_legendre(int n) {
  if (n < 1) throw Error(ErrorCode::InvalidConfig, "Gauss-Legendre order must be positive");
  static std::mutex mutex;
  static std::map<int, GaussLegendre> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) {
    it = cache.emplace(n, detail::compute_gauss_legendre(n)).first;
  }
  return it->second;
}

enum class QuadratureKind { GaussLegendre, CompositeMidpoint };

/// A 1D rule applied independently on every smooth piece of an interval.
/// `order` is the number of Gauss points (or midpoint cells) per panel and
/// each piece between consecutive breakpoints is split into `panels` equal
/// panels.
struct QuadratureRule {
  QuadratureKind kind = QuadratureKind::GaussLegendre;
  int order = 24;
  std::vector<double> breakpoints;
  int panels = 1;

  static QuadratureRule gauss(int order, std::vector<double> breakpoints = {}, int panels = 1) {
    return {QuadratureKind::GaussLegendre, order, std::move(breakpoints), panels};
  }
  static QuadratureRule midpoint(int cells, std::vector<double> breakpoints = {}) {
    return {QuadratureKind::CompositeMidpoint, cells, std::move(breakpoints), 1};
  }
};

/// Smooth pieces of `iv` induced by the rule's breakpoints. Breakpoints must be
/// strictly increasing and lie strictly inside the interval.
inline std::vector<Interval> pieces(const QuadratureRule& rule, Interval iv) {
  std::vector<Interval> out;
  double left = iv.lo;
  double prev = -std::numeric_limits<double>::infinity();
  for (double b : rule.breakpoints) {
    if (!(b > prev)) throw Error(ErrorCode::InvalidConfig, "breakpoints must be strictly increasing");
    if (!(b > iv.lo && b < iv.hi)) {
      throw Error(ErrorCode::InvalidConfig, "breakpoint " + std::to_string(b) + " outside interval");
    }
    out.push_back({left, b});
    left = b;
    prev = b;
  }
  out.push_back({left, iv.hi});
  return out;
}

/// Flattened nodes and weights of a rule on an interval, in a fixed order.
struct NodeSet {
  std::vector<double> x;
  std::vector<double> w;
};

inline NodeSet nodes(const QuadratureRule& rule, Interval iv) {
  if (rule.order < 1 || rule.panels < 1) {
    throw Error(ErrorCode::InvalidConfig, "quadrature order and panels must be positive");
  }
  NodeSet out;
  for (const Interval& piece : pieces(rule, iv)) {
    const double width = piece.length() / rule.panels;
    for (int p = 0; p < rule.panels; ++p) {
      const double a = piece.lo + p * width;
      if (rule.kind == QuadratureKind::GaussLegendre) {
        const GaussLegendre& gl = gauss_legendre(rule.order);
        const double half = 0.5 * width;
        const double mid = a + half;
        for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
          out.x.push_back(mid + half * gl.nodes[i]);
          out.w.push_back(half * gl.weights[i]);
        }
      } else {
        const double h = width / rule.order;
        for (int i = 0; i < rule.order; ++i) {
          out.x.push_back(a + (i + 0.5) * h);
          out.w.push_back(h);
        }
      }
    }
  }
  return out;
}

template <typename F>
double integrate_1d(F&& f, Interval iv, const QuadratureRule& rule) {
  const NodeSet ns = nodes(rule, iv);
  double sum = 0.0;
  for (std::size_t i = 0; i < ns.x.size(); ++i) {
    const double v = f(ns.x[i]);
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "non-finite integrand sample");
    sum += ns.w[i] * v;
  }
  return sum;
}

/// Tensor-product quadrature over ix x iy. The summation order is fixed
/// (outer x, inner y) so results are bit-reproducible.
template <typename F>
double integrate_2d(F&& f, Interval ix, Interval iy, const QuadratureRule& rule_x,
                    const QuadratureRule& rule_y) {
  const NodeSet nx = nodes(rule_x, ix);
  const NodeSet ny = nodes(rule_y, iy);
  double total = 0.0;
  for (std::size_t i = 0; i < nx.x.size(); ++i) {
    double col = 0.0;
    for (std::size_t j = 0; j < ny.x.size(); ++j) {
      const double v = f(nx.x[i], ny.x[j]);
      if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "non-finite integrand sample");
      col += ny.w[j] * v;
    }
    total += nx.w[i] * col;
  }
  return total;
}

}  // namespace plate::numerics
