#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "plate/errors.hpp"

namespace plate::numerics {

/// Dense symmetric matrix. Writes go through set() which mirrors the entry,
/// so the stored matrix is exactly symmetric.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

  static SymMatrix identity(std::size_t n) {
    SymMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, 1.0);
    return m;
  }

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, double v) {
    data_[i * n_ + j] = v;
    data_[j * n_ + i] = v;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
  }

  double trace() const {
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i) s += (*this)(i, i);
    return s;
  }

  std::span<const double> raw() const { return data_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Eigen-decomposition result. Column k of `vectors` (stored column-major,
/// i.e. vectors[k * n + i]) belongs to values[k]; values ascend.
struct EigenSystem {
  std::vector<double> values;
  std::vector<double> vectors;
  std::size_t n = 0;

  std::span<const double> vector(std::size_t k) const {
    return std::span<const double>(vectors).subspan(k * n, n);
  }
};

/// Cyclic Jacobi with the Rutishauser rotation formulas.
inline EigenSystem sym_eig(const SymMatrix& input, int max_sweeps = 100) {
  const std::size_t n = input.size();
  std::vector<double> a(input.raw().begin(), input.raw().end());
  for (double v : a) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "non-finite matrix entry");
  }
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  auto A = [&](std::size_t i, std::size_t j) -> double& { return a[i * n + j]; };
  // V is stored row-major here: V(i, k) is component i of vector k.
  auto V = [&](std::size_t i, std::size_t k) -> double& { return v[i * n + k]; };

  // A rotation is skipped once the off-diagonal entry is negligible relative
  // to the geometric mean of the two diagonal entries; this keeps the small
  // eigenvalues of strongly graded positive definite matrices relatively
  // accurate. Convergence is a full sweep without rotations.
  bool converged = n <= 1;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = A(p, q);
        const double app = A(p, p);
        const double aqq = A(q, q);
        if (std::abs(apq) <= 1e-17 * std::sqrt(std::abs(app * aqq)) || std::abs(apq) < 1e-300) {
          A(p, q) = A(q, p) = 0.0;
          continue;
        }
        rotated = true;
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);
        A(p, p) = app - t * apq;
        A(q, q) = aqq + t * apq;
        A(p, q) = A(q, p) = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double arp = A(r, p);
          const double arq = A(r, q);
          const double nrp = arp - s * (arq + tau * arp);
          const double nrq = arq + s * (arp - tau * arq);
          A(r, p) = A(p, r) = nrp;
          A(r, q) = A(q, r) = nrq;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double vrp = V(r, p);
          const double vrq = V(r, q);
          V(r, p) = vrp - s * (vrq + tau * vrp);
          V(r, q) = vrq + s * (vrp - tau * vrq);
        }
      }
    }
    converged = !rotated;
  }
  if (!converged) throw Error(ErrorCode::NoConvergence, "Jacobi sweeps exhausted");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return A(i, i) < A(j, j); });

  EigenSystem out;
  out.n = n;
  out.values.resize(n);
  out.vectors.resize(n * n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = order[k];
    out.values[k] = A(src, src);
    // Fix the sign so the largest-magnitude component is positive.
    std::size_t imax = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (std::abs(V(i, src)) > std::abs(V(imax, src))) imax = i;
    }
    const double sign = V(imax, src) < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) out.vectors[k * n + i] = sign * V(i, src);
  }
  return out;
}

}  // namespace plate::numerics
