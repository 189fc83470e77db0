#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "plate/weights.hpp"

using namespace plate;

namespace {

const double kPi = std::numbers::pi;

/// Mass by brute-force midpoint sampling of eval().
double sampled_mass(const Weight& w, int nx, int ny) {
  const double hx = kPi / nx;
  const double hy = 2.0 * w.ell / ny;
  double s = 0.0;
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) s += eval(w, (i + 0.5) * hx, -w.ell + (j + 0.5) * hy);
  }
  return s * hx * hy;
}

}  // namespace

TEST(GridField, GeometryAndCellAreas) {
  const PlateConfig cfg;
  GridField g(101, 31, cfg.ell);
  EXPECT_EQ(g.y(15), 0.0);
  EXPECT_EQ(g.x(100), kPi);
  double area = 0.0;
  for (int i = 0; i < g.nx; ++i) {
    for (int j = 0; j < g.ny; ++j) area += g.cell_area(i, j);
  }
  EXPECT_NEAR(area, cfg.area(), 1e-13);
  EXPECT_THROW(GridField(10, 30, cfg.ell), Error);
  EXPECT_EQ(g.node_of(0.0, 0.0), std::make_pair(0, 15));
}

TEST(GridField, ParityResidual) {
  const PlateConfig cfg;
  auto even = GridField::sample(21, 11, cfg.ell, Parity::Even, [](double x, double y) { return x + y * y; });
  auto odd = GridField::sample(21, 11, cfg.ell, Parity::Odd, [](double x, double y) { return x * y; });
  EXPECT_LT(even.parity_residual(), 1e-15);
  EXPECT_LT(odd.parity_residual(), 1e-15);
  odd.parity = Parity::Even;
  EXPECT_GT(odd.parity_residual(), 0.5);
}

TEST(Weights, UniformIsAdmissible) {
  const PlateConfig cfg;
  const Weight w = uniform_weight(cfg);
  EXPECT_EQ(eval(w, 1.0, 0.0), 1.0);
  EXPECT_TRUE(validate(w, cfg).passes);
  EXPECT_DOUBLE_EQ(mass(w), cfg.area());
}

TEST(Weights, NamedWeightsConserveMass) {
  const PlateConfig cfg;
  for (const Weight& w : {make_pbar_j(1, cfg), make_pbar_j(10, cfg), make_pj_sin4(5, cfg), make_breve_p(cfg),
                          make_doublebar_p(cfg), make_tilde_p(cfg)}) {
    const MembershipReport r = validate(w, cfg);
    EXPECT_TRUE(r.passes) << w.label;
    EXPECT_LT(std::abs(r.mass_error), 1e-12) << w.label;
    EXPECT_NEAR(sampled_mass(w, 4000, 200) / cfg.area(), 1.0, 2e-3) << w.label;
  }
}

TEST(Weights, PbarBandsCentredOnPeaks) {
  const PlateConfig cfg;
  const Weight w = make_pbar_j(10, cfg);
  ASSERT_EQ(w.x_intervals.size(), 10u);
  for (int h = 1; h <= 10; ++h) {
    const auto& iv = w.x_intervals[static_cast<std::size_t>(h - 1)];
    EXPECT_NEAR(0.5 * (iv.lo + iv.hi), kPi * (2 * h - 1) / 20.0, 1e-15);
    EXPECT_NEAR(iv.length(), kPi / 20.0, 1e-15);  // (1 - alpha)/(beta - alpha) = 1/2 of pi/10
  }
  const Weight p1 = make_pbar_j(1, cfg);
  EXPECT_NEAR(p1.x_intervals[0].lo, kPi / 4.0, 1e-15);
  EXPECT_NEAR(p1.x_intervals[0].hi, 3.0 * kPi / 4.0, 1e-15);
}

TEST(Weights, EvalUsesHalfOpenIntervals) {
  const PlateConfig cfg;
  const Weight w = x_bands({{1.0, 2.0}}, cfg.beta, cfg.alpha, cfg);
  EXPECT_EQ(eval(w, 1.0, 0.0), cfg.beta);
  EXPECT_EQ(eval(w, 2.0, 0.0), cfg.alpha);
}

TEST(Weights, Sin4ThresholdClosedForm) {
  EXPECT_NEAR(sin4_threshold(0.5), 0.25, 1e-12);
  // Grid oracle: fraction of fine samples of sin^4(5x) at or below t.
  for (double frac : {0.2, 0.5, 0.7}) {
    const double t = sin4_threshold(frac);
    const int n = 2000000;
    int below = 0;
    for (int i = 0; i < n; ++i) {
      const double s = std::sin(5.0 * (i + 0.5) * kPi / n);
      below += s * s * s * s <= t;
    }
    EXPECT_NEAR(static_cast<double>(below) / n, frac, 1e-5);
  }
}

TEST(Weights, Sin4WeightPutsBetaOnSuperlevelSet) {
  const PlateConfig cfg;
  const Weight w = make_pj_sin4(4, cfg);
  EXPECT_NEAR(w.threshold, 0.25, 1e-12);
  for (double x = 0.01; x < kPi; x += 0.01) {
    const double s4 = std::pow(std::sin(4.0 * x), 4);
    if (std::abs(s4 - w.threshold) < 1e-6) continue;
    EXPECT_EQ(eval(w, x, 0.0), s4 > w.threshold ? cfg.beta : cfg.alpha) << x;
  }
}

TEST(Weights, BreveAndDoublebarGeometry) {
  const PlateConfig cfg;
  const Weight b = make_breve_p(cfg);
  EXPECT_NEAR(b.y_intervals[0].hi, cfg.ell / 2.0, 1e-15);
  EXPECT_EQ(eval(b, 1.0, 0.0), cfg.beta);
  EXPECT_EQ(eval(b, 1.0, 0.9 * cfg.ell), cfg.alpha);
  const Weight d = make_doublebar_p(cfg);
  EXPECT_EQ(eval(d, kPi / 2, 0.0), cfg.alpha);
  EXPECT_EQ(eval(d, 0.1, 0.0), cfg.beta);
  EXPECT_NEAR(d.x_intervals[0].hi, kPi / 4.0, 1e-15);
}

TEST(Weights, TildeUsesCommonWidthScale) {
  const PlateConfig cfg;
  const Weight t = make_tilde_p(cfg);
  // At alpha = 1/2, beta = 3/2 the beta share of the union is s - s^2/4 with
  // each component at share s/2; mass balance gives s = 2 - sqrt(2).
  const double s = 2.0 - std::numbers::sqrt2;
  EXPECT_NEAR(t.y_intervals[0].hi, s * cfg.ell / 2.0, 1e-12);
  EXPECT_NEAR(t.x_intervals[0].length(), s * kPi / 20.0, 1e-12);
  EXPECT_EQ(eval(t, kPi / 20.0, 0.9 * cfg.ell), cfg.beta);  // x-band only
  EXPECT_EQ(eval(t, kPi / 10.0, 0.0), cfg.beta);            // y-strip only
  EXPECT_EQ(eval(t, kPi / 10.0, 0.9 * cfg.ell), cfg.alpha);
}

TEST(Weights, ValidateReportsViolations) {
  const PlateConfig cfg;
  EXPECT_FALSE(validate(x_bands({{0.0, kPi / 2}}, 2.0, 0.0, cfg), cfg).passes);  // bounds
  EXPECT_FALSE(validate(y_bands({{0.0, cfg.ell}}, cfg.beta, cfg.alpha, cfg), cfg).passes);  // symmetry
  EXPECT_FALSE(validate(x_bands({{0.0, 1.0}}, cfg.beta, cfg.alpha, cfg), cfg).passes);  // mass
  const auto r = validate(x_bands({{0.0, 1.0}}, cfg.beta, cfg.alpha, cfg), cfg);
  EXPECT_EQ(r.violations.size(), 1u);
}

TEST(Weights, RandomBandWeightsAreAdmissible) {
  const PlateConfig cfg;
  std::mt19937_64 rng(99);
  for (int i = 0; i < 50; ++i) {
    const Weight w = oracle::random_band_weight(cfg, rng);
    const auto r = validate(w, cfg);
    EXPECT_TRUE(r.passes) << w.label << ": " << (r.violations.empty() ? "" : r.violations.front());
  }
}

TEST(Threshold, MatchesTargetAreaExactly) {
  const PlateConfig cfg;
  const GridField f = GridField::sample(201, 21, cfg.ell, Parity::Even, [&](double x, double y) {
    return std::pow(std::sin(x), 2) * (1.0 + y * y / (cfg.ell * cfg.ell));
  });
  for (double share : {0.1, 0.25, 0.5, 0.9}) {
    const double target = share * cfg.area();
    const ThresholdResult th = threshold_for_area(f, target);
    EXPECT_FALSE(th.degenerate);
    double got = 0.0;
    for (int i = 0; i < f.nx; ++i) {
      for (int j = 0; j < f.ny; ++j) {
        const double m = th.membership[static_cast<std::size_t>(i) * f.ny + j];
        got += m * f.cell_area(i, j);
        if (m == 1.0) {
          EXPECT_LE(f.at(i, j), th.t + 1e-15);
        }
        if (m == 0.0) {
          EXPECT_GE(f.at(i, j), th.t - 1e-15);
        }
      }
    }
    EXPECT_NEAR(got, target, 1e-14);
  }
}

TEST(Threshold, ConstantFieldIsDegenerate) {
  const PlateConfig cfg;
  const GridField f = GridField::sample(11, 5, cfg.ell, Parity::Even, [](double, double) { return 3.0; });
  const ThresholdResult th = threshold_for_area(f, 0.5 * cfg.area());
  EXPECT_TRUE(th.degenerate);
  const Weight w = sublevel_weight(f, 0.5 * cfg.area(), cfg.beta, cfg.alpha, cfg);
  EXPECT_TRUE(w.degenerate);
  EXPECT_TRUE(validate(w, cfg).passes);
}

TEST(Threshold, RejectsImpossibleTarget) {
  const PlateConfig cfg;
  const GridField f(11, 5, cfg.ell);
  EXPECT_THROW(threshold_for_area(f, 0.0), Error);
  EXPECT_THROW(threshold_for_area(f, 2.0 * cfg.area()), Error);
}

TEST(Sublevel, WeightIsEvenAndAdmissible) {
  const PlateConfig cfg;
  const GridField f = GridField::sample(301, 31, cfg.ell, Parity::Even, [&](double x, double y) {
    return std::pow(std::sin(x) * std::sinh(3.0 * y / cfg.ell), 2) + 0.01 * x;
  });
  const Weight w = sublevel_weight(f, 0.5 * cfg.area(), cfg.beta, cfg.alpha, cfg);
  EXPECT_TRUE(validate(w, cfg).passes);
  EXPECT_LT(w.density.parity_residual(), 1e-15);
  EXPECT_EQ(phase_difference_area(w, w), 0.0);
  const Weight v = sublevel_weight(f, 0.4 * cfg.area(), cfg.beta, cfg.alpha, cfg);
  EXPECT_NEAR(phase_difference_area(w, v), 0.1 * cfg.area(), 1e-12);
}
