#pragma once

// Command-line front end. Commands write CSV/JSON artifacts into --out and
// map library errors to exit codes: 0 ok, 2 configuration, 3 weight,
// 4 non-convergence, 1 anything else.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "plate/errors.hpp"
#include "plate/galerkin.hpp"
#include "plate/io.hpp"
#include "plate/optimize.hpp"
#include "plate/spectrum.hpp"
#include "plate/weights.hpp"

namespace plate::cli {

enum ExitCode : int { kOk = 0, kInternal = 1, kConfig = 2, kWeight = 3, kNoConvergence = 4 };

inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::C0Violated: return kConfig;
    case ErrorCode::InvalidWeight:
    case ErrorCode::NotAdmissible:
    case ErrorCode::DegenerateField: return kWeight;
    case ErrorCode::NoConvergence:
    case ErrorCode::MaxItersExceeded: return kNoConvergence;
    default: return kInternal;
  }
}

struct RunConfig {
  PlateConfig plate;
  int nx = 601;
  int ny = 31;
  double epsilon = 1e-4;
  int max_iters = 100;
  std::filesystem::path out = ".";
  std::string weight_file;
  bool weyl = false;
  // optimize
  std::string target = "min-mu";
  int j = 10;
  bool sin4 = false;
  // eigs
  int eigenfunctions = 0;

  OptimizeOptions options() const {
    OptimizeOptions o;
    o.N = plate.n_modes;
    o.nx = nx;
    o.ny = ny;
    o.epsilon = epsilon;
    o.max_iters = max_iters;
    return o;
  }

  void validate() const {
    plate.validate();
    if (nx < 2 || ny < 3 || ny % 2 == 0) throw Error(ErrorCode::InvalidConfig, "--grid needs NX >= 2 and odd NY >= 3");
    if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidConfig, "--epsilon must be positive");
    if (max_iters < 1) throw Error(ErrorCode::InvalidConfig, "--max-iters must be >= 1");
  }
};

inline io::json plate_json(const PlateConfig& p) {
  return {{"ell", p.ell}, {"sigma", p.sigma}, {"alpha", p.alpha}, {"beta", p.beta}, {"n_modes", p.n_modes}};
}

/// Largest m with no sinh/sinh torsional eigenvalue (0 if it exists for m = 1).
inline int torsional_first_threshold(const PlateConfig& cfg) {
  int m = 0;
  while (m < 100000000 && !torsional_first_exists(m + 1, cfg)) ++m;
  return m;
}

inline io::SpectrumWeightFactory pstar_factory(const PlateConfig& cfg, const HomSpectrum& spectrum,
                                               const OptimizeOptions& opt) {
  return [&cfg, &spectrum, opt](const std::string&) { return make_pstar(cfg, spectrum, opt); };
}

inline Weight load_weight(const RunConfig& rc, const HomSpectrum& spectrum) {
  if (rc.weight_file.empty()) return uniform_weight(rc.plate);
  Weight w = io::read_weight(rc.weight_file, rc.plate, pstar_factory(rc.plate, spectrum, rc.options()));
  const MembershipReport rep = validate(w, rc.plate);
  if (!rep.passes) {
    std::string msg = "weight is not admissible:";
    for (const auto& v : rep.violations) msg += "\n  " + v;
    throw Error(ErrorCode::InvalidWeight, msg);
  }
  return w;
}

inline int cmd_spectrum(const RunConfig& rc) {
  if (rc.plate.n_modes < 12) throw Error(ErrorCode::InvalidConfig, "spectrum table needs --n-modes >= 12");
  const HomSpectrum s = build_spectrum(rc.plate);
  std::ostringstream csv;
  csv << "m,mu_m,nu_m\n";
  for (std::size_t i = 0; i < 12; ++i) {
    csv << i + 1 << ',' << io::fmt(s.mu[i].lambda) << ',' << io::fmt(s.nu[i].lambda) << '\n';
  }
  io::write_atomic(rc.out / "table1.csv", csv.str());
  const C0Report c0 = check_c0(rc.plate);
  io::json meta = {{"plate", plate_json(rc.plate)},
                   {"j0", s.j0},
                   {"c0_holds", c0.holds},
                   {"s_star", c0.s_star},
                   {"torsional_first_absent_up_to_m", torsional_first_threshold(rc.plate)},
                   {"warnings", s.warnings}};
  io::write_atomic(rc.out / "spectrum_meta.json", meta.dump(2) + "\n");
  std::printf("j0 = %d, s* = %.6f, table1.csv written to %s\n", s.j0, c0.s_star, rc.out.string().c_str());
  return kOk;
}

inline int cmd_eigs(const RunConfig& rc) {
  const HomSpectrum s = build_spectrum(rc.plate);
  const Weight w = load_weight(rc, s);
  const GalerkinSpectrum gs = solve_weighted(w, s, rc.plate.n_modes);
  std::ostringstream csv;
  csv << "index,parity,value\n";
  for (Parity p : {Parity::Even, Parity::Odd}) {
    const auto& v = gs.values(p);
    for (std::size_t i = 0; i < v.size(); ++i) csv << i + 1 << ',' << to_string(p) << ',' << io::fmt(v[i]) << '\n';
  }
  io::write_atomic(rc.out / "eigenvalues.csv", csv.str());
  const int k_max = std::min(rc.eigenfunctions, gs.N);
  for (Parity p : {Parity::Even, Parity::Odd}) {
    for (int k = 0; k < k_max; ++k) {
      const GridField g = reconstruct(gs, s, p, k, rc.nx, rc.ny);
      const std::string name = std::string("eigenfunction_") + to_string(p) + "_" + std::to_string(k + 1) + ".csv";
      io::write_atomic(rc.out / name, io::grid_csv(g, "u"));
    }
  }
  std::printf("mu_1 = %s, nu_1 = %s (%s)\n", io::fmt(gs.mu_p.front()).c_str(), io::fmt(gs.nu_p.front()).c_str(),
              w.label.c_str());
  return kOk;
}

/// x, y, field, in_S rows for the final sublevel weight (S is {field <= t}).
inline std::string sublevel_csv(const Weight& w) {
  std::ostringstream s;
  s << "x,y,u2,in_S\n";
  const GridField& g = w.density;
  for (int i = 0; i < g.nx; ++i) {
    for (int jj = 0; jj < g.ny; ++jj) {
      const double frac = (g.at(i, jj) - w.outside) / (w.inside - w.outside);
      s << io::fmt(g.x(i)) << ',' << io::fmt(g.y(jj)) << ',' << io::fmt(w.field.at(i, jj)) << ',' << io::fmt(frac)
        << '\n';
    }
  }
  return s.str();
}

inline int cmd_optimize(const RunConfig& rc) {
  const HomSpectrum s = build_spectrum(rc.plate);
  const OptimizeOptions opt = rc.options();
  OptimizationTrace trace;
  if (rc.target == "min-mu") {
    trace = minimize_mu_j(rc.j, rc.plate, s, load_weight(rc, s), opt);
  } else if (rc.target == "max-nu1") {
    trace = maximize_nu1_fixed_point(rc.plate, s, opt);
  } else {
    throw Error(ErrorCode::InvalidConfig, "--target must be min-mu or max-nu1");
  }
  io::write_atomic(rc.out / "trace.jsonl", io::trace_to_json_lines(trace));
  const Weight& last = trace.final().weight;
  io::write_atomic(rc.out / "final_weight.json", io::weight_to_json(last).dump() + "\n");
  io::json summary = {{"plate", plate_json(rc.plate)},
                      {"target", rc.target},
                      {"j", trace.j},
                      {"iterations", trace.iterates.size() - 1},
                      {"initial_eigenvalue", trace.iterates.front().eigenvalue},
                      {"final_eigenvalue", trace.final().eigenvalue},
                      {"stop_reason", to_string(trace.stop_reason)},
                      {"note", trace.note}};
  if (last.kind == WeightKind::Sublevel) {
    io::write_atomic(rc.out / "sublevel.csv", sublevel_csv(last));
    summary["threshold"] = last.threshold;
  }
  if (rc.sin4) {
    const double fraction = (rc.plate.beta - 1.0) / (rc.plate.beta - rc.plate.alpha);
    summary["sin4_threshold"] = sin4_threshold(fraction);
  }
  io::write_atomic(rc.out / "summary.json", summary.dump(2) + "\n");
  std::printf("%s j=%d: %s -> %s after %zu iterations (%s)\n", rc.target.c_str(), trace.j,
              io::fmt(trace.iterates.front().eigenvalue).c_str(), io::fmt(trace.final().eigenvalue).c_str(),
              trace.iterates.size() - 1, to_string(trace.stop_reason));
  if (trace.stop_reason == StopReason::Degenerate) return kWeight;
  return trace.converged() ? kOk : kNoConvergence;
}

/// r_h for p = 1 at ell = pi/2 over h in [200, 400] from the merged
/// homogeneous spectrum.
inline WeylReport uniform_weyl(const PlateConfig& base, std::vector<double>* merged_out = nullptr) {
  PlateConfig cfg = base;
  cfg.ell = std::numbers::pi / 2.0;
  constexpr int kHi = 400;
  std::vector<double> mu, nu;
  for (const auto& e : lowest_eigenpairs(Parity::Even, kHi, cfg)) mu.push_back(e.lambda);
  for (const auto& e : lowest_eigenpairs(Parity::Odd, kHi, cfg)) nu.push_back(e.lambda);
  std::vector<double> merged = merged_eigenvalues(mu, nu);
  merged.resize(kHi);
  WeylReport r = weyl_diagnostic(uniform_weight(cfg), merged, 200, kHi);
  if (merged_out) *merged_out = std::move(merged);
  return r;
}

inline int cmd_ratio_table(const RunConfig& rc) {
  if (rc.plate.n_modes < 12) throw Error(ErrorCode::InvalidConfig, "ratio table needs --n-modes >= 12");
  const HomSpectrum s = build_spectrum(rc.plate);
  const RatioReport rep = ratio_study(comparison_weights(rc.plate, s, rc.options()), s, rc.plate.n_modes);
  io::write_atomic(rc.out / "ratio_table.csv", io::ratio_report_csv(rep, true));
  io::json meta = {{"plate", plate_json(rc.plate)}, {"j0", rep.j0}, {"N", rep.N}, {"grid", {rc.nx, rc.ny}}};
  for (const auto& row : rep.rows) {
    std::printf("%-10s R = %s\n", row.label.c_str(), io::fmt(row.ratio).c_str());
  }
  if (rc.weyl) {
    std::vector<double> merged;
    const WeylReport w = uniform_weyl(rc.plate, &merged);
    std::ostringstream csv;
    csv << "h,lambda_h,r_h\n";
    for (int h = w.h_lo; h <= w.h_hi; ++h) {
      csv << h << ',' << io::fmt(merged[static_cast<std::size_t>(h - 1)]) << ','
          << io::fmt(w.ratios[static_cast<std::size_t>(h - w.h_lo)]) << '\n';
    }
    io::write_atomic(rc.out / "weyl.csv", csv.str());
    meta["weyl"] = {{"ell", std::numbers::pi / 2.0},
                    {"h_window", {w.h_lo, w.h_hi}},
                    {"median", w.median},
                    {"top_half_spread", w.top_half_spread}};
    std::printf("weyl: median r_h = %s, top-half spread = %s\n", io::fmt(w.median).c_str(),
                io::fmt(w.top_half_spread).c_str());
  }
  io::write_atomic(rc.out / "ratio_meta.json", meta.dump(2) + "\n");
  return kOk;
}

inline int run(int argc, char** argv) {
  RunConfig rc;
  CLI::App app{"Weighted eigenvalues of a partially hinged plate and two-phase density optimisation"};
  app.require_subcommand(1);
  std::vector<int> grid;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--ell", rc.plate.ell, "half-width of the plate");
    sub->add_option("--sigma", rc.plate.sigma, "Poisson ratio");
    sub->add_option("--alpha", rc.plate.alpha, "lower density bound");
    sub->add_option("--beta", rc.plate.beta, "upper density bound");
    sub->add_option("--n-modes", rc.plate.n_modes, "basis functions per parity (Galerkin truncation)");
    sub->add_option("--epsilon", rc.epsilon, "relative eigenvalue change that stops a descent");
    sub->add_option("--max-iters", rc.max_iters, "iteration cap for optimisation loops");
    sub->add_option("--grid", grid, "sampling grid NX NY (NY odd)")->expected(2);
    sub->add_option("--out", rc.out, "output directory");
    sub->add_option("--weight", rc.weight_file, "weight spec JSON");
    sub->add_flag("--weyl", rc.weyl, "append the Weyl diagnostic");
  };
  auto* spectrum = app.add_subcommand("spectrum", "homogeneous eigenvalue table");
  auto* eigs = app.add_subcommand("eigs", "weighted eigenvalues for a weight spec");
  auto* optimize = app.add_subcommand("optimize", "density optimisation");
  auto* ratio = app.add_subcommand("ratio-table", "eigenvalues and ratio for the comparison weights");
  for (auto* sub : {spectrum, eigs, optimize, ratio}) add_common(sub);
  eigs->add_option("--eigenfunctions", rc.eigenfunctions, "write the first K eigenfunction grids per parity");
  optimize->add_option("--target", rc.target, "min-mu or max-nu1");
  optimize->add_option("--j", rc.j, "longitudinal index for min-mu");
  optimize->add_flag("--sin4", rc.sin4, "report the closed-form sin^4 threshold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  if (grid.size() == 2) {
    rc.nx = grid[0];
    rc.ny = grid[1];
  }
  try {
    rc.validate();
    if (*spectrum) return cmd_spectrum(rc);
    if (*eigs) return cmd_eigs(rc);
    if (*optimize) return cmd_optimize(rc);
    return cmd_ratio_table(rc);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInternal;
  }
}

}  // namespace plate::cli
