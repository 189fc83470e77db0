#pragma once

// Serialisation: weight specs (JSON), optimisation traces (JSON lines),
// tables (CSV, %.6e), and atomic file output.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "plate/errors.hpp"
#include "plate/optimize.hpp"
#include "plate/weights.hpp"

namespace plate::io {

using json = nlohmann::json;

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

/// Writes to `path` through a sibling temporary and a rename, so readers never
/// see a partial file.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::InvalidConfig, "cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::InvalidConfig, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

// --- weights --------------------------------------------------------------------

namespace detail {

inline json intervals_to_json(const std::vector<Interval>& ivs) {
  json a = json::array();
  for (const auto& iv : ivs) a.push_back({iv.lo, iv.hi});
  return a;
}

inline std::vector<Interval> intervals_from_json(const json& a, const char* key) {
  if (!a.is_array()) throw Error(ErrorCode::InvalidWeight, std::string("'") + key + "' must be an array of [lo, hi]");
  std::vector<Interval> out;
  for (const auto& e : a) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
      throw Error(ErrorCode::InvalidWeight, std::string("'") + key + "' entries must be [lo, hi] number pairs");
    }
    const double lo = e[0].get<double>();
    const double hi = e[1].get<double>();
    if (!(lo < hi)) throw Error(ErrorCode::InvalidWeight, std::string("'") + key + "' has an empty interval");
    out.push_back({lo, hi});
  }
  return out;
}

inline const json& require(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::InvalidWeight, std::string("missing key '") + key + "'");
  return j.at(key);
}

inline double number(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_number()) throw Error(ErrorCode::InvalidWeight, std::string("'") + key + "' must be a number");
  return v.get<double>();
}

inline json grid_to_json(const GridField& g) {
  return {{"nx", g.nx}, {"ny", g.ny}, {"values", g.values}};
}

inline GridField grid_from_json(const json& j, double ell) {
  const int nx = static_cast<int>(number(j, "nx"));
  const int ny = static_cast<int>(number(j, "ny"));
  GridField g(nx, ny, ell, Parity::Even);
  const json& v = require(j, "values");
  if (!v.is_array() || v.size() != g.values.size()) {
    throw Error(ErrorCode::InvalidWeight, "grid 'values' must hold nx * ny numbers");
  }
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    if (!v[i].is_number()) throw Error(ErrorCode::InvalidWeight, "grid 'values' must be numbers");
    g.values[i] = v[i].get<double>();
  }
  return g;
}

inline const char* kind_name(WeightKind k) {
  switch (k) {
    case WeightKind::Uniform: return "uniform";
    case WeightKind::XBands: return "xbands";
    case WeightKind::YBands: return "ybands";
    case WeightKind::Cross: return "cross";
    case WeightKind::Sublevel: return "sublevel";
  }
  return "uniform";
}

}  // namespace detail

/// Full weight spec. Sublevel weights carry their density grid; with
/// `with_grid` false only a summary (threshold, grid size) is written.
inline json weight_to_json(const Weight& w, bool with_grid = true) {
  json j = {{"kind", detail::kind_name(w.kind)}, {"label", w.label}};
  switch (w.kind) {
    case WeightKind::Uniform: break;
    case WeightKind::XBands:
      j["intervals"] = detail::intervals_to_json(w.x_intervals);
      j["inside"] = w.inside;
      j["outside"] = w.outside;
      break;
    case WeightKind::YBands:
      j["intervals"] = detail::intervals_to_json(w.y_intervals);
      j["inside"] = w.inside;
      j["outside"] = w.outside;
      break;
    case WeightKind::Cross:
      j["x_intervals"] = detail::intervals_to_json(w.x_intervals);
      j["y_intervals"] = detail::intervals_to_json(w.y_intervals);
      j["inside"] = w.inside;
      j["outside"] = w.outside;
      j["combine"] = w.combine == CombineRule::Max ? "max" : "min";
      break;
    case WeightKind::Sublevel:
      j["threshold"] = w.threshold;
      j["inside"] = w.inside;
      j["outside"] = w.outside;
      j["degenerate"] = w.degenerate;
      if (with_grid) {
        j["density"] = detail::grid_to_json(w.density);
      } else {
        j["grid"] = {w.density.nx, w.density.ny};
      }
      break;
  }
  return j;
}

/// Resolves weights that need the homogeneous spectrum (the "pstar" preset).
using SpectrumWeightFactory = std::function<Weight(const std::string& name)>;

/// Parses a weight spec. Presets: {"kind": "preset", "name": "pbar", "j": 10},
/// "pj_sin4" (with j), "breve", "doublebar", "tilde", "pstar" (via `factory`).
inline Weight weight_from_json(const json& j, const PlateConfig& cfg, const SpectrumWeightFactory& factory = {}) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidWeight, "weight spec must be a JSON object");
  const json& kind_v = detail::require(j, "kind");
  if (!kind_v.is_string()) throw Error(ErrorCode::InvalidWeight, "'kind' must be a string");
  const std::string kind = kind_v.get<std::string>();
  const std::string label = j.value("label", kind);
  if (kind == "uniform") {
    Weight w = uniform_weight(cfg);
    w.label = label;
    return w;
  }
  if (kind == "xbands" || kind == "ybands") {
    auto ivs = detail::intervals_from_json(detail::require(j, "intervals"), "intervals");
    const double in = detail::number(j, "inside");
    const double out = detail::number(j, "outside");
    return kind == "xbands" ? x_bands(std::move(ivs), in, out, cfg, label) : y_bands(std::move(ivs), in, out, cfg, label);
  }
  if (kind == "cross") {
    Weight w = uniform_weight(cfg);
    w.kind = WeightKind::Cross;
    w.x_intervals = detail::intervals_from_json(detail::require(j, "x_intervals"), "x_intervals");
    w.y_intervals = detail::intervals_from_json(detail::require(j, "y_intervals"), "y_intervals");
    w.inside = detail::number(j, "inside");
    w.outside = detail::number(j, "outside");
    const std::string combine = j.value("combine", "max");
    if (combine != "max" && combine != "min") throw Error(ErrorCode::InvalidWeight, "'combine' must be max or min");
    w.combine = combine == "max" ? CombineRule::Max : CombineRule::Min;
    w.label = label;
    return w;
  }
  if (kind == "sublevel") {
    Weight w = uniform_weight(cfg);
    w.kind = WeightKind::Sublevel;
    w.density = detail::grid_from_json(detail::require(j, "density"), cfg.ell);
    w.threshold = j.value("threshold", 0.0);
    w.inside = j.value("inside", cfg.beta);
    w.outside = j.value("outside", cfg.alpha);
    w.degenerate = j.value("degenerate", false);
    w.label = label;
    return w;
  }
  if (kind == "preset") {
    const json& name_v = detail::require(j, "name");
    if (!name_v.is_string()) throw Error(ErrorCode::InvalidWeight, "'name' must be a string");
    const std::string name = name_v.get<std::string>();
    Weight w;
    if (name == "pbar" || name == "pj_sin4") {
      const int jj = static_cast<int>(detail::number(j, "j"));
      w = name == "pbar" ? make_pbar_j(jj, cfg) : make_pj_sin4(jj, cfg);
    } else if (name == "breve") {
      w = make_breve_p(cfg);
    } else if (name == "doublebar") {
      w = make_doublebar_p(cfg);
    } else if (name == "tilde") {
      w = make_tilde_p(cfg);
    } else if (name == "pstar" && factory) {
      w = factory(name);
    } else {
      throw Error(ErrorCode::InvalidWeight, "unknown preset '" + name + "'");
    }
    if (j.contains("label")) w.label = label;
    return w;
  }
  throw Error(ErrorCode::InvalidWeight, "unknown weight kind '" + kind + "'");
}

inline Weight read_weight(const std::filesystem::path& path, const PlateConfig& cfg,
                          const SpectrumWeightFactory& factory = {}) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidWeight, "cannot read weight file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidWeight, std::string("malformed weight JSON: ") + e.what());
  }
  return weight_from_json(j, cfg, factory);
}

// --- traces and tables ------------------------------------------------------------

inline std::string trace_to_json_lines(const OptimizationTrace& t) {
  std::string out;
  const char* target = t.target == OptimizationTrace::Target::MinMu ? "min_mu" : "max_nu1";
  for (std::size_t i = 0; i < t.iterates.size(); ++i) {
    const Iterate& it = t.iterates[i];
    json line = {{"iter", i},
                 {"target", target},
                 {"j", t.j},
                 {"eigenvalue", it.eigenvalue},
                 {"tracked_index", it.tracked_index + 1},
                 {"phase_change", it.phase_change},
                 {"weight", weight_to_json(it.weight, false)}};
    if (i + 1 == t.iterates.size()) {
      line["stop_reason"] = to_string(t.stop_reason);
      if (!t.note.empty()) line["note"] = t.note;
    }
    out += line.dump();
    out += '\n';
  }
  return out;
}

/// One column per weight, rows mu_1..mu_12, nu_1, nu_2, R (the published
/// table layout). With `deviation`, a second block of rows holds the relative
/// deviation from the published values where a reference row exists.
inline std::string ratio_report_csv(const RatioReport& rep, bool deviation) {
  std::ostringstream s;
  s << "quantity";
  for (const auto& r : rep.rows) s << ',' << r.label;
  s << '\n';
  auto emit = [&](const std::string& name, auto&& get, auto&& ref_get) {
    s << name;
    for (const auto& r : rep.rows) s << ',' << fmt(get(r));
    s << '\n';
    if (!deviation) return;
    s << name << "_rel_dev";
    for (const auto& r : rep.rows) {
      s << ',';
      for (const auto& ref : published_ratio_table()) {
        if (ref.label == r.label) {
          s << fmt(std::abs(get(r) - ref_get(ref)) / ref_get(ref));
          break;
        }
      }
    }
    s << '\n';
  };
  for (int i = 0; i < kRatioMu; ++i) {
    emit("mu_" + std::to_string(i + 1), [i](const RatioRow& r) { return r.mu[i]; },
         [i](const RatioRow& r) { return r.mu[i]; });
  }
  for (int i = 0; i < kRatioNu; ++i) {
    emit("nu_" + std::to_string(i + 1), [i](const RatioRow& r) { return r.nu[i]; },
         [i](const RatioRow& r) { return r.nu[i]; });
  }
  emit("R", [](const RatioRow& r) { return r.ratio; }, [](const RatioRow& r) { return r.ratio; });
  return s.str();
}

/// x, y, value rows for a grid field.
inline std::string grid_csv(const GridField& g, const char* value_name = "value") {
  std::ostringstream s;
  s << "x,y," << value_name << '\n';
  for (int i = 0; i < g.nx; ++i) {
    for (int j = 0; j < g.ny; ++j) s << fmt(g.x(i)) << ',' << fmt(g.y(j)) << ',' << fmt(g.at(i, j)) << '\n';
  }
  return s.str();
}

}  // namespace plate::io
