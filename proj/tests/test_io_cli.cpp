#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "plate/cli.hpp"
#include "plate/io.hpp"

using namespace plate;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("plate_spectra_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "plate-spectra");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

int run_exe(const std::string& args) {
  const std::string cmd = std::string(PLATE_SPECTRA_EXE) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream(p) << s;
}

}  // namespace

TEST(Format, ScientificWithSixDigits) {
  EXPECT_EQ(io::fmt(1234.5), "1.234500e+03");
  EXPECT_EQ(io::fmt(0.96), "9.600000e-01");
  EXPECT_EQ(io::fmt(-2.0e-12), "-2.000000e-12");
}

TEST(WriteAtomic, CreatesDirectoriesAndLeavesNoTemporary) {
  const fs::path dir = scratch("atomic");
  const fs::path f = dir / "sub" / "a.csv";
  io::write_atomic(f, "one\n");
  io::write_atomic(f, "two\n");
  EXPECT_EQ(slurp(f), "two\n");
  EXPECT_FALSE(fs::exists(dir / "sub" / "a.csv.tmp"));
}

TEST(WeightJson, RoundTripsBandAndCrossWeights) {
  const PlateConfig cfg;
  for (const Weight& w : {make_pbar_j(10, cfg), make_breve_p(cfg), make_tilde_p(cfg), uniform_weight(cfg)}) {
    const io::json j = io::weight_to_json(w);
    const Weight back = io::weight_from_json(io::json::parse(j.dump()), cfg);
    EXPECT_EQ(back.kind, w.kind) << w.label;
    EXPECT_EQ(back.label, w.label);
    for (double x : {0.05, 0.3, 1.0, 2.9}) {
      for (double y : {0.0, 0.4 * cfg.ell, -0.9 * cfg.ell}) EXPECT_EQ(eval(back, x, y), eval(w, x, y)) << w.label;
    }
  }
}

TEST(WeightJson, RoundTripsSublevelDensity) {
  const PlateConfig cfg;
  const GridField f = GridField::sample(51, 11, cfg.ell, Parity::Even,
                                        [](double x, double y) { return std::sin(x) + y * y; });
  const Weight w = sublevel_weight(f, 0.5 * cfg.area(), cfg.beta, cfg.alpha, cfg);
  const Weight back = io::weight_from_json(io::json::parse(io::weight_to_json(w).dump()), cfg);
  EXPECT_EQ(back.density.values, w.density.values);
  EXPECT_TRUE(validate(back, cfg).passes);
  EXPECT_FALSE(io::weight_to_json(w, false).contains("density"));
}

TEST(WeightJson, PresetsResolve) {
  const PlateConfig cfg;
  const Weight a = io::weight_from_json(io::json::parse(R"({"kind":"preset","name":"pbar","j":4})"), cfg);
  EXPECT_EQ(a.x_intervals.size(), 4u);
  const Weight b = io::weight_from_json(io::json::parse(R"({"kind":"preset","name":"pj_sin4","j":3})"), cfg);
  EXPECT_NEAR(b.threshold, 0.25, 1e-12);
  EXPECT_THROW(io::weight_from_json(io::json::parse(R"({"kind":"preset","name":"pstar"})"), cfg), Error);
}

TEST(WeightJson, RejectsMalformedSpecs) {
  const PlateConfig cfg;
  auto code_of = [&](const char* text) -> std::optional<ErrorCode> {
    try {
      io::weight_from_json(io::json::parse(text), cfg);
    } catch (const Error& e) {
      return e.code();
    }
    return std::nullopt;
  };
  EXPECT_EQ(code_of(R"([1, 2])"), ErrorCode::InvalidWeight);
  EXPECT_EQ(code_of(R"({"kind":"spiral"})"), ErrorCode::InvalidWeight);
  EXPECT_EQ(code_of(R"({"kind":"xbands","intervals":[[1,0]],"inside":1.5,"outside":0.5})"), ErrorCode::InvalidWeight);
  EXPECT_EQ(code_of(R"({"kind":"xbands","intervals":[[0,1]],"inside":"hi","outside":0.5})"),
            ErrorCode::InvalidWeight);
  EXPECT_EQ(code_of(R"({"kind":"sublevel","density":{"nx":3,"ny":3,"values":[1,2]}})"), ErrorCode::InvalidWeight);

  const fs::path dir = scratch("malformed");
  write_text(dir / "bad.json", "{\"kind\": ");
  try {
    io::read_weight(dir / "bad.json", cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidWeight);
  }
}

TEST(TraceJson, OneObjectPerIterateAndStopReasonLast) {
  const PlateConfig cfg;
  OptimizationTrace t;
  t.j = 3;
  t.stop_reason = StopReason::Converged;
  t.iterates.push_back({uniform_weight(cfg), 80.0, 2, 0.0});
  t.iterates.push_back({make_pbar_j(3, cfg), 70.0, 2, 0.3});
  const auto ls = lines(io::trace_to_json_lines(t));
  ASSERT_EQ(ls.size(), 2u);
  const io::json first = io::json::parse(ls[0]);
  const io::json last = io::json::parse(ls[1]);
  EXPECT_EQ(first["iter"], 0);
  EXPECT_FALSE(first.contains("stop_reason"));
  EXPECT_EQ(last["stop_reason"], "converged");
  EXPECT_EQ(last["tracked_index"], 3);
  EXPECT_EQ(last["weight"]["kind"], "xbands");
}

TEST(ExitCodes, MapErrorFamilies) {
  EXPECT_EQ(cli::exit_code_for(ErrorCode::InvalidConfig), 2);
  EXPECT_EQ(cli::exit_code_for(ErrorCode::C0Violated), 2);
  EXPECT_EQ(cli::exit_code_for(ErrorCode::InvalidWeight), 3);
  EXPECT_EQ(cli::exit_code_for(ErrorCode::NotAdmissible), 3);
  EXPECT_EQ(cli::exit_code_for(ErrorCode::DegenerateField), 3);
  EXPECT_EQ(cli::exit_code_for(ErrorCode::NoConvergence), 4);
  EXPECT_EQ(cli::exit_code_for(ErrorCode::MaxItersExceeded), 4);
  EXPECT_EQ(cli::exit_code_for(ErrorCode::SingularMass), 1);
}

TEST(Cli, SpectrumWritesTable) {
  const fs::path dir = scratch("spectrum");
  ASSERT_EQ(run_cli({"spectrum", "--out", dir.string()}), 0);
  const auto ls = lines(slurp(dir / "table1.csv"));
  ASSERT_EQ(ls.size(), 13u);
  EXPECT_EQ(ls[0], "m,mu_m,nu_m");
  EXPECT_EQ(ls[1].substr(0, 7), "1,9.600");
  const io::json meta = io::json::parse(slurp(dir / "spectrum_meta.json"));
  EXPECT_EQ(meta["j0"], 10);
  EXPECT_EQ(meta["torsional_first_absent_up_to_m"], 2734);
}

TEST(Cli, ConfigErrorsExitTwo) {
  const fs::path dir = scratch("config");
  EXPECT_EQ(run_cli({"spectrum", "--sigma", "0.7", "--out", dir.string()}), 2);
  EXPECT_EQ(run_cli({"spectrum", "--alpha", "1.5", "--beta", "0.5", "--out", dir.string()}), 2);
  EXPECT_EQ(run_cli({"eigs", "--grid", "10", "10", "--out", dir.string()}), 2);
  EXPECT_EQ(run_cli({"spectrum", "--no-such-flag"}), 2);
  EXPECT_EQ(run_cli({"optimize", "--target", "sideways", "--out", dir.string()}), 2);
}

TEST(Cli, WeightErrorsExitThree) {
  const fs::path dir = scratch("weight");
  write_text(dir / "bad.json", "{not json");
  EXPECT_EQ(run_cli({"eigs", "--weight", (dir / "bad.json").string(), "--out", dir.string()}), 3);
  write_text(dir / "heavy.json", R"({"kind":"xbands","intervals":[[0,1]],"inside":1.5,"outside":0.5})");
  EXPECT_EQ(run_cli({"eigs", "--weight", (dir / "heavy.json").string(), "--out", dir.string()}), 3);
  EXPECT_EQ(run_cli({"eigs", "--weight", (dir / "missing.json").string(), "--out", dir.string()}), 3);
}

TEST(Cli, EigsWithPresetWeight) {
  const fs::path dir = scratch("eigs");
  write_text(dir / "breve.json", R"({"kind":"preset","name":"breve"})");
  ASSERT_EQ(run_cli({"eigs", "--weight", (dir / "breve.json").string(), "--out", dir.string(), "--eigenfunctions",
                     "1", "--grid", "31", "11"}),
            0);
  const auto ls = lines(slurp(dir / "eigenvalues.csv"));
  ASSERT_EQ(ls.size(), 61u);
  EXPECT_EQ(ls[31].substr(0, 6), "1,odd,");
  EXPECT_NEAR(std::stod(ls[31].substr(6)) / 1.75e4, 1.0, 0.01);
  EXPECT_EQ(lines(slurp(dir / "eigenfunction_even_1.csv")).size(), 1u + 31u * 11u);
}

TEST(Cli, OptimizeWritesTraceAndReportsNonConvergence) {
  const fs::path dir = scratch("optimize");
  ASSERT_EQ(run_cli({"optimize", "--j", "1", "--sin4", "--out", dir.string()}), 0);
  const io::json summary = io::json::parse(slurp(dir / "summary.json"));
  EXPECT_EQ(summary["stop_reason"], "converged");
  EXPECT_NEAR(summary["sin4_threshold"].get<double>(), 0.25, 1e-12);
  EXPECT_LT(summary["final_eigenvalue"].get<double>(), summary["initial_eigenvalue"].get<double>());
  EXPECT_EQ(lines(slurp(dir / "trace.jsonl")).size(), summary["iterations"].get<std::size_t>() + 1);
  EXPECT_EQ(lines(slurp(dir / "sublevel.csv")).size(), 1u + 601u * 31u);
  const Weight w = io::read_weight(dir / "final_weight.json", PlateConfig{});
  EXPECT_TRUE(validate(w, PlateConfig{}).passes);

  EXPECT_EQ(run_cli({"optimize", "--j", "10", "--max-iters", "1", "--epsilon", "1e-12", "--out", dir.string()}), 4);
}

TEST(Cli, ExecutableExitCodes) {
  const fs::path dir = scratch("exe");
  EXPECT_EQ(run_exe("spectrum --out " + dir.string()), 0);
  EXPECT_TRUE(fs::exists(dir / "table1.csv"));
  EXPECT_EQ(run_exe("spectrum --ell -1"), 2);
  EXPECT_EQ(run_exe(""), 2);
}
