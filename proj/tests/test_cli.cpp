#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sl2c_cli.hpp"

using namespace sl2c;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("sl2c_cli_test_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

fs::path write_config(const std::string& name, const std::string& text) {
  const auto p = scratch(name);
  std::ofstream(p) << text;
  return p;
}

bool single_error_line(const std::string& err) {
  return err.rfind("error: ", 0) == 0 && err.find('\n') == err.size() - 1;
}

}  // namespace

TEST(Config, MinimalGetsDefaults) {
  const auto c = cli::parse_config_text(R"({"system": "euclidean", "realization": {"kind": "classical", "N": 2, "b": [0, 0]}})");
  ASSERT_TRUE(c.system.has_value());
  EXPECT_EQ(c.system->name, "euclidean");
  EXPECT_EQ(c.verify.tol, 1e-9);
  EXPECT_EQ(c.verify.samples, 100u);
  EXPECT_EQ(c.verify.seed, 42u);
  EXPECT_EQ(c.simulate.integrator, "midpoint");
  EXPECT_EQ(c.simulate.dt, 1e-3);
  EXPECT_EQ(c.simulate.steps, 10000u);
  const auto spec = cli::resolve_system(c);
  EXPECT_EQ(spec.realization.n, 2u);
}

TEST(Config, BLengthMismatchNamesB) {
  try {
    cli::parse_config_text(R"({"system": "euclidean", "realization": {"kind": "classical", "N": 2, "b": [0]}})");
    FAIL();
  } catch (const cli::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("'b'"), std::string::npos) << e.what();
  }
}

TEST(Config, UnknownSystemListsCatalog) {
  try {
    cli::parse_config_text(R"({"system": "nope"})");
    FAIL();
  } catch (const cli::ConfigError& e) {
    const std::string m = e.what();
    EXPECT_NE(m.find("darboux3"), std::string::npos) << m;
    EXPECT_NE(m.find("z_type_I"), std::string::npos) << m;
  }
}

TEST(Config, UnknownKeysAreRejectedWithPath) {
  try {
    cli::parse_config_text(R"({"system": "euclidean", "simulate": {"dtt": 0.1}})");
    FAIL();
  } catch (const cli::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("dtt"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("simulate"), std::string::npos) << e.what();
  }
  EXPECT_THROW(cli::parse_config_text(R"({"colour": 1})"), cli::ConfigError);
}

TEST(Config, SchemaAndParseErrors) {
  EXPECT_NO_THROW(cli::parse_config_text(R"({"schema": 1})"));
  EXPECT_THROW(cli::parse_config_text(R"({"schema": 2})"), cli::ConfigError);
  try {
    cli::parse_config_text("{\"system\": \"euclidean\",\n \"verify\": {\"samples\": }}");
    FAIL();
  } catch (const cli::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("byte"), std::string::npos) << e.what();
  }
  EXPECT_THROW(cli::parse_config_text(R"({"verify": {"samples": -3}})"), cli::ConfigError);
  EXPECT_THROW(cli::parse_config_text(R"({"realization": {"kind": "quantum"}})"), cli::ConfigError);
  EXPECT_THROW(cli::load_config("/nonexistent/sl2c.json"), cli::ConfigError);
}

TEST(Config, ExpressionSystem) {
  const auto c = cli::parse_config_text(
      R"({"system": {"expression": "Jp/2 + w*Jm", "params": {"w": 0.5}}, "realization": {"N": 3}})");
  const auto spec = cli::resolve_system(c);
  EXPECT_EQ(spec.realization.n, 3u);
  EXPECT_EQ(evaluate(spec.hamiltonian, PhaseState({1, 1, 1}, {0, 0, 2})), 3.5);
}

TEST(Run, Catalog) {
  const auto r = invoke({"catalog"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("darboux3 [classical] params: alpha"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("z_type_I [deformed]"), std::string::npos);
}

TEST(Run, VerifyAlgebraDeformedPasses) {
  const auto r = invoke({"verify-algebra", "--kind", "deformed", "--n", "3", "--z", "0.5"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("PASS"), std::string::npos) << r.out;
}

TEST(Run, VerifyFailureExitsOne) {
  const auto r = invoke({"verify-integrals", "--expression", "Jp/2 + q1", "--n", "3", "--samples", "10"});
  EXPECT_EQ(r.code, 1) << r.out << r.err;
  EXPECT_NE(r.out.find("FAIL"), std::string::npos) << r.out;
}

TEST(Run, VerifyIntegralsRightOrder) {
  EXPECT_EQ(invoke({"verify-integrals", "--system", "z_type_I", "--n", "4", "--z", "0.7"}).code, 0);
  EXPECT_EQ(invoke({"verify-integrals", "--system", "z_type_I", "--n", "4", "--z", "0.7", "--right-order",
                 "descending"})
                .code,
            1);
}

TEST(Run, CurvatureZms) {
  const auto r = invoke({"curvature", "--system", "z_ms", "--sign", "+", "--z", "0.3", "--at", "0.7,0.4"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("K_closed=0.3 "), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("K_brioschi=0.3"), std::string::npos) << r.out;
}

TEST(Run, CurvatureCsv) {
  const auto csv = scratch("k.csv");
  const auto r = invoke({"curvature", "--system", "darboux3", "--param", "alpha=1", "--grid", "0.2,1,3", "--csv",
                      csv.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto text = slurp(csv);
  EXPECT_EQ(text.rfind("q1,q2,K_closed,K_brioschi\n", 0), 0u) << text;
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 10);
}

TEST(Run, TransformRoundTrip) {
  const auto a = invoke({"transform", "--q", "0.6,0.8", "--z", "0.5"});
  ASSERT_EQ(a.code, 0) << a.err;
  const auto x = to_polar(0.6, 0.8, 0.5, 1.0);
  const auto b = invoke({"transform", "--polar", cli::detail::fmt(x[0]) + "," + cli::detail::fmt(x[1]), "--z", "0.5"});
  ASSERT_EQ(b.code, 0) << b.err;
  double q1 = 0.0, q2 = 0.0;
  ASSERT_EQ(std::sscanf(b.out.c_str(), "q1=%lf q2=%lf", &q1, &q2), 2) << b.out;
  EXPECT_NEAR(q1, 0.6, 1e-12);
  EXPECT_NEAR(q2, 0.8, 1e-12);
  const auto bad = invoke({"transform", "--q", "0,0", "--z", "0.5"});
  EXPECT_EQ(bad.code, 2);
  EXPECT_TRUE(single_error_line(bad.err)) << bad.err;
}

TEST(Run, ScanCurvature) {
  const auto e = invoke({"scan-curvature", "--f", "exp(x)", "--z", "0.5"});
  EXPECT_EQ(e.code, 0);
  EXPECT_NE(e.out.find(": constant"), std::string::npos) << e.out;
  const auto c = invoke({"scan-curvature", "--f", "cosh(x)", "--z", "0.5"});
  EXPECT_NE(c.out.find("not constant"), std::string::npos) << c.out;
  const auto p = invoke({"scan-curvature", "--f", "exp(a*x)", "--param", "a=-1", "--z", "0.5"});
  EXPECT_NE(p.out.find(": constant"), std::string::npos) << p.out << p.err;
}

TEST(Run, SimulateWritesArtifacts) {
  const auto traj = scratch("traj.csv"), drift = scratch("drift.json");
  const auto cfg = write_config("sim.json", R"({
    "schema": 1,
    "system": {"name": "z_ms", "params": {"sign": 1}},
    "realization": {"kind": "deformed", "N": 2, "z": 0.4, "b": [0, 0]},
    "simulate": {"q0": [0.5, 0.2], "p0": [0.08, -0.04], "dt": 1e-3, "steps": 200,
                 "trajectory_csv": ")" + traj.string() + R"(", "drift_json": ")" + drift.string() + R"("}
  })");
  const auto r = invoke({"simulate", "--config", cfg.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = slurp(traj);
  EXPECT_EQ(csv.rfind("t,q1,q2,p1,p2,H,C_z^(2),I_z\n", 0), 0u) << csv.substr(0, 80);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 202);
  const auto j = nlohmann::json::parse(slurp(drift));
  EXPECT_EQ(j["integrator"], "midpoint");
  EXPECT_EQ(j["steps"], 200);
  EXPECT_TRUE(j["monitors"].contains("I_z"));
  EXPECT_TRUE(j["monitors"]["H"].contains("rel_drift"));
}

TEST(Run, FlagsOverrideConfig) {
  const auto drift = scratch("drift2.json");
  const auto cfg = write_config("sim2.json", R"({"system": "euclidean", "simulate": {"q0": [1, 1], "p0": [1, 0], "steps": 10}})");
  const auto r = invoke({"simulate", "--config", cfg.string(), "--steps", "4", "--integrator", "rk4", "--drift",
                      drift.string(), "--monitor", "C^(2)"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(drift));
  EXPECT_EQ(j["steps"], 4);
  EXPECT_EQ(j["integrator"], "rk4");
  EXPECT_EQ(j["monitors"].size(), 2u);
  const auto bad = invoke({"simulate", "--config", cfg.string(), "--monitor", "nope"});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("C^(2)"), std::string::npos) << bad.err;
}

TEST(Run, ReportsAreByteIdentical) {
  const auto a = scratch("va_a.json"), b = scratch("va_b.json");
  for (const auto& p : {a, b})
    ASSERT_EQ(invoke({"verify-algebra", "--kind", "deformed", "--n", "3", "--z", "-0.4", "--b", "0.5,1,0", "--seed",
                   "7", "--json", p.string()})
                  .code,
              0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_FALSE(slurp(a).empty());
}

TEST(Run, ErrorsAreSingleLineWithExitTwo) {
  const std::vector<std::vector<std::string>> cases{
      {},
      {"frobnicate"},
      {"verify-algebra", "--n", "zero"},
      {"verify-algebra", "--kind", "deformed", "--n", "2", "--b", "1"},
      {"curvature", "--system", "nope"},
      {"curvature", "--system", "darboux3"},
      {"curvature", "--system", "f_family", "--expr", "f=1+"},
      {"simulate", "--system", "euclidean"},
      {"simulate", "--config", "/nonexistent/x.json"},
      {"scan-curvature"},
  };
  for (const auto& args : cases) {
    const auto r = invoke(args);
    EXPECT_EQ(r.code, 2) << (args.empty() ? "" : args[0]) << " " << r.err;
    EXPECT_TRUE(single_error_line(r.err)) << r.err;
  }
}

TEST(Binary, ExitCodesAndStderr) {
  const std::string exe = SL2C_CLI_PATH;
  const auto log = scratch("stderr.txt");
  const auto status = [&](const std::string& args) {
    const int s = std::system((exe + " " + args + " >/dev/null 2>" + log.string()).c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(status("verify-algebra --kind deformed --n 3 --z 0.5"), 0);
  EXPECT_EQ(status("verify-integrals --expression 'Jp/2 + q1' --n 3 --samples 5"), 1);
  EXPECT_EQ(status("curvature --system nope"), 2);
  EXPECT_TRUE(single_error_line(slurp(log))) << slurp(log);
}
