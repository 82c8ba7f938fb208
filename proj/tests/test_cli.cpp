#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include <gtest/gtest.h>

#include "cli/run.hpp"

namespace {

using namespace ricciflux;
using namespace ricciflux::cli;
using std::numbers::pi;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "ricciflux");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string temp_file(const std::string& name, const std::string& content) {
  const std::string path = ::testing::TempDir() + "ricciflux_" + std::to_string(::getpid()) + "_" + name;
  std::ofstream(path) << content;
  return path;
}

struct Csv {
  std::vector<std::string> meta;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  double at(std::size_t row, const std::string& col) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == col) return rows.at(row).at(i);
    ADD_FAILURE() << "no column " << col;
    return 0.0;
  }
};

Csv parse_csv(const std::string& text) {
  Csv c;
  std::istringstream in(text);
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> v;
    std::stringstream ss(s);
    std::string x;
    while (std::getline(ss, x, ',')) v.push_back(x);
    return v;
  };
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) {
      c.meta.push_back(line.substr(2));
    } else if (c.header.empty()) {
      c.header = split(line);
    } else {
      std::vector<double> row;
      for (const auto& f : split(line)) row.push_back(std::strtod(f.c_str(), nullptr));
      c.rows.push_back(row);
    }
  }
  return c;
}

bool has_meta(const Csv& c, const std::string& s) {
  for (const auto& m : c.meta)
    if (m == s) return true;
  return false;
}

TEST(ParseConfig, DefaultsAreThinTubeAndFlatFlow) {
  const auto path = temp_file("empty.cfg", "");
  const RunConfig c = parse_config("tube", path, {});
  EXPECT_EQ(c.mode, TubeMode::thin);
  EXPECT_EQ(c.kappa0, 1.0);
  EXPECT_EQ(c.r0, 0.1);
  EXPECT_EQ(c.r, 0.1);
  EXPECT_EQ(c.vr, 0.0);
  EXPECT_EQ(c.vs, 0.0);
  EXPECT_EQ(c.vtheta, 0.0);
  EXPECT_EQ(c.omega1, 0.0);
  EXPECT_EQ(c.format, Format::csv);
}

TEST(ParseConfig, FlagsOverrideFileOverrideDefaults) {
  const auto path = temp_file("prec.cfg", "# comment\ntheta = 0.1\nr0 = 0.2   # trailing\nmode = thick\n");
  const RunConfig c = parse_config("tube", path, {{"theta", "0.785398"}});
  EXPECT_EQ(c.theta, 0.785398);
  EXPECT_EQ(c.r0, 0.2);
  EXPECT_EQ(c.r, 0.2);
  EXPECT_EQ(c.mode, TubeMode::thick);
  EXPECT_EQ(c.kappa0, 1.0);
}

TEST(ParseConfig, UnknownKeyIsNamed) {
  const auto path = temp_file("unknown.cfg", "r0 = 0.1\nbogus_key = 3\n");
  try {
    parse_config("tube", path, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::validation);
    EXPECT_NE(std::string(e.what()).find("bogus_key"), std::string::npos);
  }
}

TEST(ParseConfig, TypeMismatchReportsLineAndFlag) {
  const auto path = temp_file("type.cfg", "r0 = 0.1\n\ntheta = abc\n");
  try {
    parse_config("tube", path, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos) << e.what();
  }
  try {
    parse_config("tube", std::nullopt, {{"vr", "fast"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("--vr"), std::string::npos) << e.what();
  }
}

TEST(ParseConfig, TablesSweepsAndTolerances) {
  const auto path = temp_file("tables.cfg",
                              "kappa_table = 0:1, 1:2, 2:3\ntau_table = 0:0.5, 4:0.5\n"
                              "sweep = theta=0:1:3\ntol.fd_step = 1e-5\n");
  const RunConfig c = parse_config("tube", path, {{"sweep", "s=0:2:5"}});
  ASSERT_TRUE(c.kappa_table.has_value());
  EXPECT_EQ(c.kappa_table->size(), 3u);
  EXPECT_NEAR(c.tube().kappa(1.5), 2.5, 1e-12);
  EXPECT_NEAR(c.tube().tau(3.0), 0.5, 1e-12);
  ASSERT_EQ(c.sweeps.size(), 2u);
  EXPECT_EQ(c.sweeps[0].var, "theta");
  EXPECT_EQ(c.sweeps[1].count, 5);
  EXPECT_EQ(c.tol.fd_step, 1e-5);
  EXPECT_THROW(parse_config("tube", std::nullopt, {{"kappa_table", "0:1"}}), Error);
  EXPECT_THROW(parse_config("tube", std::nullopt, {{"sweep", "theta=0:1"}}), Error);
  EXPECT_THROW(parse_config("tube", std::nullopt, {{"mode", "medium"}}), Error);
  EXPECT_THROW(parse_config("tube", std::nullopt, {{"format", "xml"}}), Error);
}

TEST(ParseConfig, MissingFileIsValidationError) {
  EXPECT_THROW(parse_config("tube", std::string("/nonexistent/x.cfg"), {}), Error);
}

TEST(Sweep, InclusiveLinspace) {
  const auto v = linspace({"theta", 0.0, 1.0, 5});
  ASSERT_EQ(v.size(), 5u);
  EXPECT_EQ(v.front(), 0.0);
  EXPECT_EQ(v.back(), 1.0);
  EXPECT_EQ(v[2], 0.5);
  EXPECT_EQ(linspace({"theta", 0.3, 9.0, 1}), std::vector<double>{0.3});
}

TEST(ClampTheta, MovesOffTangentSingularity) {
  bool clamped = false;
  EXPECT_EQ(clamp_theta(pi / 2, &clamped), pi / 2 - 1e-6);
  EXPECT_TRUE(clamped);
  EXPECT_EQ(clamp_theta(0.3), 0.3);
  EXPECT_NEAR(clamp_theta(3 * pi / 2 + 1e-9), 3 * pi / 2 + 1e-6, 1e-15);
}

TEST(Run, TubeGaussColumnAtThetaZero) {
  const auto o = run({"tube", "--kappa0", "1", "--r0", "0.1", "--sweep", "theta=0:3.141592653589793:5"});
  ASSERT_EQ(o.code, 0) << o.err;
  const Csv c = parse_csv(o.out);
  ASSERT_EQ(c.rows.size(), 5u);
  EXPECT_EQ(c.at(0, "theta"), 0.0);
  EXPECT_NEAR(c.at(0, "K_G"), -10.0, 1e-12);
  EXPECT_NEAR(c.at(4, "K_G"), 10.0, 1e-12);
  EXPECT_EQ(c.at(0, "negative_gauss"), 1.0);
  EXPECT_TRUE(has_meta(c, "flag: published_r1212_lacks_factor_r0"));
  EXPECT_TRUE(has_meta(c, "kappa0 = 1"));
}

TEST(Run, TubeNumericColumnsAgreeWithClosedForm) {
  const auto o = run({"tube", "--mode", "thick", "--kappa0", "2", "--r0", "0.1", "--sweep", "theta=0.1:6:4",
                      "--sweep", "s=0:1:2"});
  ASSERT_EQ(o.code, 0) << o.err;
  const Csv c = parse_csv(o.out);
  ASSERT_EQ(c.rows.size(), 8u);
  for (std::size_t i = 0; i < c.rows.size(); ++i) {
    EXPECT_NEAR(c.at(i, "R1212_numeric"), c.at(i, "R1212_closed_form"), 1e-6 * std::abs(c.at(i, "R1212_closed_form")));
    EXPECT_NEAR(c.at(i, "K_G_numeric"), c.at(i, "K_G_det"), 1e-6 * std::abs(c.at(i, "K_G_det")));
  }
  // first sweep outermost
  EXPECT_EQ(c.at(0, "theta_R"), 0.1);
  EXPECT_EQ(c.at(1, "theta_R"), 0.1);
  EXPECT_EQ(c.at(1, "s"), 1.0);
}

TEST(Run, ClSpectrumIdealRow) {
  const auto o = run({"cl-spectrum", "--eps", "0", "--kappa", "4"});
  ASSERT_EQ(o.code, 0) << o.err;
  const Csv c = parse_csv(o.out);
  ASSERT_EQ(c.rows.size(), 1u);
  ASSERT_GE(c.header.size(), 4u);
  EXPECT_EQ(c.header[0], "eps");
  EXPECT_EQ(c.header[3], "im");
  EXPECT_EQ(c.rows[0][0], 0.0);
  EXPECT_EQ(c.rows[0][1], 4.0);
  EXPECT_EQ(c.rows[0][2], 0.0);
  EXPECT_EQ(c.rows[0][3], 2.0);
}

TEST(Run, ClSpectrumFromReynoldsIsFlagged) {
  const auto o = run({"cl-spectrum", "--rem", "4", "--kappa", "-4", "--eps-from-rem"});
  ASSERT_EQ(o.code, 0) << o.err;
  const Csv c = parse_csv(o.out);
  EXPECT_EQ(c.at(0, "eps"), 0.25);
  EXPECT_EQ(c.at(0, "fast_dynamo"), 1.0);
  EXPECT_TRUE(has_meta(c, "flag: eps_taken_as_inverse_magnetic_reynolds_number"));
}

TEST(Run, LyapunovAndDynamoExample) {
  const auto l = run({"lyapunov", "--vr=-0.1", "--r", "1", "--omega1", "1", "--theta", "0.7853981633974483"});
  ASSERT_EQ(l.code, 0) << l.err;
  const Csv lc = parse_csv(l.out);
  EXPECT_EQ(lc.at(0, "lambda1"), 0.0);
  EXPECT_NEAR(lc.at(0, "lambda2"), -0.2, 1e-15);
  EXPECT_NEAR(lc.at(0, "lambda3"), 0.9, 1e-15);
  EXPECT_NEAR(lc.at(0, "ftle3"), 0.9, 1e-12);
  EXPECT_NEAR(lc.at(0, "gamma3"), -0.9, 1e-15);
  EXPECT_EQ(lc.at(0, "positive_count"), 1.0);

  const auto d = run({"dynamo", "--vr=-0.1", "--r", "1", "--omega1", "1", "--theta", "0.7853981633974483"});
  ASSERT_EQ(d.code, 0) << d.err;
  const Csv dc = parse_csv(d.out);
  EXPECT_EQ(dc.at(0, "satisfied"), 1.0);
  EXPECT_NEAR(dc.at(0, "margin"), 0.9, 1e-15);
  EXPECT_NEAR(dc.at(0, "margin_spectrum"), 0.8, 1e-15);
}

TEST(Run, ThetaGridIsClampedAtSingularity) {
  const auto o = run({"dynamo", "--vr=-0.1", "--omega1", "1", "--r", "1", "--sweep", "theta=0:1.5707963267948966:3"});
  ASSERT_EQ(o.code, 0) << o.err;
  const Csv c = parse_csv(o.out);
  EXPECT_EQ(c.at(2, "theta"), pi / 2 - 1e-6);
  EXPECT_TRUE(std::isfinite(c.at(2, "rate_s")));
  EXPECT_TRUE(has_meta(c, "flag: theta_clamped_near_tangent_singularity"));
}

TEST(Run, CurvatureOfSphere) {
  const auto o = run({"curvature", "--metric", "sphere", "--theta", "1.0"});
  ASSERT_EQ(o.code, 0) << o.err;
  const Csv c = parse_csv(o.out);
  EXPECT_NEAR(c.at(0, "sectional_12"), 1.0, 1e-6);
  EXPECT_NEAR(c.at(0, "scalar"), 2.0, 1e-6);
  EXPECT_TRUE(std::isnan(c.at(0, "x3")));
}

TEST(Run, RicciFlowTrajectory) {
  const auto o = run({"ricci-flow", "--metric", "sphere", "--theta", "1.0", "--t-end", "0.1", "--dt", "0.01",
                      "--record-every", "5"});
  ASSERT_EQ(o.code, 0) << o.err;
  const Csv c = parse_csv(o.out);
  ASSERT_EQ(c.rows.size(), 3u);
  EXPECT_NEAR(c.at(2, "t"), 0.1, 1e-15);
  EXPECT_NEAR(c.at(2, "g11"), 0.8, 1e-10);
}

TEST(Run, JsonOutputHasMetadataAndRowObjects) {
  const auto o = run({"cl-spectrum", "--format", "json", "--sweep", "eps=0:0.1:3"});
  ASSERT_EQ(o.code, 0) << o.err;
  const auto j = nlohmann::json::parse(o.out);
  EXPECT_EQ(j["metadata"]["version"], kVersion);
  EXPECT_TRUE(j["metadata"]["flags"].is_array());
  ASSERT_EQ(j["rows"].size(), 3u);
  EXPECT_EQ(j["rows"][0]["kappa"], 4.0);
  EXPECT_EQ(j["rows"][2]["eps"], 0.1);
}

TEST(Run, ExitCodes) {
  EXPECT_EQ(run({"tube", "--sweep", "theta=0:1:0"}).code, kExitValidation);
  EXPECT_EQ(run({"tube", "--r0", "abc"}).code, kExitValidation);
  EXPECT_EQ(run({"frobnicate"}).code, kExitValidation);
  EXPECT_EQ(run({"tube", "--sweep", "nosuch=0:1:2"}).code, kExitValidation);
  const auto sing = run({"lyapunov", "--r", "0"});
  EXPECT_EQ(sing.code, kExitValidation);
  // sphere collapses at t = 1/2: positivity loss is numerical
  const auto collapse = run({"ricci-flow", "--metric", "sphere", "--theta", "1", "--t-end", "1", "--dt", "0.1"});
  EXPECT_EQ(collapse.code, kExitNumerical);
  EXPECT_NE(collapse.err.find("positivity"), std::string::npos);
  // polar chart origin is outside the domain
  EXPECT_EQ(run({"curvature", "--metric", "polar", "--r", "0"}).code, kExitNumerical);
}

TEST(Run, DeterministicAcrossThreadCounts) {
  const std::vector<std::string> base = {"tube", "--mode", "thick", "--kappa0", "1.5", "--tau0", "0.3",
                                         "--sweep", "theta=0:6.283185307179586:13", "--sweep", "s=0:2:3"};
  auto a = run(base);
  auto with_threads = base;
  with_threads.insert(with_threads.end(), {"--threads", "4"});
  auto b = run(with_threads);
  ASSERT_EQ(a.code, 0);
  ASSERT_EQ(b.code, 0);
  // the echoed config is identical too: threads is not part of it
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out, run(base).out);
}

TEST(Run, OutputFileAndEnvironmentDirectory) {
  const std::string dir = ::testing::TempDir();
  const std::string path = dir + "ricciflux_out_" + std::to_string(::getpid()) + ".csv";
  ASSERT_EQ(run({"cl-spectrum", "--out", path}).code, 0);
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  EXPECT_EQ(ss.str(), run({"cl-spectrum"}).out);
  std::remove(path.c_str());

  ::setenv("RICCIFLUX_OUT_DIR", dir.c_str(), 1);
  const auto o = run({"cl-spectrum", "--format", "json"});
  ::unsetenv("RICCIFLUX_OUT_DIR");
  EXPECT_EQ(o.code, 0);
  EXPECT_TRUE(o.out.empty());
  std::ifstream j(dir + "/cl-spectrum.json");
  EXPECT_TRUE(j.good());
  std::remove((dir + "/cl-spectrum.json").c_str());
}

TEST(Executable, ExitCodesAndByteIdenticalOutput) {
  const std::string exe = RICCIFLUX_CLI_PATH;
  auto status = [](const std::string& cmd) {
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  };
  EXPECT_EQ(status(exe + " cl-spectrum > /dev/null"), 0);
  EXPECT_EQ(status(exe + " tube --sweep theta=0:1:0 > /dev/null 2>&1"), 1);
  EXPECT_EQ(status(exe + " ricci-flow --metric sphere --theta 1 --t-end 1 --dt 0.1 > /dev/null 2>&1"), 2);
  const std::string a = ::testing::TempDir() + "exe_a.csv", b = ::testing::TempDir() + "exe_b.csv";
  ASSERT_EQ(status(exe + " tube --sweep theta=0:6.28:7 --out " + a), 0);
  ASSERT_EQ(status(exe + " tube --sweep theta=0:6.28:7 --out " + b), 0);
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  EXPECT_FALSE(sa.str().empty());
  EXPECT_EQ(sa.str(), sb.str());
}

}  // namespace
