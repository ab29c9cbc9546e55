#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "dcell/cli.hpp"
#include "dcell/csv.hpp"

namespace dcell::cli {
namespace {

namespace fs = std::filesystem;

RunConfig parse(std::initializer_list<const char*> args) {
  std::vector<const char*> argv{"dirac-cell"};
  argv.insert(argv.end(), args.begin(), args.end());
  return load_config(static_cast<int>(argv.size()), argv.data());
}

struct Invocation {
  int code;
  std::string out;
  std::string err;
};

Invocation invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "dirac-cell");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dcell_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST(LoadConfig, DefaultsMatchReferenceSetup) {
  const auto c = parse({"compare"});
  EXPECT_EQ(c.mode, Mode::Compare);
  EXPECT_EQ(c.diffusion, 1.0);
  EXPECT_EQ(c.phi, 1.0);
  EXPECT_EQ(c.uptake, 1.0);
  EXPECT_EQ(c.center.x, 5.0);
  EXPECT_EQ(c.center.y, 5.0);
  EXPECT_EQ(c.radius, 0.25);
  EXPECT_EQ(c.side, 10.0);
  EXPECT_EQ(c.h, 0.2495);
  EXPECT_EQ(c.dt, 0.04);
  EXPECT_EQ(c.eps, 0.02);
  EXPECT_EQ(c.sigma(), 0.02);
  EXPECT_EQ(c.nq, 64);
  EXPECT_EQ(c.coupling, Coupling::Implicit);
}

TEST(LoadConfig, FlagOverrideTouchesOnlyThatField) {
  const auto d = parse({"compare"});
  const auto c = parse({"compare", "--d", "10.0"});
  EXPECT_EQ(c.diffusion, 10.0);
  EXPECT_EQ(c.uptake, d.uptake);
  EXPECT_EQ(c.h, d.h);
  EXPECT_EQ(c.dt, d.dt);
  EXPECT_EQ(c.t_end, d.t_end);
}

TEST(LoadConfig, AllOptions) {
  const auto c = parse({"run-point", "--a", "0", "--phi", "2", "--center", "4,6", "--radius", "0.3", "--l", "12",
                        "--h", "0.3", "--dt", "0.01", "--t_end", "2", "--eps", "4e-4", "--eps-is-variance", "--nq",
                        "32", "--coupling", "lag", "--rel-tol", "1e-9", "--jobs", "3", "--snapshot-times", "0.5,1"});
  EXPECT_EQ(c.mode, Mode::RunPoint);
  EXPECT_EQ(c.uptake, 0.0);
  EXPECT_EQ(c.phi, 2.0);
  EXPECT_EQ(c.center.x, 4.0);
  EXPECT_EQ(c.center.y, 6.0);
  EXPECT_EQ(c.radius, 0.3);
  EXPECT_EQ(c.side, 12.0);
  EXPECT_EQ(c.t_end, 2.0);
  EXPECT_NEAR(c.sigma(), 0.02, 1e-15);
  EXPECT_EQ(c.nq, 32);
  EXPECT_EQ(c.coupling, Coupling::ExplicitLag);
  EXPECT_EQ(c.jobs, 3);
  EXPECT_EQ(c.snapshot_times, (std::vector<double>{0.5, 1.0}));
  const auto p = c.point();
  EXPECT_EQ(p.cell.phi, 2.0);
  EXPECT_EQ(p.quad_points, 32);
  EXPECT_EQ(p.coupling, Coupling::ExplicitLag);
  EXPECT_EQ(c.exclusion().snapshot_times, c.snapshot_times);
  EXPECT_EQ(c.comparison().side_length, 12.0);
}

TEST(LoadConfig, NegativeUptakeNamesKey) {
  try {
    (void)parse({"compare", "--a", "-1"});
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "a");
  }
}

TEST(LoadConfig, InvalidValues) {
  EXPECT_THROW(parse({"compare", "--d", "0"}), ConfigError);
  EXPECT_THROW(parse({"compare", "--h", "5.1"}), ConfigError);
  EXPECT_THROW(parse({"compare", "--nq", "8"}), ConfigError);
  EXPECT_THROW(parse({"compare", "--center", "0.3,5"}), ConfigError);
  EXPECT_THROW(parse({"compare", "--coupling", "sideways"}), ConfigError);
  EXPECT_THROW(parse({"sideways"}), ConfigError);
  EXPECT_THROW(parse({}), ConfigError);
  try {
    (void)parse({"compare", "--dt", "abc"});
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("--dt"), std::string::npos) << e.what();
  }
}

TEST(LoadConfig, HelpIsNotAnError) {
  EXPECT_THROW(parse({"--help"}), HelpRequested);
  const auto r = invoke({"--help"});
  EXPECT_EQ(r.code, kOk);
  EXPECT_NE(r.out.find("--t-end"), std::string::npos);
}

TEST_F(TempDir, TomlConfigAndPrecedence) {
  const auto path = dir_ / "run.toml";
  std::ofstream(path) << "d = 0.1\na = 0\nt_end = 3.0\ncoupling = \"lag\"\n";
  const std::string p = path.string();
  const auto c = parse({"compare", "--config", p.c_str()});
  EXPECT_EQ(c.diffusion, 0.1);
  EXPECT_EQ(c.uptake, 0.0);
  EXPECT_EQ(c.t_end, 3.0);
  EXPECT_EQ(c.coupling, Coupling::ExplicitLag);
  const auto o = parse({"compare", "--config", p.c_str(), "--d", "10"});
  EXPECT_EQ(o.diffusion, 10.0);
  EXPECT_EQ(o.uptake, 0.0);
}

TEST_F(TempDir, TomlUnknownKeyIsNamed) {
  const auto path = dir_ / "bad.toml";
  std::ofstream(path) << "d = 1.0\ndiffusivity = 2.0\n";
  const std::string p = path.string();
  try {
    (void)parse({"compare", "--config", p.c_str()});
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("diffusivity"), std::string::npos) << e.what();
  }
  EXPECT_EQ(invoke({"compare", "--config", p}).code, kConfigError);
}

TEST_F(TempDir, TomlTypeMismatchIsConfigError) {
  const auto path = dir_ / "typed.toml";
  std::ofstream(path) << "nq = \"many\"\n";
  EXPECT_THROW(parse({"compare", "--config", path.string().c_str()}), ConfigError);
}

TEST(Csv, NumberFormat) {
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(format_number(40.0), "40");
  EXPECT_EQ(format_number(std::nan("")), "nan");
  EXPECT_EQ(format_number(1.0 / 0.0), "inf");
  EXPECT_EQ(format_number(-1.0 / 0.0), "-inf");
  EXPECT_EQ(std::stod(format_number(0.2495)), 0.2495);
}

TEST_F(TempDir, Fig2RefusesZeroUptake) {
  const auto r = invoke({"fig2", "--a", "0", "--out", dir_.string()});
  EXPECT_EQ(r.code, kConfigError);
  EXPECT_NE(r.err.find("run-exclusion"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir_ / "fig2_exclusion.csv"));
}

TEST_F(TempDir, RunExclusionCsvSchema) {
  const auto r = invoke({"run-exclusion", "--t-end", "0.2", "--out", dir_.string()});
  ASSERT_EQ(r.code, kOk) << r.err;
  const auto l = lines(slurp(dir_ / "exclusion.csv"));
  ASSERT_EQ(l.size(), 2u + 6u);
  EXPECT_EQ(l[0].rfind("# config: ", 0), 0u);
  EXPECT_EQ(l[1], "t,l2_tilde,h1_semi,mass,flux,steady");
  EXPECT_EQ(l[2].rfind("0,0,0,0,", 0), 0u) << l[2];
}

TEST_F(TempDir, RunPointCsvSchema) {
  const auto r = invoke({"run-point", "--t-end", "0.2", "--out", dir_.string()});
  ASSERT_EQ(r.code, kOk) << r.err;
  const auto l = lines(slurp(dir_ / "point.csv"));
  ASSERT_EQ(l.size(), 2u + 6u);
  EXPECT_EQ(l[1], "t,l2_full,l2_tilde,h1_semi_tilde,mass,psi,steady");
}

TEST_F(TempDir, CompareCsvIsDeterministic) {
  const auto a = dir_ / "a";
  const auto b = dir_ / "b";
  ASSERT_EQ(invoke({"compare", "--t-end", "0.4", "--out", a.string()}).code, kOk);
  ASSERT_EQ(invoke({"compare", "--t-end", "0.4", "--out", b.string()}).code, kOk);
  const auto text = slurp(a / "comparison.csv");
  EXPECT_EQ(text, slurp(b / "comparison.csv"));
  const auto l = lines(text);
  ASSERT_EQ(l.size(), 2u + 11u);
  EXPECT_EQ(l[1], "t,e_l2,abs_l2,abs_h1semi,l2_uS,l2_uP,psi,steady");
  EXPECT_NE(l[2].find(",nan,"), std::string::npos) << l[2];
  EXPECT_EQ(text.find('\r'), std::string::npos);
}

TEST_F(TempDir, Fig2WritesBothCurves) {
  ASSERT_EQ(invoke({"fig2", "--t-end", "0.4", "--out", dir_.string()}).code, kOk);
  for (const char* name : {"fig2_exclusion.csv", "fig2_point.csv"}) {
    const auto l = lines(slurp(dir_ / name));
    ASSERT_GE(l.size(), 3u) << name;
    EXPECT_EQ(l[1], "t,l2_tilde,mass,flux_or_psi") << name;
  }
}

TEST_F(TempDir, MeshWritesQualityAndVtk) {
  ASSERT_EQ(invoke({"mesh", "--out", dir_.string()}).code, kOk);
  const auto l = lines(slurp(dir_ / "mesh_quality.csv"));
  ASSERT_GE(l.size(), 3u);
  bool vtk = false;
  for (const auto& e : fs::directory_iterator(dir_)) vtk |= e.path().extension() == ".vtk";
  EXPECT_TRUE(vtk);
}

TEST_F(TempDir, SnapshotsWrittenAsVtk) {
  ASSERT_EQ(invoke({"run-exclusion", "--t-end", "0.2", "--snapshot-times", "0.08", "--out", dir_.string()}).code, kOk);
  int count = 0;
  for (const auto& e : fs::directory_iterator(dir_)) count += e.path().extension() == ".vtk";
  EXPECT_GE(count, 1);
}

TEST(AnalyticChecks, AllPass) {
  const auto checks = analytic_checks();
  EXPECT_GE(checks.size(), 5u);
  for (const auto& c : checks) EXPECT_TRUE(c.pass) << c.name << " value " << c.value << " reference " << c.reference;
}

TEST_F(TempDir, AnalyticChecksCommand) {
  const auto r = invoke({"analytic-checks", "--out", dir_.string()});
  EXPECT_EQ(r.code, kOk) << r.err;
  const auto l = lines(slurp(dir_ / "analytic_checks.csv"));
  ASSERT_GE(l.size(), 3u);
  EXPECT_EQ(l[1], "check,value,reference,tolerance,pass");
  EXPECT_TRUE(fs::exists(dir_ / "analytic_freespace.csv"));
}

}  // namespace
}  // namespace dcell::cli
