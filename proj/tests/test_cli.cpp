#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string output;
};

CliRun run(const std::string& args, const fs::path& cwd) {
  const fs::path log = cwd / "cli.log";
  const std::string cmd =
      "cd '" + cwd.string() + "' && '" + std::string(STOKESLAB_CLI) + "' " + args + " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(log);
  std::ostringstream os;
  os << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, os.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("stokeslab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  fs::path dir;
};

}  // namespace

TEST_F(Cli, SolveWritesVtkAndJson) {
  const CliRun r = run("solve --problem s1 --case ms1 --n 4 --vtk out/", dir);
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_TRUE(fs::exists(dir / "out" / "solution_ms1_s1.vtk"));
  const std::string json = slurp(dir / "out" / "solve_ms1_s1.json");
  EXPECT_NE(json.find("\"problem\": \"s1\""), std::string::npos);
  EXPECT_NE(json.find("\"relative_residual\""), std::string::npos);
}

TEST_F(Cli, VerifyS1WritesCsvAndSummary) {
  const CliRun r = run("verify-s1 --case ms1 --n 8 --eps 1e-3,1e-2,1e-1 --out rep", dir);
  ASSERT_EQ(r.code, 0) << r.output;
  std::istringstream csv(slurp(dir / "rep" / "verify_s1_ms1.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "level,h,eps,lhs_u,lhs_p,rhs_flux,rhs_trace,ratio");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, 3);
  const std::string json = slurp(dir / "rep" / "verify_s1_ms1.json");
  EXPECT_NE(json.find("\"linear_fit\": true"), std::string::npos);
  EXPECT_NE(json.find("\"ratio_spread\": true"), std::string::npos);
}

TEST_F(Cli, EmptyGamma2IsAValidationError) {
  const CliRun r = run("solve --problem s2 --layout all-gamma1", dir);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("Gamma2"), std::string::npos) << r.output;
}

TEST_F(Cli, UnknownFlagAndBadValues) {
  EXPECT_EQ(run("solve --bogus 3", dir).code, 1);
  EXPECT_EQ(run("solve --n 0", dir).code, 1);
  EXPECT_EQ(run("solve --case ms9", dir).code, 1);
  EXPECT_EQ(run("verify-s1 --eps -1", dir).code, 1);
  EXPECT_EQ(run("", dir).code, 1);
}

TEST_F(Cli, HelpListsEveryFlag) {
  const CliRun r = run("--help", dir);
  EXPECT_EQ(r.code, 0);
  for (const char* flag : {"--case", "--problem", "--n", "--levels", "--eps", "--layout", "--out", "--vtk",
                           "--perturb", "--refine", "--config"})
    EXPECT_NE(r.output.find(flag), std::string::npos) << flag;
}

TEST_F(Cli, ConfigFile) {
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "case=ms1\nproblem=pp\nn=3\nout=cfgout\n";
  }
  const CliRun ok = run("solve --config run.cfg", dir);
  ASSERT_EQ(ok.code, 0) << ok.output;
  EXPECT_TRUE(fs::exists(dir / "cfgout" / "solve_ms1_pp.json"));
  {
    std::ofstream cfg(dir / "bad.cfg");
    cfg << "colour=blue\n";
  }
  EXPECT_EQ(run("solve --config bad.cfg", dir).code, 1);
}

TEST_F(Cli, OutputIsDeterministic) {
  ASSERT_EQ(run("verify-s2 --case ms2 --n 4 --eps 0,1e-2,1e-1 --levels 2 --out a", dir).code, 0);
  ASSERT_EQ(run("verify-s2 --case ms2 --n 4 --eps 0,1e-2,1e-1 --levels 2 --out b", dir).code, 0);
  EXPECT_EQ(slurp(dir / "a" / "verify_s2_ms2.csv"), slurp(dir / "b" / "verify_s2_ms2.csv"));
  EXPECT_EQ(slurp(dir / "a" / "verify_s2_ms2.json"), slurp(dir / "b" / "verify_s2_ms2.json"));
}

TEST_F(Cli, MeshConvergenceAndConstants) {
  ASSERT_EQ(run("mesh --n 2 --refine 1 --out m", dir).code, 0);
  EXPECT_NE(slurp(dir / "m" / "mesh.txt").find("cells 32"), std::string::npos);
  ASSERT_EQ(run("convergence --problem s1 --case ms2 --n 4 --levels 2 --out c", dir).code, 0);
  EXPECT_TRUE(fs::exists(dir / "c" / "convergence_ms2_s1.csv"));
  ASSERT_EQ(run("constants --n 2 --levels 2 --out k", dir).code, 0);
  EXPECT_NE(slurp(dir / "k" / "constants.json").find("\"beta_infsup\""), std::string::npos);
}
