#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("pbsmc_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Result run_cli(const std::string& args, const fs::path& dir) {
  const fs::path log = dir / "stdout.txt";
  const std::string cmd = std::string("\"") + PBSMC_CLI_PATH + "\" " + args + " > \"" +
                          log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::ostringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

void write(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
}

std::string read(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kToy = R"({"scenarios": [{"base": "scalar_toy", "name": "toy", "sim": {"t_final": 0.5}}]})";

}  // namespace

TEST(Cli, List) {
  const auto dir = scratch("list");
  const Result r = run_cli("list", dir);
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("paper_norm1"), std::string::npos);
  EXPECT_NE(r.out.find("scalar_toy"), std::string::npos);
}

TEST(Cli, RunWritesArtifacts) {
  const auto dir = scratch("run");
  write(dir / "toy.json", kToy);
  const Result r = run_cli("run " + (dir / "toy.json").string() + " --out " + (dir / "out").string(), dir);
  EXPECT_EQ(r.code, 0) << r.out;
  for (const char* ext : {".trace.csv", ".metrics.json", ".cert.txt"}) {
    EXPECT_TRUE(fs::exists(dir / "out" / (std::string("toy") + ext))) << ext;
  }
  for (const auto& entry : fs::directory_iterator(dir / "out")) {
    EXPECT_EQ(entry.path().string().find(".tmp."), std::string::npos);
  }
}

TEST(Cli, OutputDirectoryFromEnvironment) {
  const auto dir = scratch("env");
  write(dir / "toy.json", kToy);
  const std::string env = "PBSMC_OUT_DIR=\"" + (dir / "envout").string() + "\" ";
  const std::string cmd = env + "\"" + PBSMC_CLI_PATH + "\" run " + (dir / "toy.json").string() +
                          " > /dev/null 2>&1";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(dir / "envout" / "toy.trace.csv"));
}

TEST(Cli, ConfigErrorExitsTwo) {
  const auto dir = scratch("config");
  write(dir / "bad.json", R"({"scenarios": [{"base": "scalar_toy", "potential": {"k": "two"}}]})");
  const Result r = run_cli("run " + (dir / "bad.json").string() + " --out " + dir.string(), dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("potential.k"), std::string::npos) << r.out;
  EXPECT_EQ(run_cli("run no_such_scenario --out " + dir.string(), dir).code, 2);
  EXPECT_EQ(run_cli("run", dir).code, 2);
}

TEST(Cli, CertificationFailureExitsThree) {
  const auto dir = scratch("cert");
  write(dir / "indef.json", R"({"scenarios": [{"base": "scalar_toy", "name": "indef",
      "sliding": {"kind": "linear", "phi_q": [[-1]], "phi_eta": [[1]]}}]})");
  const std::string cfg = (dir / "indef.json").string();
  const Result c = run_cli("certify " + cfg, dir);
  EXPECT_EQ(c.code, 3);
  EXPECT_NE(c.out.find("VIOLATED"), std::string::npos) << c.out;
  EXPECT_EQ(run_cli("run " + cfg + " --out " + dir.string(), dir).code, 3);
  EXPECT_FALSE(fs::exists(dir / "indef.trace.csv"));
}

TEST(Cli, DivergenceExitsFour) {
  const auto dir = scratch("diverge");
  write(dir / "stiff.json", R"({"scenarios": [{"base": "scalar_toy", "name": "stiff",
      "potential": {"kind": "norm_power", "k": 50, "r": 2, "s": 2},
      "sim": {"t_final": 1000, "step": 1}}]})");
  const Result r = run_cli("run " + (dir / "stiff.json").string() + " --waive-assumptions --out " +
                               dir.string(),
                           dir);
  EXPECT_EQ(r.code, 4) << r.out;
}

TEST(Cli, CertifyScalarToy) {
  const auto dir = scratch("certify_toy");
  const Result r = run_cli("certify scalar_toy", dir);
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("epsilon (sampled estimate) = 2\n"), std::string::npos) << r.out;
}

TEST(Cli, DumpedConfigReproducesRun) {
  const auto dir = scratch("dump");
  write(dir / "toy.json", kToy);
  const std::string a = (dir / "a").string(), b = (dir / "b").string();
  const std::string dumped = (dir / "effective.json").string();
  ASSERT_EQ(run_cli("run " + (dir / "toy.json").string() + " --step 0.002 --out " + a +
                        " --dump-config " + dumped,
                    dir)
                .code,
            0);
  ASSERT_EQ(run_cli("run " + dumped + " --out " + b, dir).code, 0);
  EXPECT_EQ(read(dir / "a" / "toy.trace.csv"), read(dir / "b" / "toy.trace.csv"));
  EXPECT_FALSE(read(dir / "a" / "toy.trace.csv").empty());
}
