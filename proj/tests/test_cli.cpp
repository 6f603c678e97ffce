#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

fs::path workdir()
{
  auto p = fs::temp_directory_path() / "kinac_cli_test";
  fs::create_directories(p);
  return p;
}

fs::path write_config(const std::string& name, const std::string& text)
{
  const auto p = workdir() / name;
  std::ofstream(p) << text;
  return p;
}

int run(const std::string& args)
{
  const std::string cmd = std::string(KINAC_CLI) + " " + args + " > " +
                          (workdir() / "stdout.txt").string() + " 2> " +
                          (workdir() / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p)
{
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, ValidateReportsKeyAndLine)
{
  const auto bad = write_config("bad.cfg", "experiment = fp\ngrid.N = 100\n");
  EXPECT_EQ(run("validate " + bad.string()), 2);
  const auto err = slurp(workdir() / "stderr.txt");
  EXPECT_NE(err.find("line 2"), std::string::npos);
  EXPECT_NE(err.find("N must be a power of two"), std::string::npos);

  const auto good = write_config("good.cfg", "experiment = fp\n");
  EXPECT_EQ(run("validate " + good.string()), 0);
}

TEST(Cli, RunWritesManifestAndCsv)
{
  const auto cfg = write_config("fp.cfg", "experiment = fp\ngrid.L = 6\ngrid.N = 32\ntime.T = 0.05\n");
  const auto out = workdir() / "fp_out";
  fs::remove_all(out);
  ASSERT_EQ(run("run " + cfg.string() + " --output-dir " + out.string() + " --threads 2"), 0);
  const auto m = nlohmann::json::parse(slurp(out / "manifest.json"));
  EXPECT_EQ(m["status"], "ok");
  EXPECT_EQ(m["config"]["grid"]["N"], 32);
  EXPECT_TRUE(m.contains("wall_time"));
  EXPECT_TRUE(m["versions"].contains("kinac"));
  EXPECT_TRUE(fs::exists(out / "diagnostics.csv"));
}

TEST(Cli, AbortWritesErrorJson)
{
  const auto dir = workdir();
  {
    std::ofstream f0(dir / "neg.csv");
    for (int i = -40; i <= 40; ++i) {
      const double v = i * 0.1;
      f0 << v << "," << (std::abs(v) > 2.5 ? -0.01 : std::exp(-v * v / 2)) << "\n";
    }
  }
  const auto cfg = write_config("neg.cfg", "experiment = fp\ngrid.L = 6\ngrid.N = 64\ntime.T = 0.01\n"
                                           "initial.kind = file\ninitial.path = " +
                                               (dir / "neg.csv").string() + "\n");
  const auto out = dir / "neg_out";
  fs::remove_all(out);
  EXPECT_EQ(run("run " + cfg.string() + " --output-dir " + out.string()), 3);
  const auto e = nlohmann::json::parse(slurp(out / "error.json"));
  EXPECT_EQ(e["status"], "aborted");
  EXPECT_EQ(e["invariant"], "positivity");
}
