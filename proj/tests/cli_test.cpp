#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(DNROM_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

const std::string demo = std::string("-m ") + DNROM_DATA + "/demo2dof.toml";

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("dnrom_cli_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(CliTest, ExitCodes) {
  const auto out = scratch("codes");
  EXPECT_EQ(run("eig " + demo + " -o " + out.string()), 0);
  EXPECT_EQ(run("dnf " + demo + " --masters 1 2 --resonance 2,1,1 --order 3 -o " + out.string()), 4);
  EXPECT_EQ(run("dnf " + demo + " --masters 1 2 --resonance 2,1,1 --order 2 -o " + out.string()), 0);
  EXPECT_EQ(run("eig --bogus"), 2);
  EXPECT_EQ(run("dnf " + demo + " --masters 5 -o " + out.string()), 2);
  EXPECT_EQ(run("rom --archive /nonexistent -o " + out.string()), 2);
  // Failed runs still leave a manifest with the exit code.
  const std::string manifest = slurp(out / "dnf.manifest.json");
  EXPECT_NE(manifest.find("\"exit_code\": 2"), std::string::npos);
}

TEST(CliTest, RefusalCitesPolicy) {
  const auto out = scratch("policy");
  fs::create_directories(out);
  const std::string log = (out / "log.txt").string();
  const std::string cmd = std::string(DNROM_CLI) + " dnf " + demo +
                          " --masters 1 2 --resonance 2,1,1 --order 3 -o " + out.string() + " 2> " + log;
  EXPECT_EQ(WEXITSTATUS(std::system(cmd.c_str())), 4);
  EXPECT_NE(slurp(log).find("second-order DNF"), std::string::npos);
  EXPECT_NE(slurp(out / "dnf.manifest.json").find("\"exit_code\": 4"), std::string::npos);
}

TEST(CliTest, PipelineIsDeterministic) {
  const char* files[] = {"eig.csv", "step_tensors.txt", "mapping.txt", "rom.txt",
                         "backbone.csv", "frf.csv", "reconstruct.csv"};
  fs::path dirs[2] = {scratch("det_a"), scratch("det_b")};
  for (const auto& d : dirs) {
    const std::string o = " -o " + d.string();
    ASSERT_EQ(run("eig " + demo + o), 0);
    ASSERT_EQ(run("step " + demo + o), 0);
    ASSERT_EQ(run("dnf " + demo + o), 0);
    ASSERT_EQ(run("rom " + demo + " --archive " + (d / "mapping.txt").string() + o), 0);
    ASSERT_EQ(run("backbone " + demo + o), 0);
    ASSERT_EQ(run("frf " + demo + o), 0);
    ASSERT_EQ(run("reconstruct " + demo + " --order 3 --R 0.1 --S 0.02" + o), 0);
  }
  for (const char* f : files) {
    const std::string a = slurp(dirs[0] / f), b = slurp(dirs[1] / f);
    EXPECT_FALSE(a.empty()) << f;
    EXPECT_EQ(a, b) << f;
  }
  for (const char* c : {"eig", "step", "dnf", "rom", "backbone", "frf", "reconstruct"})
    EXPECT_TRUE(fs::exists(dirs[0] / (std::string(c) + ".manifest.json"))) << c;
}

TEST(CliTest, CsvHeadersCarryUnits) {
  const auto out = scratch("units");
  ASSERT_EQ(run("eig " + demo + " --shapes -o " + out.string()), 0);
  ASSERT_EQ(run("frf " + demo + " -o " + out.string()), 0);
  for (const char* f : {"eig.csv", "modes.csv", "frf.csv"}) {
    std::ifstream in(out / f);
    std::string header;
    std::getline(in, header);
    std::stringstream cols(header);
    std::string col;
    while (std::getline(cols, col, ','))
      if (col != "type" && col != "kind") {
        bool unit = false;
        for (const char* suffix : {"_1", "_hz", "_rad_s", "_m", "_m_s", "_m_per_sqrt_kg"})
          unit |= col.size() > std::strlen(suffix) &&
                  col.compare(col.size() - std::strlen(suffix), std::string::npos, suffix) == 0;
        EXPECT_TRUE(unit) << f << ": " << col;
      }
  }
}
