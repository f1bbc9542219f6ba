#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

namespace fs = std::filesystem;

namespace {

const char* kTiny = R"({
  "geometry": {"width": 1.0, "height": 1.0, "notch": [[0.0, 0.5], [0.5, 0.5]]},
  "material": {"E1": 114800, "E2": 11700, "G12": 9660, "nu12": 0.21, "Gc": 2.7},
  "schedule": {"increment": 1e-3, "steps": 2},
  "mesh": {"base_level": 2, "max_depth": 4},
  "output": {"record_timing": false}
})";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(testing::TempDir()) / ("orthofrac_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(const std::string& args, const fs::path& dir, const std::string& env = "") {
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = env + " '" ORTHOFRAC_BIN "' " + args + " >'" + out.string() + "' 2>'" +
                          err.string() + "'";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

}  // namespace

TEST(Cli, CheckAcceptsShippedConfigs) {
  const fs::path dir = scratch("check");
  for (const auto& entry : fs::directory_iterator(ORTHOFRAC_CONFIG_DIR)) {
    const Result r = invoke("check '" + entry.path().string() + "'", dir);
    EXPECT_EQ(r.code, 0) << entry.path() << "\n" << r.err;
    EXPECT_NE(r.out.find("config ok"), std::string::npos);
  }
}

TEST(Cli, UnknownFlagPrintsUsage) {
  const fs::path dir = scratch("flag");
  const fs::path cfg = write_config(dir, kTiny);
  const Result r = invoke("check --frobnicate '" + cfg.string() + "'", dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--frobnicate"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("Usage"), std::string::npos) << r.err;
}

TEST(Cli, MissingSubcommandIsUsageError) {
  const fs::path dir = scratch("nosub");
  EXPECT_EQ(invoke("", dir).code, 2);
  EXPECT_EQ(invoke("--help", dir).code, 0);
}

TEST(Cli, InvalidConfigIsRuntimeError) {
  const fs::path dir = scratch("invalid");
  std::string text = kTiny;
  text.replace(text.find("\"E1\": 114800"), 12, "\"E1\": -1");
  const fs::path cfg = write_config(dir, text);
  const Result r = invoke("check '" + cfg.string() + "'", dir);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("material.E1"), std::string::npos) << r.err;
  EXPECT_EQ(invoke("check '" + (dir / "missing.json").string() + "'", dir).code, 1);
}

TEST(Cli, MeshWritesInitialVtk) {
  const fs::path dir = scratch("mesh");
  const fs::path cfg = write_config(dir, kTiny);
  const Result r = invoke("mesh '" + cfg.string() + "' --output-dir '" + (dir / "o").string() + "'", dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "o" / "mesh_initial.vtk"));
  EXPECT_TRUE(fs::exists(dir / "o" / "config.resolved.json"));
  EXPECT_NE(slurp(dir / "o" / "mesh_initial.vtk").find("CELLS 16 "), std::string::npos);
}

TEST(Cli, RunWritesOutputsAndHonoursOverrides) {
  const fs::path dir = scratch("run");
  const fs::path cfg = write_config(dir, kTiny);
  const Result r = invoke("run '" + cfg.string() + "' --output-dir '" + (dir / "o").string() +
                              "' --log-level warn",
                          dir, "ORTHOFRAC_MAX_STEPS=1 ORTHOFRAC_OUTPUT_DIR=/nonexistent/ignored");
  ASSERT_EQ(r.code, 0) << r.err;
  const fs::path o = dir / "o";
  EXPECT_TRUE(fs::exists(o / "step_0000.vtk"));
  EXPECT_TRUE(fs::exists(o / "step_0001.vtk"));
  EXPECT_FALSE(fs::exists(o / "step_0002.vtk"));
  const std::string csv = slurp(o / "load_displacement.csv");
  int lines = 0;
  for (char ch : csv) lines += ch == '\n';
  EXPECT_EQ(lines, 3) << csv;
  EXPECT_NE(slurp(o / "config.resolved.json").find("\"steps\":1"), std::string::npos);

  // the flag beats the environment, the environment beats the file
  const Result again = invoke("run '" + cfg.string() + "' --max-steps 2 --output-dir '" +
                                  (dir / "p").string() + "' --log-level off",
                              dir, "ORTHOFRAC_MAX_STEPS=1");
  ASSERT_EQ(again.code, 0) << again.err;
  EXPECT_TRUE(fs::exists(dir / "p" / "step_0002.vtk"));
}

TEST(Cli, BenchPrintsComparison) {
  const fs::path dir = scratch("bench");
  std::string text = kTiny;
  text.replace(text.find("\"steps\": 2"), 10, "\"steps\": 40");
  const fs::path cfg = write_config(dir, text);
  const Result r = invoke("bench '" + cfg.string() + "' --output-dir '" + (dir / "o").string() +
                              "' --log-level off",
                          dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("adaptive"), std::string::npos);
  EXPECT_NE(r.out.find("dof ratio"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "o" / "bench.txt"));
}
