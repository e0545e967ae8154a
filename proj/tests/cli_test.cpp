#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const std::string kCli = NONNEG_CLI;
const std::string kSamples = NONNEG_SAMPLES;

struct Outcome {
  int code = -1;
  std::string output;
};

Outcome run(const std::string& args) {
  const fs::path log = fs::temp_directory_path() / ("nonneg_cli_" + std::to_string(::getpid()) + ".log");
  const int raw = std::system((kCli + " " + args + " > " + log.string() + " 2>&1").c_str());
  std::ifstream in(log);
  std::stringstream buf;
  buf << in.rdbuf();
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, buf.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string sha256(const std::string& bytes) {
  unsigned char d[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), d, &len, EVP_sha256(), nullptr);
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(d[i]);
  return out.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("nonneg_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string out(const std::string& name) const { return (dir_ / name).string(); }
  std::string sample(const std::string& name) const { return kSamples + "/" + name; }
  fs::path dir_;
};

TEST_F(Cli, InterpolateZeroData) {
  const auto r = run("interpolate --dataset " + sample("zero.json") + " --m 1 --flavor cm1 --grid 2001 --out " + out("z"));
  EXPECT_EQ(r.code, 0) << r.output;
  const json report = json::parse(slurp(out("z") + "/report.json"));
  EXPECT_EQ(report["interp_ok"], true);
  for (const char* key : {"min_on_grid", "norms", "norm_ratio", "defect_ratios"}) EXPECT_TRUE(report.contains(key)) << key;
  std::ifstream grid(out("z") + "/grid.csv");
  std::string header;
  std::getline(grid, header);
  EXPECT_EQ(header, "x1,F,d(1)");
}

TEST_F(Cli, FeasibilityTwoPoint) {
  const auto r = run("feasibility --dataset " + sample("two_point.json") + " --k-sharp 2 --m 1 --out " + out("f"));
  EXPECT_EQ(r.code, 0) << r.output;
  const json s = json::parse(slurp(out("f") + "/summary.json"));
  EXPECT_NEAR(s["ratio"].get<double>(), 1.0, 1e-3);
  EXPECT_NEAR(s["min_norm"].get<double>(), 1.0, 1e-3);
  EXPECT_EQ(slurp(out("f") + "/finiteness.csv").substr(0, 28), "subset,size,M,status,points\n");
}

TEST_F(Cli, DecomposeEmpty) {
  const auto r = run("decompose --dataset " + sample("empty.json") + " --region -2 2 --out " + out("d"));
  EXPECT_EQ(r.code, 0) << r.output;
  const json dump = json::parse(slurp(out("d") + "/decomposition.json"));
  ASSERT_EQ(dump.size(), 4u);
  for (const auto& c : dump) {
    EXPECT_EQ(c["type"], 3);
    EXPECT_EQ(c["level"], 0);
  }
}

TEST_F(Cli, MembershipAndExtension) {
  EXPECT_EQ(run("gamma-check --dataset " + sample("jets.json") + " --out " + out("g")).code, 0);
  const json v = json::parse(slurp(out("g") + "/verdicts.json"));
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v[0]["status"], "member");
  EXPECT_EQ(v[1]["status"], "nonmember");
  EXPECT_EQ(v[2]["status"], "member");
  for (const char* flavor : {"cm1", "cm"}) {
    const auto r = run("extend --dataset " + sample("jet.json") + " --flavor " + flavor + " --out " + out(flavor));
    EXPECT_EQ(r.code, 0) << r.output;
    const json rep = json::parse(slurp(out(flavor) + "/report.json"));
    EXPECT_GE(rep["min_on_grid"].get<double>(), -1e-10);
    EXPECT_LE(rep["jet_match"].get<double>(), 1e-9);
  }
}

TEST_F(Cli, InputErrorsExitTwo) {
  auto r = run("interpolate --dataset " + sample("bad_negative.json") + " --out " + out("x"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("points[1].f"), std::string::npos) << r.output;
  r = run("decompose --dataset " + sample("two_point.json") + " --region 0 1 --out " + out("x"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("point 0"), std::string::npos) << r.output;
  r = run("feasibility --dataset " + sample("two_point.json") + " --m 2 --out " + out("x"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("inconsistent"), std::string::npos) << r.output;
  std::ofstream(out("broken.json")) << "{\"n\": 1, \"m\": 1, \"points\": [";
  r = run("decompose --dataset " + out("broken.json") + " --out " + out("x"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("malformed JSON"), std::string::npos) << r.output;
  EXPECT_EQ(run("interpolate --out " + out("x")).code, 2);
  EXPECT_EQ(run("nonsense").code, 2);
}

TEST_F(Cli, VerificationFailureExitsOne) {
  // tolerance -1 demands F >= 1 on the whole grid
  const auto r = run("extend --dataset " + sample("jet.json") + " --tol -1 --out " + out("e"));
  EXPECT_EQ(r.code, 1) << r.output;
}

TEST_F(Cli, DeterministicOutputs) {
  for (const char* dir : {"a", "b"}) {
    ASSERT_EQ(run("interpolate --dataset " + sample("bowl.json") + " --grid 501 --out " + out(dir)).code, 0);
    ASSERT_EQ(run("feasibility --dataset " + sample("bowl.json") + " --out " + out(dir)).code, 0);
  }
  for (const char* file : {"report.json", "grid.csv", "summary.json", "finiteness.csv"})
    EXPECT_EQ(slurp(out("a") + "/" + file), slurp(out("b") + "/" + file)) << file;
}

TEST_F(Cli, ManifestIsCompleteAndReplays) {
  ASSERT_EQ(run("interpolate --dataset " + sample("plane.json") + " --out " + out("p")).code, 0);
  const json manifest = json::parse(slurp(out("p") + "/manifest.json"));
  EXPECT_EQ(manifest["input"]["sha256"], sha256(slurp(sample("plane.json"))));
  ASSERT_EQ(manifest["outputs"].size(), 2u);
  for (const auto& o : manifest["outputs"]) {
    const fs::path file = out("p") + "/" + o["file"].get<std::string>();
    ASSERT_TRUE(fs::exists(file)) << file;
    EXPECT_EQ(o["sha256"], sha256(slurp(file)));
  }
  for (const char* key : {"command", "config", "versions", "timing_seconds", "summary"}) EXPECT_TRUE(manifest.contains(key)) << key;
  EXPECT_TRUE(manifest["summary"].contains("norm_ratio"));
  const auto replay = run("selftest --manifest " + out("p") + "/manifest.json");
  EXPECT_EQ(replay.code, 0) << replay.output;
  EXPECT_EQ(replay.output.find("FAIL"), std::string::npos);
}

TEST_F(Cli, SelftestPasses) {
  const auto r = run("selftest --seed 7");
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(r.output.find("FAIL"), std::string::npos) << r.output;
}

}  // namespace
