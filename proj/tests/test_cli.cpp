#include "qham/cli.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using namespace qham;
using nlohmann::json;

namespace {

const fs::path kSource = QHAM_SOURCE_DIR;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qham_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Runs the tool and returns its exit status; stderr goes to <out>/stderr.txt.
int tool(const std::string& args, const fs::path& out, const std::string& env = "") {
  const std::string cmd = env + " '" + std::string(QHAM_BINARY) + "' " + args + " --out '" + out.string() +
                          "' > '" + (out / "stdout.txt").string() + "' 2> '" + (out / "stderr.txt").string() + "'";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

int run_config(const std::string& name, const fs::path& out, const std::string& extra = "") {
  fs::create_directories(out);
  return tool("run '" + (kSource / "configs" / (name + ".json")).string() + "' " + extra, out);
}

cli::RunConfig parse(const std::string& text) {
  return cli::parse_config(json::parse(text), (kSource / "configs").string());
}

std::string config_error(const std::string& text) {
  try {
    parse(text);
  } catch (const cli::ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

using Case = std::pair<std::string, int>;  // config name, expected exit code

class ConfigExit : public ::testing::TestWithParam<Case> {};

TEST_P(ConfigExit, ShippedConfigHasExpectedExitCode) {
  const auto [name, code] = GetParam();
  const fs::path out = scratch(name);
  EXPECT_EQ(run_config(name, out), code) << slurp(out / "stderr.txt");
  if (code <= 1) {
    const json j = json::parse(slurp(out / "report.json"));
    EXPECT_EQ(j.at("pass").get<bool>(), code == 0);
    EXPECT_FALSE(j.at("suites").empty());
    EXPECT_TRUE(fs::exists(out / "report.md"));
  }
}

INSTANTIATE_TEST_SUITE_P(
    Shipped, ConfigExit,
    ::testing::Values(Case{"double_su2", 0}, Case{"double_twisted", 0}, Case{"fused_double", 0},
                      Case{"generalized_double", 0}, Case{"fixed_locus_z2", 0}, Case{"surface_genus1", 0},
                      Case{"loop_m3", 0}, Case{"loop_twisted", 0}, Case{"cover_annulus_s3", 0},
                      Case{"cover_torus_z3", 0}, Case{"finite_double_s3", 0}, Case{"control_degenerate", 1},
                      Case{"control_nonequivariant_mu", 1}, Case{"control_cartan_normalization", 1},
                      Case{"invalid_negative_N", 2}, Case{"guard_exceeded", 3}),
    [](const auto& info) { return info.param.first; });

TEST(Cli, FailureNamesTheCheck) {
  const fs::path out = scratch("fail_message");
  ASSERT_EQ(run_config("control_degenerate", out), 1);
  const std::string err = slurp(out / "stderr.txt");
  EXPECT_NE(err.find("failed check 'qh3'"), std::string::npos) << err;
  EXPECT_NE(err.find("at sample"), std::string::npos);
}

TEST(Cli, ConfigErrorNamesTheField) {
  const fs::path out = scratch("config_message");
  ASSERT_EQ(run_config("invalid_negative_N", out), 2);
  EXPECT_NE(slurp(out / "stderr.txt").find("construction.N"), std::string::npos);
}

TEST(Cli, ReportsAreDeterministicAcrossThreadCounts) {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const std::string cfg = "run '" + (kSource / "configs" / "fused_double.json").string() + "'";
  ASSERT_EQ(tool(cfg, a, "QHAM_THREADS=1"), 0);
  ASSERT_EQ(tool(cfg, b, "QHAM_THREADS=8"), 0);
  EXPECT_EQ(slurp(a / "report.json"), slurp(b / "report.json"));
  EXPECT_EQ(slurp(a / "report.md"), slurp(b / "report.md"));
}

TEST(Cli, SeedAndSampleOverrides) {
  const fs::path out = scratch("override");
  ASSERT_EQ(run_config("double_su2", out, "--seed 9 --samples 5"), 0);
  const json j = json::parse(slurp(out / "report.json"));
  EXPECT_EQ(j["config"]["seed"], 9);
  EXPECT_EQ(j["config"]["samples"], 5);
  for (const auto& s : j["suites"]) EXPECT_EQ(s["seed"], 9);
}

TEST(Cli, BadArgumentsAreConfigErrors) {
  const fs::path out = scratch("badargs");
  EXPECT_EQ(tool("run", out), 2);
  EXPECT_EQ(tool("run /nonexistent.json", out), 2);
  EXPECT_EQ(tool("frobnicate x", out), 2);
}

TEST(Cli, EnumerateWritesCounts) {
  const fs::path out = scratch("enumerate");
  ASSERT_EQ(tool("enumerate '" + (kSource / "configs" / "cover_annulus_s3.json").string() + "'", out), 0);
  const json j = json::parse(slurp(out / "enumeration.json"));
  EXPECT_EQ(j["hom_X"], 1296);
  EXPECT_EQ(j["hom_X_gamma"], 36);
  EXPECT_EQ(j["hom_mon"], 36);
  EXPECT_TRUE(j["bijection"].get<bool>());
  EXPECT_NE(slurp(out / "enumeration.csv").find("hom_mon,36"), std::string::npos);
}

TEST(Config, UnknownSuiteRejected) {
  const std::string msg =
      config_error(R"({"group": {"kind": "su", "n": 2}, "construction": {"type": "double"}, "suites": ["qh9"]})");
  EXPECT_NE(msg.find("suites"), std::string::npos) << msg;
}

TEST(Config, FieldErrors) {
  EXPECT_NE(config_error(R"({"construction": {"type": "double"}})").find("group"), std::string::npos);
  EXPECT_NE(config_error(R"({"group": {"kind": "su", "n": 2}, "construction": {"type": "loop", "m": 2, "N": 7}})"),
            "");
  EXPECT_NE(config_error(R"({"group": {"kind": "su", "n": 2}, "construction": {"type": "hexagon"}})")
                .find("construction.type"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"group": {"kind": "su", "n": 2}, "gamma": {"order": 2, "automorphism": "conjugation"},
                             "construction": {"type": "generalized_double", "m_inf": 1, "m0": 1}})"),
            "");
}

TEST(Config, SuitesExpandForGammaDoubles) {
  const auto c = parse(R"({"group": {"kind": "su", "n": 2}, "gamma": {"order": 2, "automorphism": "conjugation"},
                           "construction": {"type": "double"}, "suites": "all"})");
  const auto allowed = cli::allowed_suites(c);
  EXPECT_NE(std::find(allowed.begin(), allowed.end(), "fusion_fixed_iso"), allowed.end());
  EXPECT_NE(std::find(allowed.begin(), allowed.end(), "qh1"), allowed.end());
  EXPECT_TRUE(std::is_sorted(c.suites.begin(), c.suites.end()));
}

TEST(Config, InProcessRunMatchesMarkdown) {
  auto c = parse(R"({"group": {"kind": "su", "n": 2}, "construction": {"type": "double"},
                     "suites": ["qh1", "qh2"], "samples": 4, "seed": 2})");
  const auto b = cli::run(c, 2);
  ASSERT_EQ(b.reports.size(), 2u);
  EXPECT_TRUE(b.pass);
  const std::string md = cli::to_markdown(b);
  EXPECT_NE(md.find("| qh1 |"), std::string::npos);
  EXPECT_NE(md.find("**PASS**"), std::string::npos);
  EXPECT_EQ(cli::to_json(b)["suites"].size(), 2u);
}
