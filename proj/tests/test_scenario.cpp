#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "lagcal/scenario.hpp"

using namespace lagcal;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = LAGCAL_SCENARIO_DIR;

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("lagcal_test_" + name);
  fs::remove_all(d);
  return d;
}

json flux_config() {
  return json{{"name", "flux_small"}, {"verb", "flux"}, {"model", "t2_cy"}, {"resolution", 32}, {"steps", 10},
              {"translation", {0.0, 0.3}}};
}

}  // namespace

TEST(Config, RejectsBadInputs) {
  json bad = flux_config();
  bad["verb"] = "integrate";
  EXPECT_THROW(parse_config(bad), ConfigError);

  bad = flux_config();
  bad["resolutoin"] = 64;
  EXPECT_THROW(parse_config(bad), ConfigError);

  bad = flux_config();
  bad["tolerances"] = {{"flux_vs_expected", -1.0}};
  EXPECT_THROW(parse_config(bad), ConfigError);

  bad = flux_config();
  bad["tolerances"] = {{"no_such_check", 1.0}};
  EXPECT_THROW(parse_config(bad), ConfigError);

  bad = flux_config();
  bad["model"] = "r2";
  EXPECT_THROW(parse_config(bad), ConfigError);

  bad = flux_config();
  bad["model"] = "no_such_model";
  EXPECT_THROW(parse_config(bad), ConfigError);
}

TEST(Config, MalformedExpressionFailsBeforeAnyOutput) {
  json cfg{{"name", "broken"}, {"verb", "cc"}, {"model", "t2_cy"}, {"hamiltonian", "sin(2*pi*x"}};
  const fs::path root = scratch_dir("broken");
  EXPECT_THROW(
      {
        const auto c = parse_config(cfg);
        run_suite({c}, root);
      },
      ParseError);
  EXPECT_FALSE(fs::exists(root));
}

TEST(Config, OverridesAreEchoed) {
  Overrides ov;
  ov.resolution = 16;
  ov.seed = 42;
  ov.tolerances["flux_vs_expected"] = 1e-3;
  const auto c = parse_config(flux_config(), {}, ov);
  EXPECT_EQ(c.resolution, 16);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.tolerances.at("flux_vs_expected").limit, 1e-3);
  EXPECT_EQ(c.source.at("resolution"), 16);
  EXPECT_EQ(c.source.at("tolerances").at("flux_vs_expected"), 1e-3);
}

TEST(Run, FluxTranslationReport) {
  const auto rep = run_scenario(parse_config(flux_config()));
  EXPECT_TRUE(rep.pass());
  EXPECT_NEAR(rep.values.at("flux_axis1"), 0.3, 1e-12);
  const json j = report_json(rep);
  EXPECT_EQ(j.at("verb"), "flux");
  EXPECT_EQ(j.at("verdicts").at("flux_vs_expected"), "pass");
  EXPECT_EQ(j.at("tolerances").at("flux_vs_expected").at("comparison"), "<=");
}

TEST(Run, ExactGraphScenario) {
  auto c = load_config(kScenarios / "exact_graph_r2.json");
  const auto rep = run_scenario(c);
  EXPECT_TRUE(rep.pass());
  EXPECT_NEAR(rep.values.at("cc"), 0.02, 1e-6);
  EXPECT_NEAR(rep.values.at("cc_exact"), 0.02, 1e-6);
}

TEST(Run, ReportIsDeterministic) {
  const auto c = load_config(kScenarios / "homotopy_t2.json", Overrides{32, std::nullopt, {}});
  const auto a = report_json(run_scenario(c)).dump();
  const auto b = report_json(run_scenario(c)).dump();
  EXPECT_EQ(a, b);
}

TEST(Run, MismatchedExpectationFails) {
  json cfg = flux_config();
  cfg["expected"] = {0.31};
  const auto rep = run_scenario(parse_config(cfg));
  EXPECT_FALSE(rep.pass());
  EXPECT_EQ(report_json(rep).at("verdicts").at("flux_vs_expected"), "fail");
}

TEST(Suite, EmptyManifestPasses) {
  const fs::path dir = scratch_dir("empty_manifest");
  fs::create_directories(dir);
  std::ofstream(dir / "m.json") << R"({"scenarios": []})";
  const auto configs = load_manifest(dir / "m.json");
  EXPECT_TRUE(configs.empty());
  const auto res = run_suite(configs, dir / "out");
  EXPECT_TRUE(suite_passes(res));
  EXPECT_TRUE(suite_json(res).at("pass").get<bool>());
}

TEST(Suite, DuplicateOutputDirectoriesAreRejected) {
  const auto c = parse_config(flux_config());
  EXPECT_THROW(run_suite({c, c}, scratch_dir("dup")), ConfigError);
}

TEST(Suite, ParallelMatchesSerial) {
  std::vector<ScenarioConfig> configs;
  for (int i = 0; i < 4; ++i) {
    json cfg = flux_config();
    cfg["name"] = "flux_" + std::to_string(i);
    cfg["translation"] = {0.0, 0.1 * (i + 1)};
    configs.push_back(parse_config(cfg));
  }
  const fs::path serial = scratch_dir("serial"), parallel = scratch_dir("parallel");
  const auto rs = run_suite(configs, serial, 1);
  const auto rp = run_suite(configs, parallel, 3);
  ASSERT_EQ(rs.size(), rp.size());
  for (std::size_t i = 0; i < rs.size(); ++i) {
    EXPECT_EQ(rs[i].name, rp[i].name);
    EXPECT_TRUE(rs[i].pass);
    EXPECT_TRUE(rp[i].pass);
    std::ifstream a(serial / rs[i].name / "report.json"), b(parallel / rp[i].name / "report.json");
    const std::string sa((std::istreambuf_iterator<char>(a)), {}), sb((std::istreambuf_iterator<char>(b)), {});
    EXPECT_FALSE(sa.empty());
    EXPECT_EQ(sa, sb);
    EXPECT_TRUE(fs::exists(serial / rs[i].name / "timing.json"));
  }
}

TEST(Suite, FailuresAreCapturedPerScenario) {
  json cfg{{"name", "degrading"}, {"verb", "cc"}, {"model", "t2n_cy"}, {"resolution", 8}, {"steps", 10},
           {"hamiltonian", "3*sin(4*pi*(x1+x2))*cos(6*pi*y2)"}};
  const auto configs = std::vector<ScenarioConfig>{parse_config(cfg), parse_config(flux_config())};
  const auto res = run_suite(configs, scratch_dir("capture"), 2);
  EXPECT_FALSE(res[0].pass);
  EXPECT_NE(res[0].error.find("degraded"), std::string::npos) << res[0].error;
  EXPECT_TRUE(res[1].pass);
  EXPECT_FALSE(suite_passes(res));
}

TEST(Suite, ShippedManifestLoads) {
  const auto configs = load_manifest(kScenarios / "suite.json");
  EXPECT_GE(configs.size(), 9u);
  std::set<std::string> verbs;
  for (const auto& c : configs) verbs.insert(verb_name(c.verb));
  EXPECT_EQ(verbs.size(), verb_table().size());
}
