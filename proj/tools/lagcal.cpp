// Command-line scenario runner.
//
//   lagcal run   --config scenario.json [--out DIR] [--resolution N] [--tol name=value]... [--seed S]
//   lagcal suite --manifest suite.json  [--out DIR] [--parallel P] [--resolution N] [--tol ...] [--seed S]
//   lagcal models
//
// Exit status: 0 when every verdict passes, 1 when a verdict fails or a
// scenario throws, 2 on configuration errors.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lagcal/scenario.hpp"

namespace {

lagcal::Overrides make_overrides(const std::vector<std::string>& tols, int resolution, long long seed) {
  lagcal::Overrides ov;
  if (resolution > 0) ov.resolution = resolution;
  if (seed >= 0) ov.seed = static_cast<std::uint64_t>(seed);
  for (const auto& t : tols) {
    const auto eq = t.find('=');
    if (eq == std::string::npos || eq == 0) throw lagcal::ConfigError("--tol expects name=value, got '" + t + "'");
    try {
      ov.tolerances[t.substr(0, eq)] = std::stod(t.substr(eq + 1));
    } catch (const std::exception&) {
      throw lagcal::ConfigError("--tol value is not a number: '" + t + "'");
    }
  }
  return ov;
}

void print_report(const lagcal::ScenarioReport& r) {
  std::printf("%s [%s]: %s (%.3f s)\n", r.config.name.c_str(), lagcal::verb_name(r.config.verb).c_str(),
              r.pass() ? "PASS" : "FAIL", r.seconds);
  for (const auto& [name, v] : r.verdicts)
    std::printf("  %-24s %-4s %.6g %s %.3g\n", name.c_str(), v.pass ? "ok" : "FAIL", v.residual,
                v.tolerance.at_least ? ">=" : "<=", v.tolerance.limit);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lagrangian path functional verification scenarios"};
  app.require_subcommand(1);

  std::string config, manifest, out = "out";
  std::vector<std::string> tols;
  int resolution = 0, parallel = 1;
  long long seed = -1;

  auto* run = app.add_subcommand("run", "Run one scenario config");
  run->add_option("-c,--config", config, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  auto* suite = app.add_subcommand("suite", "Run every scenario in a manifest");
  suite->add_option("-m,--manifest", manifest, "Manifest JSON file")->required()->check(CLI::ExistingFile);
  suite->add_option("-p,--parallel", parallel, "Concurrent scenarios")->check(CLI::PositiveNumber);
  for (auto* cmd : {run, suite}) {
    cmd->add_option("-o,--out", out, "Output root directory");
    cmd->add_option("-n,--resolution", resolution, "Grid resolution override")->check(CLI::PositiveNumber);
    cmd->add_option("-t,--tol", tols, "Tolerance override name=value (repeatable)");
    cmd->add_option("-s,--seed", seed, "Random seed override")->check(CLI::NonNegativeNumber);
  }
  app.add_subcommand("models", "List catalog models");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("models")) {
      for (const auto& name : lagcal::catalog_names()) {
        const auto m = lagcal::catalog_model(name);
        std::printf("%-12s dim %d  %s%s%s\n", name.c_str(), m.dim,
                    m.chart == lagcal::ChartKind::Torus ? "torus" : "euclidean", m.holo_volume ? "  holomorphic" : "",
                    m.liouville_primitive ? "  liouville" : "");
      }
      return 0;
    }
    const auto ov = make_overrides(tols, resolution, seed);
    if (*run) {
      const auto cfg = lagcal::load_config(config, ov);
      const auto dir = lagcal::output_dir(cfg, out);
      const auto report = lagcal::run_scenario(cfg);
      lagcal::write_report(report, dir);
      print_report(report);
      return report.pass() ? 0 : 1;
    }
    const auto cfgs = lagcal::load_manifest(manifest, ov);
    const auto results = lagcal::run_suite(cfgs, out, parallel);
    for (const auto& r : results) {
      std::printf("%-28s %-15s %s", r.name.c_str(), r.verb.c_str(), r.pass ? "PASS" : "FAIL");
      if (!r.error.empty()) std::printf("  (%s)", r.error.c_str());
      std::printf("\n");
    }
    std::filesystem::create_directories(out);
    std::ofstream(std::filesystem::path(out) / "suite.json") << lagcal::suite_json(results).dump(2) << "\n";
    const bool ok = lagcal::suite_passes(results);
    std::printf("suite: %s\n", ok ? "PASS" : "FAIL");
    return ok ? 0 : 1;
  } catch (const lagcal::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const lagcal::ParseError& e) {
    std::fprintf(stderr, "expression error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
