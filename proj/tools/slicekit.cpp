// SPDX-License-Identifier: Apache-2.0
// slicekit <overview|ablate|scale|noise|compare|report> --config <path>
//          [--seeds N] [--out dir] [--set key=value]... [--check]
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "slicekit/errors.hpp"
#include "slicekit/harness/config.hpp"
#include "slicekit/harness/experiments.hpp"
#include "slicekit/harness/report.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kDivergence = 3;
constexpr int kRegression = 4;

using namespace slicekit;

int run(const std::string& command, const std::string& config_path, int seeds,
        const std::string& out, const std::vector<std::string>& overrides, bool check) {
  if (command == "report") {
    if (out.empty()) throw ConfigError("report needs --out <dir>");
    std::cout << harness::write_report(out);
    return kOk;
  }
  nlohmann::json doc = config_path.empty()
                           ? nlohmann::json{{"schema_version", harness::kSchemaVersion}}
                           : harness::read_config_file(config_path);
  if (!doc.contains("experiment")) doc["experiment"] = command;
  if (doc["experiment"] != command) {
    throw ConfigError("config is for '" + doc["experiment"].dump() + "', not '" + command + "'");
  }
  for (const auto& o : overrides) harness::apply_override(doc, o);
  if (seeds > 0) doc["seeds"] = seeds;
  if (!out.empty()) doc["out"] = out;
  const harness::ExperimentConfig config = harness::parse_config(doc);

  const harness::ExperimentResult result = harness::run_experiment(config);
  harness::write_outputs(result, config.out);
  std::cout << harness::render_table(
      {{"experiments", {{command, {{"groups", result.summary["groups"]},
                                   {"checks", result.summary["checks"]},
                                   {"seeds", config.seeds}}}}}});
  if (check && !harness::all_pass(result)) {
    std::cerr << "slicekit: acceptance checks failed\n";
    return kRegression;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Slice-based learning experiments"};
  std::string command;
  std::string config_path;
  std::string out;
  int seeds = 0;
  bool check = false;
  std::vector<std::string> overrides;
  app.add_option("command", command, "overview, ablate, scale, noise, compare or report")
      ->required()
      ->check(CLI::IsMember({"overview", "ablate", "scale", "noise", "compare", "report"}));
  app.add_option("--config", config_path, "Experiment config (JSON)");
  app.add_option("--seeds", seeds, "Run seeds 0..N-1")->check(CLI::PositiveNumber);
  app.add_option("--out", out, "Output directory");
  app.add_option("--set", overrides, "Override a config key, e.g. train.finetune_epochs=50");
  app.add_flag("--check", check, "Exit 4 when an acceptance threshold is missed");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    return run(command, config_path, seeds, out, overrides, check);
  } catch (const DivergenceError& e) {
    std::cerr << "slicekit: " << e.what() << "\n";
    return kDivergence;
  } catch (const ConfigError& e) {
    std::cerr << "slicekit: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "slicekit: " << e.what() << "\n";
    return 1;
  }
}
