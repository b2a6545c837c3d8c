// SPDX-License-Identifier: Apache-2.0
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "slicekit/errors.hpp"
#include "slicekit/harness/config.hpp"
#include "slicekit/harness/experiments.hpp"
#include "slicekit/harness/report.hpp"
#include "slicekit/harness/svg.hpp"

namespace slicekit::harness {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json tiny(const std::string& experiment) {
  return {{"schema_version", 1},
          {"experiment", experiment},
          {"dataset", {{"n", 1500}}},
          {"grid", {{"lr", {0.01}}, {"l2", {0.0}}}},
          {"train", {{"pretrain_epochs", 3}, {"finetune_epochs", 3}}},
          {"grid_resolution", 20},
          {"seeds", 2}};
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("slicekit_harness_" + name);
  fs::remove_all(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SLICEKIT_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Config, DefaultsFillMissingKeys) {
  const ExperimentConfig c = parse_config({{"schema_version", 1}, {"experiment", "compare"}});
  EXPECT_EQ(c.experiment, Experiment::kCompare);
  EXPECT_EQ(c.seeds.size(), 5u);
  EXPECT_EQ(c.hp.pretrain_epochs, 200u);
  EXPECT_EQ(c.hp.finetune_epochs, 100u);
  EXPECT_EQ(c.hp.batch_size, 64u);
  EXPECT_EQ(c.grid.lr, (std::vector<double>{1e-3, 3e-3, 1e-2}));
  EXPECT_EQ(c.d_prime, 13u);
}

TEST(Config, RoundTripsThroughJson) {
  const ExperimentConfig c = parse_config(tiny("noise"));
  const ExperimentConfig back = parse_config(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
}

TEST(Config, RejectsInvalidDocuments) {
  auto expect_error = [](json doc) { EXPECT_THROW(parse_config(doc), ConfigError) << doc.dump(); };
  json doc = tiny("overview");
  doc["schema_version"] = 2;
  expect_error(doc);
  doc = tiny("overview");
  doc["speling"] = 1;
  expect_error(doc);
  doc = tiny("overview");
  doc["seeds"] = json::array();
  expect_error(doc);
  doc = tiny("overview");
  doc["experiment"] = "everything";
  expect_error(doc);
  doc = tiny("overview");
  doc["methods"] = {"vanilla", "transformer"};
  expect_error(doc);
  doc = tiny("overview");
  doc["sfs"] = {{{"name", "far"}, {"kind", "noisy_truth"}, {"params", {{"slice", 7}}}}};
  expect_error(doc);
  doc = tiny("overview");
  doc["sfs"] = {{{"name", "d"}, {"kind", "disc"}, {"params", {{"cx", 0}}}}};
  expect_error(doc);
  doc = tiny("overview");
  doc["grid"]["lr"] = {-1.0};
  expect_error(doc);
  doc = tiny("noise");
  doc["methods"] = {"hps"};
  expect_error(doc);
}

TEST(Config, DotPathOverrides) {
  json doc = tiny("overview");
  apply_override(doc, "train.finetune_epochs=7");
  apply_override(doc, "grid.lr=[0.5,0.25]");
  apply_override(doc, "out=some/dir");
  apply_override(doc, "sram.renormalize_pred=true");
  const ExperimentConfig c = parse_config(doc);
  EXPECT_EQ(c.hp.finetune_epochs, 7u);
  EXPECT_EQ(c.grid.lr, (std::vector<double>{0.5, 0.25}));
  EXPECT_EQ(c.out, "some/dir");
  EXPECT_TRUE(c.renormalize_pred);
  EXPECT_THROW(apply_override(doc, "novalue"), ConfigError);
  EXPECT_THROW(apply_override(doc, "out.inner=1"), ConfigError);
}

TEST(Svg, GridPointsCoverSquareTopRowFirst) {
  const num::Tensor2 g = grid_points(4, 1.0);
  EXPECT_EQ(g.rows(), 16u);
  EXPECT_DOUBLE_EQ(g(0, 0), -0.75);
  EXPECT_DOUBLE_EQ(g(0, 1), 0.75);
  EXPECT_DOUBLE_EQ(g(15, 0), 0.75);
  EXPECT_DOUBLE_EQ(g(15, 1), -0.75);
}

TEST(Svg, DocumentsAreWellFormed) {
  const std::vector<int> classes{0, 0, 1, 1};
  const std::string svg = class_map_svg(classes, 2, 1.0, "a < b");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("a &lt; b"), std::string::npos);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_THROW(heatmap_svg(std::vector<double>{0.1}, 2, 1.0, "x"), ShapeError);
}

TEST(Experiments, CsvIsReproducible) {
  const ExperimentConfig c = parse_config(tiny("overview"));
  const ExperimentResult a = run_experiment(c);
  const ExperimentResult b = run_experiment(c);
  EXPECT_EQ(summary_csv(a), summary_csv(b));
  EXPECT_EQ(a.summary.dump(), b.summary.dump());
}

TEST(Experiments, OutputLayout) {
  ExperimentConfig c = parse_config(tiny("overview"));
  const fs::path dir = scratch_dir("layout");
  const ExperimentResult r = run_experiment(c);
  write_outputs(r, dir.string());
  for (const char* method : {"vanilla", "sbl"}) {
    for (const char* seed : {"0", "1"}) {
      EXPECT_TRUE(fs::exists(dir / "overview" / method / seed / "record.jsonl"));
    }
  }
  EXPECT_TRUE(fs::exists(dir / "overview" / "summary.csv"));
  EXPECT_TRUE(fs::exists(dir / "overview" / "summary.json"));
  EXPECT_TRUE(fs::exists(dir / "overview" / "figures" / "vanilla_boundary.svg"));
  EXPECT_TRUE(fs::exists(dir / "overview" / "figures" / "sbl_boundary.svg"));
  EXPECT_EQ(r.checks.size(), 2u);

  const json report = consolidate(dir.string());
  EXPECT_TRUE(report["experiments"].contains("overview"));
  const std::string table = write_report(dir.string());
  EXPECT_NE(table.find("sbl"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "report.json"));
  fs::remove_all(dir);
}

TEST(Experiments, NoiseRecordsDispersionPerRate) {
  json doc = tiny("noise");
  doc["seeds"] = 1;
  const ExperimentResult r = run_experiment(parse_config(doc));
  std::size_t with_std = 0;
  for (const auto& cell : r.cells) {
    if (cell.method == "sbl") {
      ASSERT_TRUE(cell.indicator_std.has_value());
      EXPECT_GE(*cell.indicator_std, 0.0);
      ++with_std;
    }
  }
  EXPECT_EQ(with_std, 3u);
  EXPECT_EQ(r.figures.size(), 3u);
  EXPECT_EQ(r.checks.size(), 2u);
}

TEST(Experiments, AblateRunsEveryMode) {
  json doc = tiny("ablate");
  doc["seeds"] = 1;
  const ExperimentResult r = run_experiment(parse_config(doc));
  ASSERT_EQ(r.cells.size(), 4u);
  EXPECT_EQ(r.cells[0].label(), "sbl-full");
  EXPECT_EQ(r.cells[0].test.slice_f1.size(), 4u);
  EXPECT_EQ(r.checks.size(), 3u);
}

TEST(Experiments, ScaleSweepsSizes) {
  json doc = tiny("scale");
  doc["seeds"] = 1;
  doc["sizes"] = {4, 13};
  doc["methods"] = {"vanilla", "sbl"};
  const ExperimentResult r = run_experiment(parse_config(doc));
  ASSERT_EQ(r.cells.size(), 4u);
  EXPECT_EQ(r.cells[0].label(), "vanilla-d4");
  EXPECT_EQ(r.cells[0].params.total, (2u * 4 + 4) + (4u * 4 + 4) + 5u);
  EXPECT_EQ(r.cells[3].label(), "sbl-d13");
  EXPECT_EQ(r.cells[3].params.total, 837u);
  EXPECT_EQ(r.figures.size(), 2u);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch_dir("cli");
  fs::create_directories(dir);
  const fs::path cfg = dir / "overview.json";
  std::ofstream(cfg) << tiny("overview").dump();
  const std::string base = "overview --config " + cfg.string() + " --out " + (dir / "out").string();

  EXPECT_EQ(run_cli(base + " --seeds 1"), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "overview" / "summary.csv"));
  EXPECT_EQ(run_cli(base + " --seeds 1 --check --set thresholds.slice_gain=1000"), 4);
  EXPECT_EQ(run_cli(base + " --seeds 1 --set schema_version=9"), 2);
  EXPECT_EQ(run_cli("overview --config " + (dir / "missing.json").string()), 2);
  EXPECT_EQ(run_cli(base + " --seeds 1 --set grid.lr=[1e300] --set train.optimizer=sgd"), 3);
  EXPECT_EQ(run_cli("report --out " + (dir / "out").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "report.txt"));
  fs::remove_all(dir);
}

}  // namespace
}  // namespace slicekit::harness
