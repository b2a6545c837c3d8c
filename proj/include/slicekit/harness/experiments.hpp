// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "slicekit/harness/config.hpp"
#include "slicekit/metrics.hpp"
#include "slicekit/training.hpp"

namespace slicekit::harness {

/// One trained method on one seed, scored on the test split.
struct CellResult {
  std::string method;   // vanilla, sbl, hps, manual, moe, dp, base
  std::string variant;  // mode, size or flip rate; empty when not swept
  std::uint64_t seed = 0;
  metrics::SliceReport test;
  train::RunRecord record;
  metrics::ParamCount params;
  std::optional<double> indicator_std;  // noise study only

  /// Directory/group label, e.g. "sbl", "sbl-uniform", "hps-d13".
  std::string label() const;
};

struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool at_least = true;  // value >= threshold, else value <= threshold
  bool pass = false;
};

struct Figure {
  std::string name;  // file name under figures/
  std::string svg;
};

struct ExperimentResult {
  Experiment experiment = Experiment::kOverview;
  std::vector<CellResult> cells;  // ordered by seed, then method
  std::vector<Figure> figures;
  std::vector<Check> checks;
  nlohmann::json summary;
};

/// Runs every seed of the configured experiment. Seeds run on a bounded
/// worker pool; each seed pretrains one backbone per backbone shape and
/// fine-tunes every method from it.
/// Throws DivergenceError when any run diverges.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Mean of a metric over the cells of one group label.
double group_mean(const ExperimentResult& result, const std::string& label,
                  double (*metric)(const CellResult&));
double overall_of(const CellResult& c);
double mean_slice_of(const CellResult& c);

/// One row per method x seed. Columns:
///   experiment,method,variant,seed,overall,s_1..s_k,mean_slice,params,
///   selected_epoch,indicator_std
std::string summary_csv(const ExperimentResult& result);

/// Writes {out}/{experiment}/{label}/{seed}/record.jsonl, summary.csv,
/// summary.json and figures/*.svg.
void write_outputs(const ExperimentResult& result, const std::string& out_dir);

bool all_pass(const ExperimentResult& result);

}  // namespace slicekit::harness
