// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "slicekit/baselines/label_model.hpp"
#include "slicekit/baselines/models.hpp"
#include "slicekit/datasets.hpp"
#include "slicekit/model_sram.hpp"
#include "slicekit/slicing.hpp"
#include "slicekit/training.hpp"

namespace slicekit::baselines {

/// Everything a fine-tuning method needs for one run. `dataset` must carry
/// split tags; `lambda` covers every row of it.
struct MethodContext {
  const data::Dataset* dataset = nullptr;
  const slicing::SliceMatrix* lambda = nullptr;
  nn::BackboneConfig backbone;
  const nn::ParamSet* pretrained = nullptr;
  train::Hyperparams hp;
};

template <typename M>
struct Trained {
  M model;
  train::RunRecord record;
};

Trained<VanillaModel> train_vanilla(const MethodContext& ctx);

Trained<sram::SramModel> train_sbl(const MethodContext& ctx, const sram::SramConfig& config);

/// HPS with per-slice loss multipliers (all 1 when empty).
Trained<HpsModel> train_hps(const MethodContext& ctx, std::vector<double> alphas = {});

struct ManualOptions {
  std::vector<double> alphas{2.0, 20.0, 50.0, 100.0};
  double trigger_gap = 5.0;
};

struct ManualResult {
  Trained<HpsModel> trained;
  std::vector<std::size_t> underperforming;  // SF columns that fired the trigger
  std::vector<double> chosen_alphas;         // per slice; 1 where not triggered
  bool triggered = false;
};

/// Slices whose SF-defined validation F1 under `vanilla` trails the overall
/// validation F1 by at least `gap`.
std::vector<std::size_t> underperforming_slices(const MethodContext& ctx,
                                                const VanillaModel& vanilla, double gap);

/// HPS whose slice-head losses are scaled by the best alpha, chosen on
/// validation overall F1, for each underperforming slice in turn.
ManualResult train_manual(const MethodContext& ctx, const VanillaModel& vanilla,
                          const ManualOptions& options = {});

/// Two stages: one Vanilla expert per SF subset (base expert on all rows),
/// then a gate on the raw features with the experts frozen.
/// Throws TrainingError naming any slice with no training members.
Trained<MoeModel> train_moe(const MethodContext& ctx);

/// Votes of the labeling functions derived from slicing functions. LF i votes
/// the in-slice class (the flipped linear rule) on SF members and abstains
/// elsewhere; the last LF votes the linear rule everywhere.
VoteMatrix slice_votes_from_rule(const data::Dataset& dataset, const slicing::SliceMatrix& lambda);

struct DpResult {
  Trained<VanillaModel> trained;
  LabelModelParams label_model;
};

/// Fits the label model on training-split votes only, then trains a Vanilla
/// model against its posteriors with soft-target BCE.
DpResult train_dp_baseline(const MethodContext& ctx, const VoteMatrix& votes,
                           const LabelModelOptions& options = {});

}  // namespace slicekit::baselines
