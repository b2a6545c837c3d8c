// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "slicekit/datasets.hpp"
#include "slicekit/model.hpp"
#include "slicekit/params.hpp"
#include "slicekit/slicing.hpp"

namespace slicekit::train {

enum class OptimizerKind : std::uint8_t { kAdam, kSgd };

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view s);

struct Hyperparams {
  double lr = 1e-3;
  double l2 = 0.0;
  std::size_t batch_size = 64;
  std::size_t pretrain_epochs = 200;
  std::size_t finetune_epochs = 100;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  std::uint64_t seed = 0;
};

/// Throws TrainingError unless lr > 0, l2 >= 0, epochs >= 1, batch_size >= 1.
void validate(const Hyperparams& hp);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double valid_f1 = 0.0;
};

struct RunRecord {
  std::string method;
  std::vector<EpochRecord> epochs;
  std::size_t selected_epoch = 0;
  double selected_valid_f1 = 0.0;
  double wall_time_s = 0.0;
  std::uint64_t backbone_checksum = 0;  // initial backbone weights; 0 if not set
};

/// One JSON object per epoch followed by a summary object.
void write_jsonl(const RunRecord& record, std::ostream& out);

struct ValidData {
  num::Tensor2 X;
  std::vector<int> y;
};

/// Training rows of a split dataset, with the matching slice-matrix rows.
Batch make_batch(const data::Dataset& dataset, const slicing::SliceMatrix& lambda,
                 data::Split split);
ValidData make_valid(const data::Dataset& dataset, data::Split split = data::Split::kValid);

/// Minibatch optimization for `epochs` epochs. After every epoch the model is
/// scored on `valid` (overall F1); the best epoch's parameters (earliest on
/// ties) are restored before returning. L2 applies to non-bias parameters.
/// Throws DivergenceError when the loss becomes non-finite.
RunRecord fit(Model& model, const Batch& train, const ValidData& valid, const Hyperparams& hp,
              std::size_t epochs);

/// Loss plus the L2 penalty l2 * sum(w^2) over non-bias parameters.
double regularized_loss(const Model& model, const Batch& batch, double l2);

struct GridCell {
  double lr = 0.0;
  double l2 = 0.0;
  double valid_f1 = 0.0;
};

struct Grid {
  std::vector<double> lr{1e-3, 3e-3, 1e-2};
  std::vector<double> l2{0.0, 1e-4, 1e-3};
};

struct Pretrained {
  nn::ParamSet backbone;  // only backbone.* tensors
  Hyperparams best;
  double best_valid_f1 = 0.0;
  std::vector<GridCell> cells;
};

/// Grid search of a Vanilla model over (lr, l2) for hp.pretrain_epochs each,
/// scored by validation overall F1 (first cell wins ties).
Pretrained pretrain_backbone(const Batch& train, const ValidData& valid,
                             const nn::BackboneConfig& backbone, const Grid& grid,
                             const Hyperparams& base);

/// Loads the pretrained backbone into `model`, then trains for
/// hp.finetune_epochs. Method-specific heads keep their fresh initialization.
RunRecord finetune(Model& model, const nn::ParamSet& backbone, const Batch& train,
                   const ValidData& valid, const Hyperparams& hp);

/// Worker count from SLICEKIT_THREADS, defaulting to the hardware concurrency.
std::size_t worker_count();

/// Runs fn(0..count-1) on a bounded pool; rethrows the first failure.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                  std::size_t workers = 0);

/// One pipeline per seed, identical except for the seed.
template <typename Result>
std::vector<Result> run_seeds(const std::vector<std::uint64_t>& seeds,
                              const std::function<Result(std::uint64_t)>& pipeline) {
  std::vector<Result> out(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t i) { out[i] = pipeline(seeds[i]); });
  return out;
}

}  // namespace slicekit::train
