// SPDX-License-Identifier: Apache-2.0
#include "slicekit/baselines/train.hpp"

#include <optional>

#include "slicekit/errors.hpp"
#include "slicekit/metrics.hpp"
#include "slicekit/rng.hpp"

namespace slicekit::baselines {

namespace {

void check(const MethodContext& ctx) {
  if (ctx.dataset == nullptr || ctx.lambda == nullptr || ctx.pretrained == nullptr) {
    throw TrainingError("method context is incomplete");
  }
  if (ctx.dataset->split.size() != ctx.dataset->size()) {
    throw TrainingError("dataset has no split tags");
  }
  if (ctx.lambda->rows() != ctx.dataset->size()) {
    throw ShapeError("slice matrix rows do not match the dataset");
  }
}

Batch train_batch(const MethodContext& ctx) {
  return train::make_batch(*ctx.dataset, *ctx.lambda, data::Split::kTrain);
}

train::ValidData valid_data(const MethodContext& ctx) {
  return train::make_valid(*ctx.dataset, data::Split::kValid);
}

Batch rows_where(const Batch& all, std::size_t column) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < all.size(); ++i)
    if (all.lambda(i, column) != 0.0) rows.push_back(i);
  Batch b;
  b.x = data::gather_rows(all.x, rows);
  b.y = data::gather_rows(all.y, rows);
  b.lambda = data::gather_rows(all.lambda, rows);
  return b;
}

}  // namespace

Trained<VanillaModel> train_vanilla(const MethodContext& ctx) {
  check(ctx);
  VanillaModel model(ctx.backbone, derive_seed(ctx.hp.seed, "vanilla"));
  auto rec = train::finetune(model, *ctx.pretrained, train_batch(ctx), valid_data(ctx), ctx.hp);
  return {std::move(model), std::move(rec)};
}

Trained<sram::SramModel> train_sbl(const MethodContext& ctx, const sram::SramConfig& config) {
  check(ctx);
  if (config.k != ctx.lambda->k()) throw ConfigError("sbl: k does not match the slice matrix");
  sram::SramModel model(ctx.backbone, config, derive_seed(ctx.hp.seed, "sbl"));
  auto rec = train::finetune(model, *ctx.pretrained, train_batch(ctx), valid_data(ctx), ctx.hp);
  return {std::move(model), std::move(rec)};
}

Trained<HpsModel> train_hps(const MethodContext& ctx, std::vector<double> alphas) {
  check(ctx);
  const std::size_t k = ctx.lambda->k();
  HpsModel model(ctx.backbone, k, derive_seed(ctx.hp.seed, "hps"),
                 alphas.empty() ? "hps" : "manual");
  if (!alphas.empty()) model.set_alphas(std::move(alphas));
  auto rec = train::finetune(model, *ctx.pretrained, train_batch(ctx), valid_data(ctx), ctx.hp);
  return {std::move(model), std::move(rec)};
}

std::vector<std::size_t> underperforming_slices(const MethodContext& ctx,
                                                const VanillaModel& vanilla, double gap) {
  check(ctx);
  const auto idx = ctx.dataset->indices(data::Split::kValid);
  const auto valid = valid_data(ctx);
  const auto preds = vanilla.predict(valid.X);
  const double overall = metrics::f1(preds, valid.y);
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s < ctx.lambda->k(); ++s) {
    std::vector<int> p;
    std::vector<int> l;
    for (std::size_t r = 0; r < idx.size(); ++r) {
      if (!ctx.lambda->lambda(idx[r], s)) continue;
      p.push_back(preds[r]);
      l.push_back(valid.y[r]);
    }
    if (p.empty()) continue;
    if (overall - metrics::f1(p, l) >= gap) out.push_back(s);
  }
  return out;
}

ManualResult train_manual(const MethodContext& ctx, const VanillaModel& vanilla,
                          const ManualOptions& options) {
  check(ctx);
  if (options.alphas.empty()) throw ConfigError("manual: alpha grid is empty");
  ManualResult result{train_hps(ctx), {}, {}, false};
  const std::size_t k = ctx.lambda->k();
  result.underperforming = underperforming_slices(ctx, vanilla, options.trigger_gap);
  result.chosen_alphas.assign(k, 1.0);
  if (result.underperforming.empty()) return result;

  result.triggered = true;
  std::optional<Trained<HpsModel>> best;
  for (std::size_t s : result.underperforming) {
    double best_alpha = options.alphas.front();
    double best_f1 = -1.0;
    for (double alpha : options.alphas) {
      auto alphas = result.chosen_alphas;
      alphas[s] = alpha;
      auto candidate = train_hps(ctx, alphas);
      if (candidate.record.selected_valid_f1 > best_f1) {
        best_f1 = candidate.record.selected_valid_f1;
        best_alpha = alpha;
        best.emplace(std::move(candidate));
      }
    }
    result.chosen_alphas[s] = best_alpha;
  }
  // `best` was trained with the final alpha vector: the last slice's winner
  // saw every earlier choice.
  result.trained = std::move(*best);
  return result;
}

Trained<MoeModel> train_moe(const MethodContext& ctx) {
  check(ctx);
  const Batch all = train_batch(ctx);
  const auto valid = valid_data(ctx);
  const auto valid_idx = ctx.dataset->indices(data::Split::kValid);
  const std::size_t slots = ctx.lambda->k() + 1;

  std::vector<VanillaModel> experts;
  for (std::size_t s = 0; s < slots; ++s) {
    const Batch subset = rows_where(all, s);
    if (subset.size() == 0) {
      throw TrainingError("moe: slice '" + ctx.lambda->names[s] + "' has no training examples");
    }
    train::ValidData v;
    for (std::size_t r = 0; r < valid_idx.size(); ++r) {
      if (!ctx.lambda->lambda(valid_idx[r], s)) continue;
      v.y.push_back(valid.y[r]);
    }
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < valid_idx.size(); ++r)
      if (ctx.lambda->lambda(valid_idx[r], s)) rows.push_back(r);
    v.X = data::gather_rows(valid.X, rows);
    if (v.y.empty()) v = valid;

    VanillaModel expert(ctx.backbone, derive_seed(ctx.hp.seed, "moe-expert", s),
                        "moe.expert." + std::to_string(s));
    train::finetune(expert, *ctx.pretrained, subset, v, ctx.hp);
    experts.push_back(std::move(expert));
  }

  MoeModel model(std::move(experts), ctx.backbone, derive_seed(ctx.hp.seed, "moe-gate"));
  auto rec = train::fit(model, all, valid, ctx.hp, ctx.hp.finetune_epochs);
  rec.backbone_checksum = nn::checksum(*ctx.pretrained, "backbone.");
  return {std::move(model), std::move(rec)};
}

VoteMatrix slice_votes_from_rule(const data::Dataset& dataset, const slicing::SliceMatrix& lambda) {
  const std::size_t k = lambda.k();
  VoteMatrix votes(dataset.size(), std::vector<int>(k + 1, kAbstain));
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const int base = data::linear_label(dataset.X(i, 0), dataset.X(i, 1));
    for (std::size_t s = 0; s < k; ++s)
      if (lambda.lambda(i, s)) votes[i][s] = 1 - base;
    votes[i][k] = base;
  }
  return votes;
}

DpResult train_dp_baseline(const MethodContext& ctx, const VoteMatrix& votes,
                           const LabelModelOptions& options) {
  check(ctx);
  if (votes.size() != ctx.dataset->size()) throw ShapeError("dp: vote rows do not match dataset");
  const auto train_idx = ctx.dataset->indices(data::Split::kTrain);
  VoteMatrix train_votes;
  train_votes.reserve(train_idx.size());
  for (std::size_t i : train_idx) train_votes.push_back(votes[i]);

  DpResult result{{VanillaModel(ctx.backbone, derive_seed(ctx.hp.seed, "dp"), "dp"), {}}, {}};
  result.label_model = fit_label_model(train_votes, options);
  Batch batch = train_batch(ctx);
  const auto soft = posteriors(result.label_model, train_votes);
  for (std::size_t r = 0; r < soft.size(); ++r) batch.y(r, 0) = soft[r];
  result.trained.record =
      train::finetune(result.trained.model, *ctx.pretrained, batch, valid_data(ctx), ctx.hp);
  return result;
}

}  // namespace slicekit::baselines
