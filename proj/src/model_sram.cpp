// SPDX-License-Identifier: Apache-2.0
#include "slicekit/model_sram.hpp"

#include <algorithm>
#include <string>

#include "slicekit/errors.hpp"

namespace slicekit::sram {

using num::Tape;
using num::Tensor2;
using num::Var;

std::string_view to_string(ReweightingMode mode) {
  switch (mode) {
    case ReweightingMode::kFull: return "full";
    case ReweightingMode::kUniform: return "uniform";
    case ReweightingMode::kIndicatorOnly: return "indicator_only";
    case ReweightingMode::kConfidenceOnly: return "confidence_only";
  }
  return "full";
}

ReweightingMode parse_mode(std::string_view s) {
  if (s == "full") return ReweightingMode::kFull;
  if (s == "uniform") return ReweightingMode::kUniform;
  if (s == "indicator_only") return ReweightingMode::kIndicatorOnly;
  if (s == "confidence_only") return ReweightingMode::kConfidenceOnly;
  throw ConfigError("unknown reweighting mode '" + std::string(s) + "'");
}

SramModel::SramModel(const nn::BackboneConfig& backbone, const SramConfig& config,
                     std::uint64_t seed)
    : config_(config) {
  if (config.c != 1) throw ConfigError("only binary heads (c = 1) are supported");
  if (config.d_prime == 0) throw ConfigError("expert representation size must be positive");
  Rng rng(derive_seed(seed, "init-sbl"));
  backbone_ = nn::Backbone::build(params_, "backbone", backbone, rng);
  const std::size_t d = backbone.output_dim;
  const std::size_t slots = config.k + 1;
  indicator_ = nn::add_linear(params_, "sram.indicator", d, slots, rng);
  for (std::size_t i = 0; i < slots; ++i) {
    experts_.push_back(
        nn::add_linear(params_, "sram.expert." + std::to_string(i), d, config.d_prime, rng));
  }
  slice_head_ = nn::add_linear(params_, "sram.slice_head", config.d_prime, 1, rng);
  pred_head_ = nn::add_linear(params_, "sram.pred_head", config.d_prime, 1, rng);
}

SramModel::Graph SramModel::forward(Tape& tape, std::span<const Var> vars, Var x) const {
  if (tape.value(x).cols() != backbone_.config.input_dim) {
    throw ShapeError("sram forward: expected input dim " +
                     std::to_string(backbone_.config.input_dim) + ", got " +
                     std::to_string(tape.value(x).cols()));
  }
  const std::size_t slots = config_.k + 1;
  Graph g;
  g.z = backbone_.forward(tape, vars, x);
  g.Q = nn::apply_linear(tape, vars, indicator_, g.z);
  std::vector<Var> p_cols;
  for (std::size_t i = 0; i < slots; ++i) {
    g.reps.push_back(nn::apply_linear(tape, vars, experts_[i], g.z));
    p_cols.push_back(nn::apply_linear(tape, vars, slice_head_, g.reps.back()));
  }
  g.P = tape.concat_cols(p_cols);

  switch (config_.mode) {
    case ReweightingMode::kFull:
      g.attention = tape.softmax_rows(tape.add(g.Q, tape.abs(g.P)));
      break;
    case ReweightingMode::kIndicatorOnly:
      g.attention = tape.softmax_rows(g.Q);
      break;
    case ReweightingMode::kConfidenceOnly:
      g.attention = tape.softmax_rows(tape.abs(g.P));
      break;
    case ReweightingMode::kUniform:
      g.attention = tape.constant(
          Tensor2(tape.value(x).rows(), slots, 1.0 / static_cast<double>(slots)));
      break;
  }

  g.z_prime = tape.scale_rows(g.reps[0], tape.column(g.attention, 0));
  for (std::size_t i = 1; i < slots; ++i) {
    g.z_prime = tape.add(g.z_prime, tape.scale_rows(g.reps[i], tape.column(g.attention, i)));
  }
  g.base_logit = nn::apply_linear(tape, vars, pred_head_, g.z_prime);
  return g;
}

SramModel::LossTerms SramModel::losses(Tape& tape, std::span<const Var> vars,
                                       const Batch& batch) const {
  const std::size_t n = batch.size();
  const std::size_t slots = config_.k + 1;
  if (batch.lambda.cols() != slots || batch.lambda.rows() != n) {
    throw ShapeError("sram losses: slice matrix must be n x " + std::to_string(slots));
  }
  const Graph g = forward(tape, vars, tape.constant(batch.x));
  const double inv_n = 1.0 / static_cast<double>(n);

  LossTerms t;
  t.base = tape.bce_with_logits(g.base_logit, batch.y, Tensor2(n, 1, inv_n));
  t.ind = tape.bce_with_logits(g.Q, batch.lambda, Tensor2(n, slots, inv_n));

  Tensor2 y_wide(n, slots);
  Tensor2 pred_w(n, slots);
  std::vector<double> denom(slots, static_cast<double>(n));
  if (config_.renormalize_pred) {
    for (std::size_t j = 0; j < slots; ++j) {
      double members = 0.0;
      for (std::size_t i = 0; i < n; ++i) members += batch.lambda(i, j);
      denom[j] = std::max(members, 1.0);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < slots; ++j) {
      y_wide(i, j) = batch.y(i, 0);
      pred_w(i, j) = batch.lambda(i, j) / denom[j];
    }
  }
  t.pred = tape.bce_with_logits(g.P, y_wide, pred_w);
  t.total = tape.add(tape.add(t.base, t.ind), t.pred);
  return t;
}

Var SramModel::batch_loss(Tape& tape, std::span<const Var> vars, const Batch& batch) const {
  return losses(tape, vars, batch).total;
}

std::vector<double> SramModel::predict_proba(const Tensor2& X) const {
  Tape tape;
  const auto vars = params_.bind_constant(tape);
  const Graph g = forward(tape, vars, tape.constant(X));
  std::vector<double> out(X.rows());
  const Tensor2& logits = tape.value(g.base_logit);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = num::sigmoid(logits(i, 0));
  return out;
}

ForwardTrace SramModel::forward(std::span<const double> x) const {
  Tape tape;
  const auto vars = params_.bind_constant(tape);
  const Graph g =
      forward(tape, vars, tape.constant(Tensor2(1, x.size(), std::vector<double>(x.begin(), x.end()))));
  const std::size_t slots = config_.k + 1;
  ForwardTrace t;
  auto row0 = [&](Var v) {
    auto r = tape.value(v).row(0);
    return std::vector<double>(r.begin(), r.end());
  };
  t.z = row0(g.z);
  t.Q = row0(g.Q);
  t.P = row0(g.P);
  t.a = row0(g.attention);
  t.z_prime = row0(g.z_prime);
  t.base_logit = tape.value(g.base_logit)(0, 0);
  t.R = Tensor2(config_.d_prime, slots);
  for (std::size_t i = 0; i < slots; ++i) {
    auto r = tape.value(g.reps[i]).row(0);
    for (std::size_t j = 0; j < config_.d_prime; ++j) t.R(j, i) = r[j];
  }
  return t;
}

Prediction SramModel::predict_one(std::span<const double> x) const {
  const ForwardTrace t = forward(x);
  Prediction p;
  p.probability = num::sigmoid(t.base_logit);
  p.label = p.probability > 0.5 ? 1 : 0;
  return p;
}

Tensor2 SramModel::indicator_probs(const Tensor2& X) const {
  Tape tape;
  const auto vars = params_.bind_constant(tape);
  const Graph g = forward(tape, vars, tape.constant(X));
  Tensor2 out = tape.value(g.Q);
  for (double& v : out.data()) v = num::sigmoid(v);
  return out;
}

double loss_ind(const ForwardTrace& trace, std::span<const double> lambda_row) {
  if (lambda_row.size() != trace.Q.size()) throw ShapeError("loss_ind: lambda length mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < trace.Q.size(); ++i)
    total += num::bce_with_logits(trace.Q[i], lambda_row[i]);
  return total;
}

double loss_pred(const ForwardTrace& trace, std::span<const double> lambda_row, double y) {
  if (lambda_row.size() != trace.P.size()) throw ShapeError("loss_pred: lambda length mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < trace.P.size(); ++i) {
    if (lambda_row[i] == 0.0) continue;
    total += lambda_row[i] * num::bce_with_logits(trace.P[i], y);
  }
  return total;
}

double loss_base(const ForwardTrace& trace, double y) {
  return num::bce_with_logits(trace.base_logit, y);
}

double loss_train(const ForwardTrace& trace, std::span<const double> lambda_row, double y) {
  return loss_base(trace, y) + loss_ind(trace, lambda_row) + loss_pred(trace, lambda_row, y);
}

}  // namespace slicekit::sram
