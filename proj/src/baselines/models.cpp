// SPDX-License-Identifier: Apache-2.0
#include "slicekit/baselines/models.hpp"

#include "slicekit/errors.hpp"

namespace slicekit::baselines {

using num::Tape;
using num::Tensor2;
using num::Var;

VanillaModel::VanillaModel(const nn::BackboneConfig& backbone, std::uint64_t seed,
                           std::string name)
    : name_(std::move(name)) {
  Rng rng(derive_seed(seed, "init-vanilla"));
  backbone_ = nn::Backbone::build(params_, "backbone", backbone, rng);
  head_ = nn::add_linear(params_, "head", backbone.output_dim, 1, rng);
}

Var VanillaModel::logits(Tape& tape, std::span<const Var> vars, Var x) const {
  return nn::apply_linear(tape, vars, head_, backbone_.forward(tape, vars, x));
}

Var VanillaModel::batch_loss(Tape& tape, std::span<const Var> vars, const Batch& batch) const {
  const std::size_t n = batch.size();
  const Var out = logits(tape, vars, tape.constant(batch.x));
  return tape.bce_with_logits(out, batch.y, Tensor2(n, 1, 1.0 / static_cast<double>(n)));
}

std::vector<double> VanillaModel::predict_proba(const Tensor2& X) const {
  Tape tape;
  const auto vars = params_.bind_constant(tape);
  const Tensor2& out = tape.value(logits(tape, vars, tape.constant(X)));
  std::vector<double> probs(X.rows());
  for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = num::sigmoid(out(i, 0));
  return probs;
}

HpsModel::HpsModel(const nn::BackboneConfig& backbone, std::size_t k, std::uint64_t seed,
                   std::string name)
    : name_(std::move(name)), k_(k), alphas_(k, 1.0) {
  Rng rng(derive_seed(seed, "init-hps"));
  backbone_ = nn::Backbone::build(params_, "backbone", backbone, rng);
  heads_ = nn::add_linear(params_, "hps.heads", backbone.output_dim, k + 1, rng);
}

void HpsModel::set_alphas(std::vector<double> alphas) {
  if (alphas.size() != k_) throw ConfigError("hps: expected one loss multiplier per slice");
  alphas_ = std::move(alphas);
}

Var HpsModel::batch_loss(Tape& tape, std::span<const Var> vars, const Batch& batch) const {
  const std::size_t n = batch.size();
  const std::size_t slots = k_ + 1;
  if (batch.lambda.cols() != slots) throw ShapeError("hps: slice matrix width mismatch");
  const Var x = tape.constant(batch.x);
  const Var out = nn::apply_linear(tape, vars, heads_, backbone_.forward(tape, vars, x));
  Tensor2 targets(n, slots);
  Tensor2 weights(n, slots);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < slots; ++j) {
      targets(i, j) = batch.y(i, 0);
      const double alpha = j < k_ ? alphas_[j] : 1.0;
      weights(i, j) = alpha * batch.lambda(i, j) * inv_n;
    }
  }
  return tape.bce_with_logits(out, targets, weights);
}

std::vector<double> HpsModel::predict_proba(const Tensor2& X) const {
  Tape tape;
  const auto vars = params_.bind_constant(tape);
  const Var out =
      nn::apply_linear(tape, vars, heads_, backbone_.forward(tape, vars, tape.constant(X)));
  const Tensor2& v = tape.value(out);
  std::vector<double> probs(X.rows());
  for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = num::sigmoid(v(i, k_));
  return probs;
}

MoeModel::MoeModel(std::vector<VanillaModel> experts, const nn::BackboneConfig& gate_config,
                   std::uint64_t seed)
    : experts_(std::move(experts)) {
  if (experts_.empty()) throw ConfigError("moe: at least the base expert is required");
  Rng rng(derive_seed(seed, "init-gate"));
  gate_mlp_ = nn::Backbone::build(gate_, "gate.mlp", gate_config, rng);
  gate_out_ = nn::add_linear(gate_, "gate.out", gate_config.output_dim, experts_.size(), rng);
}

Var MoeModel::gate_weights(Tape& tape, std::span<const Var> vars, Var x) const {
  return tape.softmax_rows(
      nn::apply_linear(tape, vars, gate_out_, gate_mlp_.forward(tape, vars, x)));
}

Tensor2 MoeModel::expert_probs(const Tensor2& X) const {
  Tensor2 out(X.rows(), experts_.size());
  for (std::size_t e = 0; e < experts_.size(); ++e) {
    const auto p = experts_[e].predict_proba(X);
    for (std::size_t i = 0; i < p.size(); ++i) out(i, e) = p[i];
  }
  return out;
}

Var MoeModel::batch_loss(Tape& tape, std::span<const Var> vars, const Batch& batch) const {
  const std::size_t n = batch.size();
  const Var gates = gate_weights(tape, vars, tape.constant(batch.x));
  const Var experts = tape.constant(expert_probs(batch.x));
  const Var mix = tape.row_sum(tape.mul(gates, experts));
  return tape.bce_with_probs(mix, batch.y, Tensor2(n, 1, 1.0 / static_cast<double>(n)));
}

std::vector<double> MoeModel::predict_proba(const Tensor2& X) const {
  Tape tape;
  const auto vars = gate_.bind_constant(tape);
  const Var gates = gate_weights(tape, vars, tape.constant(X));
  const Var mix = tape.row_sum(tape.mul(gates, tape.constant(expert_probs(X))));
  const Tensor2& v = tape.value(mix);
  return std::vector<double>(v.data().begin(), v.data().end());
}

nn::ParamSet MoeModel::snapshot() const {
  nn::ParamSet out;
  for (std::size_t e = 0; e < experts_.size(); ++e) {
    for (const auto& p : experts_[e].params()) {
      out.add("expert." + std::to_string(e) + "." + p.name, p.value, p.is_bias);
    }
  }
  for (const auto& p : gate_) out.add(p.name, p.value, p.is_bias);
  return out;
}

void MoeModel::restore(const nn::ParamSet& saved) {
  for (std::size_t e = 0; e < experts_.size(); ++e) {
    const std::string prefix = "expert." + std::to_string(e) + ".";
    const std::size_t copied = experts_[e].params().copy_from(saved, prefix, "");
    if (copied != experts_[e].params().size()) {
      throw ConfigError("moe restore: incomplete parameters for expert " + std::to_string(e));
    }
  }
  const std::size_t copied = gate_.copy_from(saved, "gate.", "gate.");
  if (copied != gate_.size()) throw ConfigError("moe restore: incomplete gate parameters");
  if (saved.size() != snapshot().size()) throw ConfigError("moe restore: unexpected parameters");
}

}  // namespace slicekit::baselines
