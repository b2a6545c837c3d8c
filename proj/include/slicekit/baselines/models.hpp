// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "slicekit/model.hpp"
#include "slicekit/params.hpp"

namespace slicekit::baselines {

/// Backbone plus one linear head; slice-unaware.
///   backbone.*, head.{weight,bias}
class VanillaModel final : public Model {
 public:
  VanillaModel(const nn::BackboneConfig& backbone, std::uint64_t seed,
               std::string name = "vanilla");

  std::string method() const override { return name_; }
  nn::ParamSet& params() override { return params_; }
  const nn::ParamSet& params() const override { return params_; }

  num::Var logits(num::Tape& tape, std::span<const num::Var> vars, num::Var x) const;
  num::Var batch_loss(num::Tape& tape, std::span<const num::Var> vars,
                      const Batch& batch) const override;
  std::vector<double> predict_proba(const num::Tensor2& X) const override;

  const nn::BackboneConfig& backbone_config() const { return backbone_.config; }

 private:
  std::string name_;
  nn::ParamSet params_;
  nn::Backbone backbone_;
  nn::LinearRef head_;
};

/// Hard parameter sharing: shared backbone with k slice heads and a base head
/// (column k). Slice head j is trained only on rows with lambda_j = 1, its loss
/// multiplied by alpha_j. Predictions come from the base head.
///   backbone.*, hps.heads.{weight,bias}  (d x (k+1))
class HpsModel final : public Model {
 public:
  HpsModel(const nn::BackboneConfig& backbone, std::size_t k, std::uint64_t seed,
           std::string name = "hps");

  std::string method() const override { return name_; }
  nn::ParamSet& params() override { return params_; }
  const nn::ParamSet& params() const override { return params_; }

  std::size_t k() const noexcept { return k_; }
  const std::vector<double>& alphas() const noexcept { return alphas_; }
  /// One multiplier per slice head (the base head always has weight 1).
  void set_alphas(std::vector<double> alphas);

  num::Var batch_loss(num::Tape& tape, std::span<const num::Var> vars,
                      const Batch& batch) const override;
  std::vector<double> predict_proba(const num::Tensor2& X) const override;

 private:
  std::string name_;
  std::size_t k_;
  std::vector<double> alphas_;
  nn::ParamSet params_;
  nn::Backbone backbone_;
  nn::LinearRef heads_;
};

/// Mixture of experts: k+1 frozen Vanilla experts (base expert last) combined
/// by a gate network on the raw features. params() holds only the gate:
///   gate.mlp.*, gate.out.{weight,bias}  (d x (k+1))
/// The final probability is sum_i softmax(gate)_i * P_expert_i(y = 1).
class MoeModel final : public Model {
 public:
  MoeModel(std::vector<VanillaModel> experts, const nn::BackboneConfig& gate_config,
           std::uint64_t seed);

  std::string method() const override { return "moe"; }
  nn::ParamSet& params() override { return gate_; }
  const nn::ParamSet& params() const override { return gate_; }

  std::size_t expert_count() const noexcept { return experts_.size(); }
  const VanillaModel& expert(std::size_t i) const { return experts_.at(i); }

  /// Softmax gate weights, n x (k+1).
  num::Var gate_weights(num::Tape& tape, std::span<const num::Var> vars, num::Var x) const;
  /// Expert probabilities as a constant n x (k+1) matrix.
  num::Tensor2 expert_probs(const num::Tensor2& X) const;

  num::Var batch_loss(num::Tape& tape, std::span<const num::Var> vars,
                      const Batch& batch) const override;
  std::vector<double> predict_proba(const num::Tensor2& X) const override;

  nn::ParamSet snapshot() const override;
  void restore(const nn::ParamSet& saved) override;

 private:
  std::vector<VanillaModel> experts_;
  nn::ParamSet gate_;
  nn::Backbone gate_mlp_;
  nn::LinearRef gate_out_;
};

}  // namespace slicekit::baselines
