// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slicekit/model.hpp"
#include "slicekit/params.hpp"

namespace slicekit::sram {

/// How the k+1 expert representations are weighted.
enum class ReweightingMode : std::uint8_t {
  kFull,            // Softmax(Q + abs(P))
  kUniform,         // 1 / (k+1)
  kIndicatorOnly,   // Softmax(Q)
  kConfidenceOnly,  // Softmax(abs(P))
};

std::string_view to_string(ReweightingMode mode);
ReweightingMode parse_mode(std::string_view s);

struct SramConfig {
  std::size_t k = 0;        // slices, excluding the base slice
  std::size_t d_prime = 13; // expert representation size
  std::size_t c = 1;        // output dim; binary only
  ReweightingMode mode = ReweightingMode::kFull;
  /// Divide each slice's prediction loss by its member count instead of the
  /// batch size.
  bool renormalize_pred = false;
};

/// Per-example view of one forward pass. Index k is the base slice.
struct ForwardTrace {
  std::vector<double> z;        // d
  std::vector<double> Q;        // k+1 indicator logits
  std::vector<double> P;        // k+1 slice prediction logits
  num::Tensor2 R;               // d' x (k+1), column i is r_i
  std::vector<double> a;        // k+1 attention weights
  std::vector<double> z_prime;  // d'
  double base_logit = 0.0;
};

struct Prediction {
  int label = 0;
  double probability = 0.0;
};

/// Backbone plus k+1 slice-residual attention modules and a prediction head.
///
/// Parameters:
///   backbone.*                     shared feature extractor f(x) -> z
///   sram.indicator.{weight,bias}   d x (k+1): q_i = z . w_i + b_i
///   sram.expert.{i}.{weight,bias}  d x d'   : r_i = z W_i + b_i
///   sram.slice_head.{weight,bias}  d' x 1   : p_i = g(r_i), shared
///   sram.pred_head.{weight,bias}   d' x 1   : h(z')
class SramModel final : public Model {
 public:
  struct Graph {
    num::Var z;
    num::Var Q;
    num::Var P;
    std::vector<num::Var> reps;
    num::Var attention;
    num::Var z_prime;
    num::Var base_logit;
  };
  struct LossTerms {
    num::Var base;
    num::Var ind;
    num::Var pred;
    num::Var total;
  };

  SramModel(const nn::BackboneConfig& backbone, const SramConfig& config, std::uint64_t seed);

  std::string method() const override { return "sbl"; }
  nn::ParamSet& params() override { return params_; }
  const nn::ParamSet& params() const override { return params_; }

  const nn::BackboneConfig& backbone_config() const { return backbone_.config; }
  const SramConfig& config() const { return config_; }
  void set_mode(ReweightingMode mode) { config_.mode = mode; }

  /// Batched forward; x is n x d_in.
  Graph forward(num::Tape& tape, std::span<const num::Var> vars, num::Var x) const;
  /// Batch-averaged loss terms; total = base + ind + pred.
  LossTerms losses(num::Tape& tape, std::span<const num::Var> vars, const Batch& batch) const;

  num::Var batch_loss(num::Tape& tape, std::span<const num::Var> vars,
                      const Batch& batch) const override;
  std::vector<double> predict_proba(const num::Tensor2& X) const override;

  ForwardTrace forward(std::span<const double> x) const;
  Prediction predict_one(std::span<const double> x) const;
  /// sigmoid(q_i) for every row, n x (k+1).
  num::Tensor2 indicator_probs(const num::Tensor2& X) const;

  std::size_t expert_weight_index(std::size_t slice) const { return experts_.at(slice).weight; }

 private:
  nn::ParamSet params_;
  nn::Backbone backbone_;
  SramConfig config_;
  nn::LinearRef indicator_;
  std::vector<nn::LinearRef> experts_;
  nn::LinearRef slice_head_;
  nn::LinearRef pred_head_;
};

// Per-example losses on a trace. lambda_row has k+1 entries, base last.
double loss_ind(const ForwardTrace& trace, std::span<const double> lambda_row);
double loss_pred(const ForwardTrace& trace, std::span<const double> lambda_row, double y);
double loss_base(const ForwardTrace& trace, double y);
double loss_train(const ForwardTrace& trace, std::span<const double> lambda_row, double y);

}  // namespace slicekit::sram
