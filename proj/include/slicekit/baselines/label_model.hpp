// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace slicekit::baselines {

/// Labeling-function output per example: class 0/1 or abstain.
inline constexpr int kAbstain = -1;

/// votes[i][j] is LF j's output on example i.
using VoteMatrix = std::vector<std::vector<int>>;

struct LabelModelOptions {
  double min_accuracy = 0.55;
  double max_accuracy = 0.99;
  /// Accuracy used when an LF shares no examples with any other LF.
  double default_accuracy = 0.7;
  /// Pairs need this many co-voting examples to contribute a moment.
  std::size_t min_overlap = 10;
  /// EM refinement rounds after the moment estimate; 0 disables it.
  std::size_t em_iterations = 0;
};

/// Feature-blind source model: one symmetric accuracy per LF and a class prior.
struct LabelModelParams {
  std::vector<double> accuracy;
  double class_prior = 0.5;
  std::string rule = "mom-pairwise";
};

/// Method-of-moments fit on pairwise agreement rates under conditional
/// independence. For +-1 votes, E[v_i v_j] = mu_i mu_j with mu = 2 acc - 1;
/// each mu_i is recovered from triplets as sqrt(m_ij m_il / m_jl), falling
/// back to sqrt(m_ij) when no triplet is available. Accuracies are clamped.
LabelModelParams fit_label_model(const VoteMatrix& votes, const LabelModelOptions& options = {});

/// P(y = 1 | votes) under the independence model. Abstains carry no evidence;
/// a row of abstains returns the class prior.
double posterior(const LabelModelParams& params, std::span<const int> votes);

std::vector<double> posteriors(const LabelModelParams& params, const VoteMatrix& votes);

}  // namespace slicekit::baselines
