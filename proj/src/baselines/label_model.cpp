// SPDX-License-Identifier: Apache-2.0
#include "slicekit/baselines/label_model.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "slicekit/errors.hpp"

namespace slicekit::baselines {

namespace {

int signed_vote(int v) { return v == kAbstain ? 0 : (v == 1 ? 1 : -1); }

}  // namespace

LabelModelParams fit_label_model(const VoteMatrix& votes, const LabelModelOptions& options) {
  LabelModelParams params;
  const std::size_t n = votes.size();
  const std::size_t m = n == 0 ? 0 : votes[0].size();
  for (const auto& row : votes) {
    if (row.size() != m) throw ShapeError("label model: ragged vote matrix");
    for (int v : row)
      if (v != 0 && v != 1 && v != kAbstain) throw DomainError("label model: invalid vote");
  }

  std::size_t positive = 0;
  std::size_t cast = 0;
  for (const auto& row : votes)
    for (int v : row)
      if (v != kAbstain) {
        ++cast;
        positive += v == 1;
      }
  params.class_prior = cast == 0 ? 0.5 : static_cast<double>(positive) / cast;
  params.class_prior = std::clamp(params.class_prior, 0.01, 0.99);

  // Pairwise second moments over co-voting examples.
  std::vector<std::vector<std::optional<double>>> moment(m, std::vector<std::optional<double>>(m));
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      std::size_t overlap = 0;
      double acc = 0.0;
      for (const auto& row : votes) {
        const int va = signed_vote(row[a]);
        const int vb = signed_vote(row[b]);
        if (va == 0 || vb == 0) continue;
        ++overlap;
        acc += va * vb;
      }
      if (overlap >= options.min_overlap) {
        moment[a][b] = moment[b][a] = acc / static_cast<double>(overlap);
      }
    }
  }

  params.accuracy.assign(m, options.default_accuracy);
  for (std::size_t i = 0; i < m; ++i) {
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t l = j + 1; l < m; ++l) {
        if (j == i || l == i) continue;
        if (!moment[i][j] || !moment[i][l] || !moment[j][l]) continue;
        if (std::fabs(*moment[j][l]) < 1e-12) continue;
        const double ratio = *moment[i][j] * *moment[i][l] / *moment[j][l];
        sum += std::sqrt(std::max(ratio, 0.0));
        ++used;
      }
    }
    if (used == 0) {
      for (std::size_t j = 0; j < m; ++j) {
        if (j == i || !moment[i][j]) continue;
        sum += std::sqrt(std::max(*moment[i][j], 0.0));
        ++used;
      }
    }
    if (used > 0) params.accuracy[i] = 0.5 * (1.0 + sum / static_cast<double>(used));
    params.accuracy[i] =
        std::clamp(params.accuracy[i], options.min_accuracy, options.max_accuracy);
  }

  for (std::size_t it = 0; it < options.em_iterations; ++it) {
    const auto post = posteriors(params, votes);
    for (std::size_t j = 0; j < m; ++j) {
      double agree = 0.0;
      std::size_t voted = 0;
      for (std::size_t r = 0; r < n; ++r) {
        const int v = votes[r][j];
        if (v == kAbstain) continue;
        ++voted;
        agree += v == 1 ? post[r] : 1.0 - post[r];
      }
      if (voted > 0) {
        params.accuracy[j] = std::clamp(agree / static_cast<double>(voted), options.min_accuracy,
                                        options.max_accuracy);
      }
    }
    params.rule = "mom-pairwise+em";
  }
  return params;
}

double posterior(const LabelModelParams& params, std::span<const int> votes) {
  if (votes.size() != params.accuracy.size()) throw ShapeError("posterior: vote length mismatch");
  double log_odds = std::log(params.class_prior / (1.0 - params.class_prior));
  for (std::size_t j = 0; j < votes.size(); ++j) {
    if (votes[j] == kAbstain) continue;
    const double w = std::log(params.accuracy[j] / (1.0 - params.accuracy[j]));
    log_odds += votes[j] == 1 ? w : -w;
  }
  return 1.0 / (1.0 + std::exp(-log_odds));
}

std::vector<double> posteriors(const LabelModelParams& params, const VoteMatrix& votes) {
  std::vector<double> out(votes.size());
  for (std::size_t i = 0; i < votes.size(); ++i) out[i] = posterior(params, votes[i]);
  return out;
}

}  // namespace slicekit::baselines
