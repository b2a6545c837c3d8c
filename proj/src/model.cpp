// SPDX-License-Identifier: Apache-2.0
#include "slicekit/model.hpp"

namespace slicekit {

std::vector<int> Model::predict(const num::Tensor2& X) const {
  const std::vector<double> probs = predict_proba(X);
  std::vector<int> out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) out[i] = probs[i] > 0.5 ? 1 : 0;
  return out;
}

}  // namespace slicekit
