// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "slicekit/numcore/tape.hpp"
#include "slicekit/numcore/tensor.hpp"
#include "slicekit/params.hpp"

namespace slicekit {

/// A minibatch. `y` holds (possibly soft) targets in [0,1] as n x 1;
/// `lambda` holds slice-matrix rows as n x (k+1) with the base column last.
struct Batch {
  num::Tensor2 x;
  num::Tensor2 y;
  num::Tensor2 lambda;

  std::size_t size() const noexcept { return x.rows(); }
};

/// Common surface of every trainable method.
class Model {
 public:
  virtual ~Model() = default;

  virtual std::string method() const = 0;

  /// Parameters optimized by the trainer.
  virtual nn::ParamSet& params() = 0;
  virtual const nn::ParamSet& params() const = 0;

  /// Scalar training loss for the batch; `vars` are params() bound in order.
  virtual num::Var batch_loss(num::Tape& tape, std::span<const num::Var> vars,
                              const Batch& batch) const = 0;

  /// P(y = 1) per row of X. Never consults slicing functions.
  virtual std::vector<double> predict_proba(const num::Tensor2& X) const = 0;

  /// Every parameter the deployed model holds, under unique names.
  virtual nn::ParamSet snapshot() const { return params(); }
  /// Inverse of snapshot(); names and shapes must match.
  virtual void restore(const nn::ParamSet& saved) { params().assign(saved); }

  /// Class 1 iff probability > 0.5; exactly 0.5 maps to 0.
  std::vector<int> predict(const num::Tensor2& X) const;
};

}  // namespace slicekit
