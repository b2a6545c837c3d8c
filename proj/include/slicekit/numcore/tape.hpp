// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "slicekit/numcore/tensor.hpp"

namespace slicekit::num {

/// Handle to a node recorded on a Tape.
struct Var {
  std::uint32_t id = 0;
};

/// Reverse-mode differentiation over a fixed vocabulary of matrix ops.
///
/// Nodes are appended in evaluation order, so ids are already a topological
/// order and backward() is a single reverse sweep. Kinks of relu and abs get
/// subgradient 0. A tape is meant for one forward/backward pass; build a new
/// one per step.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  Var leaf(Tensor2 value);
  Var constant(Tensor2 value);

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  /// a (n x m) plus a 1 x m row broadcast over every row.
  Var add_row(Var a, Var row);
  Var mul(Var a, Var b);
  Var scale(Var a, double c);
  Var relu(Var a);
  Var sigmoid(Var a);
  Var abs(Var a);
  /// Row-wise stable softmax.
  Var softmax_rows(Var a);
  Var concat_cols(std::span<const Var> parts);
  /// Column j of a as an n x 1 matrix.
  Var column(Var a, std::size_t j);
  /// m (n x c) with row i multiplied by v(i, 0).
  Var scale_rows(Var m, Var v);
  Var row_sum(Var a);
  Var sum(Var a);
  /// sum_ij w_ij * bce_with_logits(logits_ij, targets_ij) as a 1 x 1 node.
  /// Zero weights mask entries out of both value and gradient.
  Var bce_with_logits(Var logits, const Tensor2& targets, const Tensor2& weights);
  /// Same weighted sum for probabilities, clamped to [1e-12, 1 - 1e-12].
  Var bce_with_probs(Var probs, const Tensor2& targets, const Tensor2& weights);

  const Tensor2& value(Var v) const { return nodes_[v.id].value; }
  double scalar(Var v) const;
  /// Gradient after backward(); zero for leaves the root does not reach.
  const Tensor2& grad(Var v) const { return nodes_[v.id].grad; }

  /// Populates gradients of the 1 x 1 root with respect to every leaf.
  void backward(Var root);

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  enum class Op : std::uint8_t {
    kLeaf,
    kConstant,
    kMatmul,
    kAdd,
    kAddRow,
    kMul,
    kScale,
    kRelu,
    kSigmoid,
    kAbs,
    kSoftmaxRows,
    kConcatCols,
    kColumn,
    kScaleRows,
    kRowSum,
    kSum,
    kBceLogits,
    kBceProbs,
  };

  struct Node {
    Op op = Op::kConstant;
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    bool needs_grad = false;
    double scalar = 0.0;
    std::size_t index = 0;
    std::vector<std::uint32_t> inputs;
    Tensor2 value;
    Tensor2 grad;
    Tensor2 targets;
    Tensor2 weights;
  };

  Var push(Node node);
  bool tracks(Var v) const { return nodes_[v.id].needs_grad; }
  void backprop_node(const Node& n);

  std::vector<Node> nodes_;
};

}  // namespace slicekit::num
