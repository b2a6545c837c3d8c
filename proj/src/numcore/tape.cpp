// SPDX-License-Identifier: Apache-2.0
#include "slicekit/numcore/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "slicekit/errors.hpp"

namespace slicekit::num {

namespace {

constexpr double kProbEps = 1e-12;

std::string shape_of(const Tensor2& t) {
  return std::to_string(t.rows()) + "x" + std::to_string(t.cols());
}

void require_same_shape(const char* op, const Tensor2& a, const Tensor2& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shapes " + shape_of(a) + " and " + shape_of(b));
  }
}

// out += a^T * b without materializing the transpose.
void accumulate_at_b(const Tensor2& a, const Tensor2& b, Tensor2& out) {
  const std::size_t m = out.cols();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const double* brow = b.row(r).data();
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double ari = a(r, i);
      if (ari == 0.0) continue;
      double* orow = out.row(i).data();
      for (std::size_t j = 0; j < m; ++j) orow[j] += ari * brow[j];
    }
  }
}

// out += a * b^T.
void accumulate_a_bt(const Tensor2& a, const Tensor2& b, Tensor2& out) {
  const std::size_t inner = a.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* arow = a.row(i).data();
    double* orow = out.row(i).data();
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const double* brow = b.row(j).data();
      double acc = 0.0;
      for (std::size_t k = 0; k < inner; ++k) acc += arow[k] * brow[k];
      orow[j] += acc;
    }
  }
}

}  // namespace

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::leaf(Tensor2 value) {
  Node n;
  n.op = Op::kLeaf;
  n.needs_grad = true;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::constant(Tensor2 value) {
  Node n;
  n.op = Op::kConstant;
  n.value = std::move(value);
  return push(std::move(n));
}

double Tape::scalar(Var v) const {
  const Tensor2& t = value(v);
  if (t.rows() != 1 || t.cols() != 1) throw ShapeError("scalar(): node is " + shape_of(t));
  return t(0, 0);
}

Var Tape::matmul(Var a, Var b) {
  Node n;
  n.op = Op::kMatmul;
  n.a = a.id;
  n.b = b.id;
  n.needs_grad = tracks(a) || tracks(b);
  n.value = num::matmul(value(a), value(b));
  return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
  require_same_shape("add", value(a), value(b));
  Node n;
  n.op = Op::kAdd;
  n.a = a.id;
  n.b = b.id;
  n.needs_grad = tracks(a) || tracks(b);
  n.value = value(a);
  auto out = n.value.data();
  auto rhs = value(b).data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += rhs[i];
  return push(std::move(n));
}

Var Tape::add_row(Var a, Var row) {
  const Tensor2& r = value(row);
  if (r.rows() != 1 || r.cols() != value(a).cols()) {
    throw ShapeError("add_row: " + shape_of(value(a)) + " with row " + shape_of(r));
  }
  Node n;
  n.op = Op::kAddRow;
  n.a = a.id;
  n.b = row.id;
  n.needs_grad = tracks(a) || tracks(row);
  n.value = value(a);
  for (std::size_t i = 0; i < n.value.rows(); ++i) {
    auto out = n.value.row(i);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += r(0, j);
  }
  return push(std::move(n));
}

Var Tape::mul(Var a, Var b) {
  require_same_shape("mul", value(a), value(b));
  Node n;
  n.op = Op::kMul;
  n.a = a.id;
  n.b = b.id;
  n.needs_grad = tracks(a) || tracks(b);
  n.value = value(a);
  auto out = n.value.data();
  auto rhs = value(b).data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= rhs[i];
  return push(std::move(n));
}

Var Tape::scale(Var a, double c) {
  Node n;
  n.op = Op::kScale;
  n.a = a.id;
  n.scalar = c;
  n.needs_grad = tracks(a);
  n.value = value(a);
  for (double& v : n.value.data()) v *= c;
  return push(std::move(n));
}

Var Tape::relu(Var a) {
  Node n;
  n.op = Op::kRelu;
  n.a = a.id;
  n.needs_grad = tracks(a);
  n.value = num::relu(value(a));
  return push(std::move(n));
}

Var Tape::sigmoid(Var a) {
  Node n;
  n.op = Op::kSigmoid;
  n.a = a.id;
  n.needs_grad = tracks(a);
  n.value = value(a);
  for (double& v : n.value.data()) v = num::sigmoid(v);
  return push(std::move(n));
}

Var Tape::abs(Var a) {
  Node n;
  n.op = Op::kAbs;
  n.a = a.id;
  n.needs_grad = tracks(a);
  n.value = abs_elem(value(a));
  return push(std::move(n));
}

Var Tape::softmax_rows(Var a) {
  const Tensor2& in = value(a);
  if (in.cols() == 0) throw ShapeError("softmax_rows: zero columns");
  Node n;
  n.op = Op::kSoftmaxRows;
  n.a = a.id;
  n.needs_grad = tracks(a);
  n.value = Tensor2(in.rows(), in.cols());
  for (std::size_t i = 0; i < in.rows(); ++i) {
    auto src = in.row(i);
    auto dst = n.value.row(i);
    const double m = *std::max_element(src.begin(), src.end());
    double total = 0.0;
    for (std::size_t j = 0; j < src.size(); ++j) {
      dst[j] = std::exp(src[j] - m);
      total += dst[j];
    }
    for (double& e : dst) e /= total;
  }
  return push(std::move(n));
}

Var Tape::concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const std::size_t rows = value(parts[0]).rows();
  std::size_t cols = 0;
  Node n;
  n.op = Op::kConcatCols;
  for (Var p : parts) {
    if (value(p).rows() != rows) throw ShapeError("concat_cols: row count mismatch");
    cols += value(p).cols();
    n.inputs.push_back(p.id);
    n.needs_grad = n.needs_grad || tracks(p);
  }
  n.value = Tensor2(rows, cols);
  std::size_t offset = 0;
  for (Var p : parts) {
    const Tensor2& src = value(p);
    for (std::size_t i = 0; i < rows; ++i)
      std::copy(src.row(i).begin(), src.row(i).end(), n.value.row(i).begin() + offset);
    offset += src.cols();
  }
  return push(std::move(n));
}

Var Tape::column(Var a, std::size_t j) {
  const Tensor2& in = value(a);
  if (j >= in.cols()) throw ShapeError("column: index out of range for " + shape_of(in));
  Node n;
  n.op = Op::kColumn;
  n.a = a.id;
  n.index = j;
  n.needs_grad = tracks(a);
  n.value = Tensor2(in.rows(), 1, in.column(j));
  return push(std::move(n));
}

Var Tape::scale_rows(Var m, Var v) {
  const Tensor2& mat = value(m);
  const Tensor2& vec = value(v);
  if (vec.cols() != 1 || vec.rows() != mat.rows()) {
    throw ShapeError("scale_rows: " + shape_of(mat) + " by " + shape_of(vec));
  }
  Node n;
  n.op = Op::kScaleRows;
  n.a = m.id;
  n.b = v.id;
  n.needs_grad = tracks(m) || tracks(v);
  n.value = mat;
  for (std::size_t i = 0; i < mat.rows(); ++i)
    for (double& x : n.value.row(i)) x *= vec(i, 0);
  return push(std::move(n));
}

Var Tape::row_sum(Var a) {
  const Tensor2& in = value(a);
  Node n;
  n.op = Op::kRowSum;
  n.a = a.id;
  n.needs_grad = tracks(a);
  n.value = Tensor2(in.rows(), 1);
  for (std::size_t i = 0; i < in.rows(); ++i) {
    double s = 0.0;
    for (double x : in.row(i)) s += x;
    n.value(i, 0) = s;
  }
  return push(std::move(n));
}

Var Tape::sum(Var a) {
  Node n;
  n.op = Op::kSum;
  n.a = a.id;
  n.needs_grad = tracks(a);
  double s = 0.0;
  for (double x : value(a).data()) s += x;
  n.value = Tensor2(1, 1, s);
  return push(std::move(n));
}

Var Tape::bce_with_logits(Var logits, const Tensor2& targets, const Tensor2& weights) {
  const Tensor2& x = value(logits);
  require_same_shape("bce_with_logits", x, targets);
  require_same_shape("bce_with_logits", x, weights);
  Node n;
  n.op = Op::kBceLogits;
  n.a = logits.id;
  n.needs_grad = tracks(logits);
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = weights.data()[i];
    if (w == 0.0) continue;
    total += w * num::bce_with_logits(x.data()[i], targets.data()[i]);
  }
  n.value = Tensor2(1, 1, total);
  n.targets = targets;
  n.weights = weights;
  return push(std::move(n));
}

Var Tape::bce_with_probs(Var probs, const Tensor2& targets, const Tensor2& weights) {
  const Tensor2& p = value(probs);
  require_same_shape("bce_with_probs", p, targets);
  require_same_shape("bce_with_probs", p, weights);
  Node n;
  n.op = Op::kBceProbs;
  n.a = probs.id;
  n.needs_grad = tracks(probs);
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double w = weights.data()[i];
    if (w == 0.0) continue;
    const double t = targets.data()[i];
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("bce_with_probs: target outside [0,1]");
    const double q = std::clamp(p.data()[i], kProbEps, 1.0 - kProbEps);
    total -= w * (t * std::log(q) + (1.0 - t) * std::log1p(-q));
  }
  n.value = Tensor2(1, 1, total);
  n.targets = targets;
  n.weights = weights;
  return push(std::move(n));
}

void Tape::backward(Var root) {
  const Tensor2& r = value(root);
  if (r.rows() != 1 || r.cols() != 1) {
    throw ShapeError("backward: root must be 1x1, got " + shape_of(r));
  }
  for (Node& n : nodes_) {
    if (n.needs_grad) n.grad = Tensor2(n.value.rows(), n.value.cols());
  }
  if (!nodes_[root.id].needs_grad) return;
  nodes_[root.id].grad(0, 0) = 1.0;
  for (std::size_t i = root.id + 1; i-- > 0;) {
    const Node& n = nodes_[i];
    if (n.needs_grad && n.op != Op::kLeaf) backprop_node(n);
  }
}

void Tape::backprop_node(const Node& n) {
  const Tensor2& g = n.grad;
  auto grad_of = [this](std::uint32_t id) -> Tensor2* {
    Node& p = nodes_[id];
    return p.needs_grad ? &p.grad : nullptr;
  };

  switch (n.op) {
    case Op::kLeaf:
    case Op::kConstant:
      break;
    case Op::kMatmul: {
      if (Tensor2* ga = grad_of(n.a)) accumulate_a_bt(g, nodes_[n.b].value, *ga);
      if (Tensor2* gb = grad_of(n.b)) accumulate_at_b(nodes_[n.a].value, g, *gb);
      break;
    }
    case Op::kAdd: {
      for (std::uint32_t id : {n.a, n.b}) {
        if (Tensor2* gp = grad_of(id)) {
          auto dst = gp->data();
          for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g.data()[i];
        }
      }
      break;
    }
    case Op::kAddRow: {
      if (Tensor2* ga = grad_of(n.a)) {
        auto dst = ga->data();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g.data()[i];
      }
      if (Tensor2* gb = grad_of(n.b)) {
        for (std::size_t i = 0; i < g.rows(); ++i)
          for (std::size_t j = 0; j < g.cols(); ++j) (*gb)(0, j) += g(i, j);
      }
      break;
    }
    case Op::kMul: {
      const Tensor2& av = nodes_[n.a].value;
      const Tensor2& bv = nodes_[n.b].value;
      if (Tensor2* ga = grad_of(n.a))
        for (std::size_t i = 0; i < g.size(); ++i) ga->data()[i] += g.data()[i] * bv.data()[i];
      if (Tensor2* gb = grad_of(n.b))
        for (std::size_t i = 0; i < g.size(); ++i) gb->data()[i] += g.data()[i] * av.data()[i];
      break;
    }
    case Op::kScale: {
      if (Tensor2* ga = grad_of(n.a))
        for (std::size_t i = 0; i < g.size(); ++i) ga->data()[i] += n.scalar * g.data()[i];
      break;
    }
    case Op::kRelu: {
      const Tensor2& in = nodes_[n.a].value;
      if (Tensor2* ga = grad_of(n.a))
        for (std::size_t i = 0; i < g.size(); ++i)
          if (in.data()[i] > 0.0) ga->data()[i] += g.data()[i];
      break;
    }
    case Op::kSigmoid: {
      if (Tensor2* ga = grad_of(n.a))
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double s = n.value.data()[i];
          ga->data()[i] += g.data()[i] * s * (1.0 - s);
        }
      break;
    }
    case Op::kAbs: {
      const Tensor2& in = nodes_[n.a].value;
      if (Tensor2* ga = grad_of(n.a))
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double x = in.data()[i];
          if (x > 0.0) ga->data()[i] += g.data()[i];
          else if (x < 0.0) ga->data()[i] -= g.data()[i];
        }
      break;
    }
    case Op::kSoftmaxRows: {
      if (Tensor2* ga = grad_of(n.a)) {
        for (std::size_t i = 0; i < g.rows(); ++i) {
          auto s = n.value.row(i);
          auto gi = g.row(i);
          double dot = 0.0;
          for (std::size_t j = 0; j < s.size(); ++j) dot += gi[j] * s[j];
          auto dst = ga->row(i);
          for (std::size_t j = 0; j < s.size(); ++j) dst[j] += s[j] * (gi[j] - dot);
        }
      }
      break;
    }
    case Op::kConcatCols: {
      std::size_t offset = 0;
      for (std::uint32_t id : n.inputs) {
        const std::size_t c = nodes_[id].value.cols();
        if (Tensor2* gp = grad_of(id)) {
          for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = 0; j < c; ++j) (*gp)(i, j) += g(i, offset + j);
        }
        offset += c;
      }
      break;
    }
    case Op::kColumn: {
      if (Tensor2* ga = grad_of(n.a))
        for (std::size_t i = 0; i < g.rows(); ++i) (*ga)(i, n.index) += g(i, 0);
      break;
    }
    case Op::kScaleRows: {
      const Tensor2& m = nodes_[n.a].value;
      const Tensor2& v = nodes_[n.b].value;
      if (Tensor2* gm = grad_of(n.a))
        for (std::size_t i = 0; i < g.rows(); ++i)
          for (std::size_t j = 0; j < g.cols(); ++j) (*gm)(i, j) += g(i, j) * v(i, 0);
      if (Tensor2* gv = grad_of(n.b))
        for (std::size_t i = 0; i < g.rows(); ++i) {
          double acc = 0.0;
          for (std::size_t j = 0; j < g.cols(); ++j) acc += g(i, j) * m(i, j);
          (*gv)(i, 0) += acc;
        }
      break;
    }
    case Op::kRowSum: {
      if (Tensor2* ga = grad_of(n.a))
        for (std::size_t i = 0; i < ga->rows(); ++i)
          for (double& x : ga->row(i)) x += g(i, 0);
      break;
    }
    case Op::kSum: {
      if (Tensor2* ga = grad_of(n.a))
        for (double& x : ga->data()) x += g(0, 0);
      break;
    }
    case Op::kBceLogits: {
      const Tensor2& x = nodes_[n.a].value;
      if (Tensor2* ga = grad_of(n.a))
        for (std::size_t i = 0; i < x.size(); ++i) {
          const double w = n.weights.data()[i];
          if (w == 0.0) continue;
          ga->data()[i] += g(0, 0) * w * (num::sigmoid(x.data()[i]) - n.targets.data()[i]);
        }
      break;
    }
    case Op::kBceProbs: {
      const Tensor2& p = nodes_[n.a].value;
      if (Tensor2* ga = grad_of(n.a))
        for (std::size_t i = 0; i < p.size(); ++i) {
          const double w = n.weights.data()[i];
          if (w == 0.0) continue;
          const double raw = p.data()[i];
          if (raw < kProbEps || raw > 1.0 - kProbEps) continue;
          const double t = n.targets.data()[i];
          ga->data()[i] += g(0, 0) * w * (-t / raw + (1.0 - t) / (1.0 - raw));
        }
      break;
    }
  }
}

}  // namespace slicekit::num
