// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace slicekit::num {

/// Dense row-major matrix of doubles.
class Tensor2 {
 public:
  Tensor2() = default;
  Tensor2(std::size_t rows, std::size_t cols, double fill = 0.0);
  Tensor2(std::size_t rows, std::size_t cols, std::vector<double> data);
  Tensor2(std::initializer_list<std::initializer_list<double>> rows);

  static Tensor2 identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::vector<double> column(std::size_t c) const;
  Tensor2 transposed() const;
  bool all_finite() const noexcept;

  bool operator==(const Tensor2&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Value-level primitives. The tape records the same operations with gradients.

Tensor2 matmul(const Tensor2& a, const Tensor2& b);
Tensor2 relu(const Tensor2& a);
Tensor2 abs_elem(const Tensor2& a);

/// Numerically stable softmax (max-shifted). Throws ShapeError on empty input.
std::vector<double> softmax_vec(std::span<const double> v);

double sigmoid(double x) noexcept;

/// Binary cross entropy on a logit, in log-sum-exp form.
/// Throws DomainError when target is outside [0, 1].
double bce_with_logits(double logit, double target);

}  // namespace slicekit::num
