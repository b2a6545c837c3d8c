// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "slicekit/errors.hpp"

namespace slicekit {

/// Row-major matrix of {0,1} entries.
class BinaryMatrix {
 public:
  BinaryMatrix() = default;
  BinaryMatrix(std::size_t rows, std::size_t cols, std::uint8_t fill = 0)
      : rows_(rows), cols_(cols), bits_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  std::uint8_t operator()(std::size_t r, std::size_t c) const noexcept {
    return bits_[r * cols_ + c];
  }
  void set(std::size_t r, std::size_t c, bool v) noexcept { bits_[r * cols_ + c] = v ? 1 : 0; }

  std::span<const std::uint8_t> row(std::size_t r) const noexcept {
    return {bits_.data() + r * cols_, cols_};
  }
  std::vector<std::uint8_t> column(std::size_t c) const {
    std::vector<std::uint8_t> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }
  void set_column(std::size_t c, std::span<const std::uint8_t> values) {
    if (values.size() != rows_) throw ShapeError("set_column: length mismatch");
    for (std::size_t r = 0; r < rows_; ++r) set(r, c, values[r] != 0);
  }
  std::size_t column_count(std::size_t c) const noexcept {
    std::size_t n = 0;
    for (std::size_t r = 0; r < rows_; ++r) n += (*this)(r, c);
    return n;
  }

  bool operator==(const BinaryMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> bits_;
};

}  // namespace slicekit
