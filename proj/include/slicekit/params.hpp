// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slicekit/numcore/tape.hpp"
#include "slicekit/numcore/tensor.hpp"
#include "slicekit/rng.hpp"

namespace slicekit::nn {

struct Parameter {
  std::string name;
  num::Tensor2 value;
  bool is_bias = false;
};

/// Ordered, named collection of trainable tensors.
class ParamSet {
 public:
  std::size_t add(std::string name, num::Tensor2 value, bool is_bias);

  std::size_t size() const noexcept { return params_.size(); }
  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }
  std::optional<std::size_t> find(std::string_view name) const;
  const Parameter& at(std::string_view name) const;
  Parameter& at(std::string_view name);

  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }

  /// Total scalar count.
  std::size_t count() const noexcept;
  /// Registers every parameter as a gradient-tracked leaf, in order.
  std::vector<num::Var> bind(num::Tape& tape) const;
  /// Registers every parameter as a constant.
  std::vector<num::Var> bind_constant(num::Tape& tape) const;
  bool all_finite() const noexcept;

  /// Copies values of `src` parameters whose names start with `src_prefix`
  /// into parameters named with `dst_prefix` in place of it. Shapes must match.
  /// Returns the number of tensors copied.
  std::size_t copy_from(const ParamSet& src, std::string_view src_prefix,
                        std::string_view dst_prefix);
  /// Overwrites every value from `src`; names and shapes must match exactly.
  void assign(const ParamSet& src);

 private:
  std::vector<Parameter> params_;
};

/// FNV-1a over the names and raw bytes of every parameter whose name starts
/// with `prefix`.
std::uint64_t checksum(const ParamSet& params, std::string_view prefix = "");

/// Text format, one tensor per line after a header:
///   slicekit-params 1 <count>
///   <name> <bias 0|1> <rows> <cols> <v0> <v1> ...   (17 significant digits)
void save_params(const ParamSet& params, std::ostream& out);
ParamSet load_params(std::istream& in);

struct LinearRef {
  std::size_t weight = 0;
  std::size_t bias = 0;
};

/// Adds weight (in x out, uniform in +-sqrt(6/(in+out))) and zero bias.
LinearRef add_linear(ParamSet& params, const std::string& prefix, std::size_t in, std::size_t out,
                     Rng& rng);
num::Var apply_linear(num::Tape& tape, std::span<const num::Var> vars, LinearRef layer,
                      num::Var x);

enum class Activation : std::uint8_t { kRelu, kSigmoid };

struct BackboneConfig {
  std::size_t input_dim = 2;
  std::vector<std::size_t> hidden{13};
  std::size_t output_dim = 13;
  Activation nonlinearity = Activation::kRelu;
};

/// MLP with the nonlinearity after every layer, including the last.
struct Backbone {
  BackboneConfig config;
  std::vector<LinearRef> layers;

  static Backbone build(ParamSet& params, const std::string& prefix, const BackboneConfig& config,
                        Rng& rng);
  num::Var forward(num::Tape& tape, std::span<const num::Var> vars, num::Var x) const;
};

}  // namespace slicekit::nn
