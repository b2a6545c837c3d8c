// SPDX-License-Identifier: Apache-2.0
#include "slicekit/params.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include "slicekit/errors.hpp"

namespace slicekit::nn {

std::size_t ParamSet::add(std::string name, num::Tensor2 value, bool is_bias) {
  if (find(name)) throw ConfigError("duplicate parameter name '" + name + "'");
  params_.push_back({std::move(name), std::move(value), is_bias});
  return params_.size() - 1;
}

std::optional<std::size_t> ParamSet::find(std::string_view name) const {
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (params_[i].name == name) return i;
  return std::nullopt;
}

const Parameter& ParamSet::at(std::string_view name) const {
  auto i = find(name);
  if (!i) throw ConfigError("unknown parameter '" + std::string(name) + "'");
  return params_[*i];
}

Parameter& ParamSet::at(std::string_view name) {
  auto i = find(name);
  if (!i) throw ConfigError("unknown parameter '" + std::string(name) + "'");
  return params_[*i];
}

std::size_t ParamSet::count() const noexcept {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

std::vector<num::Var> ParamSet::bind(num::Tape& tape) const {
  std::vector<num::Var> vars;
  vars.reserve(params_.size());
  for (const auto& p : params_) vars.push_back(tape.leaf(p.value));
  return vars;
}

std::vector<num::Var> ParamSet::bind_constant(num::Tape& tape) const {
  std::vector<num::Var> vars;
  vars.reserve(params_.size());
  for (const auto& p : params_) vars.push_back(tape.constant(p.value));
  return vars;
}

bool ParamSet::all_finite() const noexcept {
  for (const auto& p : params_)
    if (!p.value.all_finite()) return false;
  return true;
}

std::size_t ParamSet::copy_from(const ParamSet& src, std::string_view src_prefix,
                                std::string_view dst_prefix) {
  std::size_t copied = 0;
  for (const auto& p : src) {
    if (!std::string_view(p.name).starts_with(src_prefix)) continue;
    const std::string target = std::string(dst_prefix) + p.name.substr(src_prefix.size());
    Parameter& dst = at(target);
    if (dst.value.rows() != p.value.rows() || dst.value.cols() != p.value.cols()) {
      throw ShapeError("copy_from: shape mismatch for '" + target + "'");
    }
    dst.value = p.value;
    ++copied;
  }
  return copied;
}

void ParamSet::assign(const ParamSet& src) {
  if (src.size() != size()) {
    throw ConfigError("parameter count mismatch: expected " + std::to_string(size()) + ", got " +
                      std::to_string(src.size()));
  }
  for (std::size_t i = 0; i < size(); ++i) {
    const auto& s = src[i];
    auto& d = params_[i];
    if (s.name != d.name || s.value.rows() != d.value.rows() || s.value.cols() != d.value.cols()) {
      throw ConfigError("parameter '" + s.name + "' does not match '" + d.name + "'");
    }
    d.value = s.value;
  }
}

std::uint64_t checksum(const ParamSet& params, std::string_view prefix) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& p : params) {
    if (!std::string_view(p.name).starts_with(prefix)) continue;
    mix(p.name.data(), p.name.size());
    auto d = p.value.data();
    mix(d.data(), d.size() * sizeof(double));
  }
  return h;
}

void save_params(const ParamSet& params, std::ostream& out) {
  out << "slicekit-params 1 " << params.size() << '\n';
  char buf[64];
  for (const auto& p : params) {
    out << p.name << ' ' << (p.is_bias ? 1 : 0) << ' ' << p.value.rows() << ' ' << p.value.cols();
    for (double v : p.value.data()) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << ' ' << buf;
    }
    out << '\n';
  }
}

ParamSet load_params(std::istream& in) {
  std::string magic;
  int version = 0;
  std::size_t count = 0;
  if (!(in >> magic >> version >> count) || magic != "slicekit-params" || version != 1) {
    throw ConfigError("load_params: bad header");
  }
  ParamSet out;
  for (std::size_t i = 0; i < count; ++i) {
    std::string name;
    int bias = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    if (!(in >> name >> bias >> rows >> cols)) {
      throw ConfigError("load_params: truncated entry " + std::to_string(i));
    }
    std::vector<double> values(rows * cols);
    for (double& v : values) {
      std::string tok;
      if (!(in >> tok)) throw ConfigError("load_params: truncated values for '" + name + "'");
      char* end = nullptr;
      v = std::strtod(tok.c_str(), &end);
      if (*end != '\0') throw ConfigError("load_params: bad value '" + tok + "'");
    }
    out.add(name, num::Tensor2(rows, cols, std::move(values)), bias != 0);
  }
  return out;
}

LinearRef add_linear(ParamSet& params, const std::string& prefix, std::size_t in, std::size_t out,
                     Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
  num::Tensor2 w(in, out);
  for (double& v : w.data()) v = rng.uniform(-bound, bound);
  LinearRef ref;
  ref.weight = params.add(prefix + ".weight", std::move(w), false);
  ref.bias = params.add(prefix + ".bias", num::Tensor2(1, out), true);
  return ref;
}

num::Var apply_linear(num::Tape& tape, std::span<const num::Var> vars, LinearRef layer,
                      num::Var x) {
  return tape.add_row(tape.matmul(x, vars[layer.weight]), vars[layer.bias]);
}

Backbone Backbone::build(ParamSet& params, const std::string& prefix,
                         const BackboneConfig& config, Rng& rng) {
  if (config.output_dim == 0 || config.input_dim == 0) {
    throw ConfigError("backbone dimensions must be positive");
  }
  Backbone bb;
  bb.config = config;
  std::size_t in = config.input_dim;
  std::size_t layer = 0;
  for (std::size_t h : config.hidden) {
    if (h == 0) throw ConfigError("backbone hidden sizes must be positive");
    bb.layers.push_back(add_linear(params, prefix + "." + std::to_string(layer++), in, h, rng));
    in = h;
  }
  bb.layers.push_back(
      add_linear(params, prefix + "." + std::to_string(layer), in, config.output_dim, rng));
  return bb;
}

num::Var Backbone::forward(num::Tape& tape, std::span<const num::Var> vars, num::Var x) const {
  num::Var h = x;
  for (const LinearRef& layer : layers) {
    h = apply_linear(tape, vars, layer, h);
    h = config.nonlinearity == Activation::kRelu ? tape.relu(h) : tape.sigmoid(h);
  }
  return h;
}

}  // namespace slicekit::nn
