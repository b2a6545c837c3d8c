// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace slicekit {

/// Mismatched tensor shapes or an operation applied to the wrong arity.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid synthetic dataset specification.
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A slice cannot be represented in every split.
class SplitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A slicing function failed on some example.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training could not proceed (empty subset, bad hyperparameters).
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Loss became non-finite during optimization.
class DivergenceError : public TrainingError {
 public:
  DivergenceError(const std::string& what, double last_finite_loss)
      : TrainingError(what), last_finite_loss_(last_finite_loss) {}
  double last_finite_loss() const noexcept { return last_finite_loss_; }

 private:
  double last_finite_loss_;
};

/// Malformed experiment configuration or serialized artifact.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace slicekit
