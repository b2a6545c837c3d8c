// SPDX-License-Identifier: Apache-2.0
#include "slicekit/training.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "slicekit/baselines/models.hpp"
#include "slicekit/errors.hpp"
#include "slicekit/metrics.hpp"
#include "slicekit/rng.hpp"

namespace slicekit::train {

std::string_view to_string(OptimizerKind kind) {
  return kind == OptimizerKind::kAdam ? "adam" : "sgd";
}

OptimizerKind parse_optimizer(std::string_view s) {
  if (s == "adam") return OptimizerKind::kAdam;
  if (s == "sgd") return OptimizerKind::kSgd;
  throw ConfigError("unknown optimizer '" + std::string(s) + "'");
}

void validate(const Hyperparams& hp) {
  if (!(hp.lr > 0.0)) throw TrainingError("learning rate must be positive");
  if (!(hp.l2 >= 0.0)) throw TrainingError("l2 coefficient must be non-negative");
  if (hp.batch_size == 0) throw TrainingError("batch size must be positive");
  if (hp.pretrain_epochs == 0 || hp.finetune_epochs == 0) {
    throw TrainingError("epoch budgets must be at least 1");
  }
}

void write_jsonl(const RunRecord& record, std::ostream& out) {
  for (const auto& e : record.epochs) {
    nlohmann::json j = {{"type", "epoch"},
                        {"method", record.method},
                        {"epoch", e.epoch},
                        {"train_loss", e.train_loss},
                        {"valid_f1", e.valid_f1}};
    out << j.dump() << '\n';
  }
  nlohmann::json s = {{"type", "summary"},
                      {"method", record.method},
                      {"selected_epoch", record.selected_epoch},
                      {"selected_valid_f1", record.selected_valid_f1},
                      {"backbone_checksum", record.backbone_checksum},
                      {"wall_time_s", record.wall_time_s}};
  out << s.dump() << '\n';
}

Batch make_batch(const data::Dataset& dataset, const slicing::SliceMatrix& lambda,
                 data::Split split) {
  const auto idx = dataset.indices(split);
  Batch b;
  b.x = data::gather_rows(dataset.X, idx);
  b.y = num::Tensor2(idx.size(), 1);
  b.lambda = num::Tensor2(idx.size(), lambda.lambda.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    b.y(r, 0) = dataset.y[idx[r]];
    for (std::size_t c = 0; c < lambda.lambda.cols(); ++c) b.lambda(r, c) = lambda.lambda(idx[r], c);
  }
  return b;
}

ValidData make_valid(const data::Dataset& dataset, data::Split split) {
  const auto idx = dataset.indices(split);
  ValidData v;
  v.X = data::gather_rows(dataset.X, idx);
  for (std::size_t i : idx) v.y.push_back(dataset.y[i]);
  return v;
}

namespace {

Batch slice_batch(const Batch& all, std::span<const std::size_t> rows) {
  Batch b;
  b.x = num::Tensor2(rows.size(), all.x.cols());
  b.y = num::Tensor2(rows.size(), 1);
  b.lambda = num::Tensor2(rows.size(), all.lambda.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::size_t src = rows[r];
    std::copy(all.x.row(src).begin(), all.x.row(src).end(), b.x.row(r).begin());
    b.y(r, 0) = all.y(src, 0);
    if (all.lambda.cols() > 0)
      std::copy(all.lambda.row(src).begin(), all.lambda.row(src).end(), b.lambda.row(r).begin());
  }
  return b;
}

double l2_penalty(const nn::ParamSet& params, double l2) {
  if (l2 == 0.0) return 0.0;
  double s = 0.0;
  for (const auto& p : params) {
    if (p.is_bias) continue;
    for (double v : p.value.data()) s += v * v;
  }
  return l2 * s;
}

class Optimizer {
 public:
  Optimizer(const nn::ParamSet& params, const Hyperparams& hp) : hp_(hp) {
    if (hp.optimizer == OptimizerKind::kAdam) {
      for (const auto& p : params) {
        m_.emplace_back(p.value.rows(), p.value.cols());
        v_.emplace_back(p.value.rows(), p.value.cols());
      }
    }
  }

  void step(nn::ParamSet& params, const num::Tape& tape, std::span<const num::Var> vars) {
    ++t_;
    constexpr double b1 = 0.9;
    constexpr double b2 = 0.999;
    constexpr double eps = 1e-8;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& p = params[i];
      auto w = p.value.data();
      auto g = tape.grad(vars[i]).data();
      const double decay = p.is_bias ? 0.0 : 2.0 * hp_.l2;
      if (hp_.optimizer == OptimizerKind::kSgd) {
        for (std::size_t j = 0; j < w.size(); ++j) w[j] -= hp_.lr * (g[j] + decay * w[j]);
        continue;
      }
      auto m = m_[i].data();
      auto v = v_[i].data();
      for (std::size_t j = 0; j < w.size(); ++j) {
        const double gj = g[j] + decay * w[j];
        m[j] = b1 * m[j] + (1.0 - b1) * gj;
        v[j] = b2 * v[j] + (1.0 - b2) * gj * gj;
        w[j] -= hp_.lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + eps);
      }
    }
  }

 private:
  Hyperparams hp_;
  std::size_t t_ = 0;
  std::vector<num::Tensor2> m_;
  std::vector<num::Tensor2> v_;
};

}  // namespace

double regularized_loss(const Model& model, const Batch& batch, double l2) {
  num::Tape tape;
  const auto vars = model.params().bind(tape);
  return tape.scalar(model.batch_loss(tape, vars, batch)) + l2_penalty(model.params(), l2);
}

RunRecord fit(Model& model, const Batch& train, const ValidData& valid, const Hyperparams& hp,
              std::size_t epochs) {
  validate(hp);
  if (train.size() == 0) throw TrainingError(model.method() + ": empty training set");
  const auto start = std::chrono::steady_clock::now();

  RunRecord record;
  record.method = model.method();
  Optimizer opt(model.params(), hp);
  nn::ParamSet best = model.params();
  double best_f1 = -1.0;
  double last_finite = std::nan("");

  std::vector<std::size_t> order(train.size());
  for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(derive_seed(hp.seed, "shuffle", epoch));
    rng.shuffle(std::span<std::size_t>(order));

    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += hp.batch_size) {
      const std::size_t end = std::min(order.size(), begin + hp.batch_size);
      const Batch batch =
          slice_batch(train, std::span<const std::size_t>(order).subspan(begin, end - begin));
      num::Tape tape;
      const auto vars = model.params().bind(tape);
      const num::Var loss = model.batch_loss(tape, vars, batch);
      const double value = tape.scalar(loss) + l2_penalty(model.params(), hp.l2);
      if (!std::isfinite(value)) {
        throw DivergenceError(model.method() + ": loss became non-finite at epoch " +
                                  std::to_string(epoch) + " (last finite loss " +
                                  std::to_string(last_finite) + ")",
                              last_finite);
      }
      last_finite = value;
      tape.backward(loss);
      opt.step(model.params(), tape, vars);
      loss_sum += value;
      ++batches;
    }

    const double f1 = metrics::f1(model.predict(valid.X), valid.y);
    record.epochs.push_back({epoch, loss_sum / static_cast<double>(batches), f1});
    if (f1 > best_f1) {
      best_f1 = f1;
      best = model.params();
      record.selected_epoch = epoch;
    }
  }
  model.params().assign(best);
  record.selected_valid_f1 = best_f1;
  record.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return record;
}

Pretrained pretrain_backbone(const Batch& train, const ValidData& valid,
                             const nn::BackboneConfig& backbone, const Grid& grid,
                             const Hyperparams& base) {
  if (grid.lr.empty() || grid.l2.empty()) throw TrainingError("pretrain grid is empty");
  Pretrained out;
  out.best_valid_f1 = -1.0;
  for (double lr : grid.lr) {
    for (double l2 : grid.l2) {
      Hyperparams hp = base;
      hp.lr = lr;
      hp.l2 = l2;
      baselines::VanillaModel model(backbone, derive_seed(base.seed, "pretrain"), "pretrain");
      const RunRecord rec = fit(model, train, valid, hp, hp.pretrain_epochs);
      out.cells.push_back({lr, l2, rec.selected_valid_f1});
      if (rec.selected_valid_f1 > out.best_valid_f1) {
        out.best_valid_f1 = rec.selected_valid_f1;
        out.best = hp;
        out.backbone = nn::ParamSet();
        for (const auto& p : model.params())
          if (std::string_view(p.name).starts_with("backbone.")) out.backbone.add(p.name, p.value, p.is_bias);
      }
    }
  }
  return out;
}

RunRecord finetune(Model& model, const nn::ParamSet& backbone, const Batch& train,
                   const ValidData& valid, const Hyperparams& hp) {
  model.params().copy_from(backbone, "backbone.", "backbone.");
  const std::uint64_t sum = nn::checksum(model.params(), "backbone.");
  RunRecord rec = fit(model, train, valid, hp, hp.finetune_epochs);
  rec.backbone_checksum = sum;
  return rec;
}

std::size_t worker_count() {
  if (const char* env = std::getenv("SLICEKIT_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                  std::size_t workers) {
  if (workers == 0) workers = worker_count();
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(failure_mu);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace slicekit::train
