// SPDX-License-Identifier: Apache-2.0
// Acceptance runner. Usage: slicekit_acceptance --criterion N (1..8), or no
// argument to run all of them. Prints one [PASS]/[FAIL] line per criterion.
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "slicekit/baselines/models.hpp"
#include "slicekit/harness/config.hpp"
#include "slicekit/harness/experiments.hpp"
#include "slicekit/metrics.hpp"
#include "slicekit/model_sram.hpp"
#include "test_support.hpp"

namespace {

using namespace slicekit;
using nlohmann::json;
using testing::max_gradient_error;
using testing::random_batch;

struct Outcome {
  bool pass = true;
  std::vector<std::string> details;

  void expect(bool ok, const std::string& what) {
    details.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    pass = pass && ok;
  }
};

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

json load_config(const std::string& name) {
  return harness::read_config_file((std::filesystem::path(SLICEKIT_CONFIG_DIR) / (name + ".json")).string());
}

// Runs a study config and records every check it produces.
void run_study(Outcome& out, json doc) {
  const harness::ExperimentResult r = harness::run_experiment(harness::parse_config(doc));
  out.expect(!r.checks.empty(), "study produced checks");
  for (const auto& c : r.checks) {
    out.expect(c.pass, c.name + " = " + fmt("%.3f", c.value) + (c.at_least ? " >= " : " <= ") +
                           fmt("%g", c.threshold));
  }
}

sram::SramModel make_sram(std::size_t k, sram::ReweightingMode mode, std::uint64_t seed = 7) {
  sram::SramConfig c;
  c.k = k;
  c.mode = mode;
  return sram::SramModel(nn::BackboneConfig{}, c, seed);
}

std::vector<baselines::VanillaModel> experts(std::size_t count) {
  std::vector<baselines::VanillaModel> out;
  for (std::size_t e = 0; e < count; ++e) out.emplace_back(nn::BackboneConfig{}, 100 + e, "expert");
  return out;
}

std::size_t mlp_params(std::initializer_list<std::size_t> widths) {
  std::size_t total = 0;
  auto it = widths.begin();
  std::size_t in = *it++;
  for (; it != widths.end(); ++it) {
    total += in * *it + *it;
    in = *it;
  }
  return total;
}

const sram::ReweightingMode kModes[] = {sram::ReweightingMode::kFull, sram::ReweightingMode::kUniform,
                                        sram::ReweightingMode::kIndicatorOnly,
                                        sram::ReweightingMode::kConfidenceOnly};

Outcome gradients() {
  Outcome out;
  constexpr double kTol = 1e-4;
  auto check = [&](const std::string& name, Model& m, const Batch& b) {
    const double err = max_gradient_error(m, b, 1e-5);
    out.expect(err < kTol, name + " max relative error " + fmt("%.2e", err));
  };
  std::uint64_t seed = 1;
  for (auto mode : kModes) {
    auto m = make_sram(3, mode, seed);
    check("sbl-" + std::string(sram::to_string(mode)), m, random_batch(20, 3, seed++));
  }
  baselines::VanillaModel vanilla(nn::BackboneConfig{}, 11);
  check("vanilla", vanilla, random_batch(20, 2, seed++));
  baselines::HpsModel hps(nn::BackboneConfig{}, 3, 12);
  hps.set_alphas({1.0, 20.0, 2.0});
  check("hps", hps, random_batch(20, 3, seed++));
  baselines::MoeModel moe(experts(3), nn::BackboneConfig{}, 13);
  check("moe-gate", moe, random_batch(20, 2, seed++));
  for (std::size_t e = 0; e < 3; ++e) {
    baselines::VanillaModel expert = moe.expert(e);
    check("moe-expert-" + std::to_string(e), expert, random_batch(20, 2, seed++));
  }
  return out;
}

Outcome overview() {
  Outcome out;
  run_study(out, load_config("overview"));
  return out;
}

Outcome ablation() {
  Outcome out;
  json doc = load_config("ablate");
  out.expect(harness::parse_config(doc).seeds.size() >= 10, "at least 10 seeds");
  run_study(out, doc);
  return out;
}

json scale_at_13(std::vector<std::string> methods) {
  json doc = load_config("scale");
  doc["sizes"] = {13};
  doc["methods"] = methods;
  return doc;
}

Outcome scaling() {
  Outcome out;
  run_study(out, scale_at_13({"hps", "moe", "sbl"}));
  return out;
}

Outcome dp_comparison() {
  Outcome out;
  run_study(out, scale_at_13({"dp", "sbl"}));
  return out;
}

Outcome noise() {
  Outcome out;
  run_study(out, load_config("noise"));
  return out;
}

Outcome parameters() {
  Outcome out;
  const std::size_t d = 13, dp = 13, backbone = mlp_params({2, 13, 13});
  for (std::size_t k : {0u, 1u, 2u, 4u, 8u}) {
    const std::string ks = " k=" + std::to_string(k);
    const std::size_t vanilla = metrics::count_params(baselines::VanillaModel(nn::BackboneConfig{}, 1)).total;
    out.expect(vanilla == mlp_params({2, 13, 13, 1}), "vanilla/dp" + ks + " = " + std::to_string(vanilla));
    const std::size_t hps = metrics::count_params(baselines::HpsModel(nn::BackboneConfig{}, k, 1)).total;
    out.expect(hps == backbone + (k + 1) * mlp_params({d, 1}), "hps/manual" + ks + " = " + std::to_string(hps));
    const std::size_t moe = metrics::count_params(baselines::MoeModel(experts(k + 1), nn::BackboneConfig{}, 1)).total;
    out.expect(moe == (k + 1) * vanilla + mlp_params({2, 13, 13, k + 1}), "moe" + ks + " = " + std::to_string(moe));
    const std::size_t sbl = metrics::count_params(make_sram(k, sram::ReweightingMode::kFull)).total;
    out.expect(sbl == backbone + mlp_params({d, k + 1}) + (k + 1) * mlp_params({d, dp}) + 2 * mlp_params({dp, 1}),
               "sbl" + ks + " = " + std::to_string(sbl));
    const std::size_t next = metrics::count_params(make_sram(k + 1, sram::ReweightingMode::kFull)).total;
    out.expect(next - sbl == (d + 1) * (dp + 1), "sbl per-slice increment" + ks + " = " + std::to_string(next - sbl));
  }
  const double sbl4 = static_cast<double>(metrics::count_params(make_sram(4, sram::ReweightingMode::kFull)).total);
  const double moe4 =
      static_cast<double>(metrics::count_params(baselines::MoeModel(experts(5), nn::BackboneConfig{}, 1)).total);
  out.expect(sbl4 < 0.3 * moe4, "k=4 sbl/moe ratio " + fmt("%.3f", sbl4 / moe4) + " < 0.3 (" + fmt("%.0f", sbl4) +
                                    " vs " + fmt("%.0f", moe4) + ")");
  return out;
}

Outcome invariants() {
  Outcome out;
  double worst_sum = 0.0, min_a = 1.0;
  for (auto mode : kModes) {
    const auto m = make_sram(4, mode);
    const Batch b = random_batch(200, 4, 21);
    for (std::size_t i = 0; i < b.size(); ++i) {
      const auto a = m.forward(b.x.row(i)).a;
      worst_sum = std::max(worst_sum, std::abs(std::accumulate(a.begin(), a.end(), 0.0) - 1.0));
      for (double v : a) min_a = std::min(min_a, v);
    }
  }
  out.expect(worst_sum <= 1e-9 && min_a >= 0.0,
             "simplex: max |sum a - 1| " + fmt("%.1e", worst_sum) + ", min a " + fmt("%.2e", min_a));

  bool exact_one = true;
  const auto base_only = make_sram(0, sram::ReweightingMode::kFull);
  const Batch b0 = random_batch(100, 0, 22);
  for (std::size_t i = 0; i < b0.size(); ++i) {
    const auto a = base_only.forward(b0.x.row(i)).a;
    exact_one = exact_one && a.size() == 1 && a[0] == 1.0;
  }
  out.expect(exact_one, "k=0 attention is exactly [1.0]");

  double shift_gap = 0.0;
  for (auto mode : {sram::ReweightingMode::kFull, sram::ReweightingMode::kIndicatorOnly}) {
    auto m = make_sram(3, mode);
    const Batch b = random_batch(100, 3, 23);
    std::vector<std::vector<double>> before;
    for (std::size_t i = 0; i < b.size(); ++i) before.push_back(m.forward(b.x.row(i)).a);
    for (double& v : m.params().at("sram.indicator.bias").value.data()) v -= 5.5;
    for (std::size_t i = 0; i < b.size(); ++i) {
      const auto after = m.forward(b.x.row(i)).a;
      for (std::size_t j = 0; j < after.size(); ++j) shift_gap = std::max(shift_gap, std::abs(after[j] - before[i][j]));
    }
  }
  out.expect(shift_gap <= 1e-9, "Q-shift invariance max gap " + fmt("%.1e", shift_gap));

  {
    auto m = make_sram(3, sram::ReweightingMode::kFull);
    Batch b = random_batch(20, 3, 24);
    for (std::size_t i = 0; i < b.size(); ++i) b.lambda(i, 2) = 0.0;
    num::Tape tape;
    const auto vars = m.params().bind(tape);
    tape.backward(m.losses(tape, vars, b).pred);
    double leak = 0.0;
    for (const char* name : {"sram.expert.2.weight", "sram.expert.2.bias"}) {
      for (double g : tape.grad(vars[*m.params().find(name)]).data()) leak = std::max(leak, std::abs(g));
    }
    out.expect(leak == 0.0, "masked slice prediction-loss gradient " + fmt("%g", leak));
  }

  {
    const auto a = make_sram(2, sram::ReweightingMode::kFull, 31);
    std::stringstream buf;
    nn::save_params(a.snapshot(), buf);
    auto b = make_sram(2, sram::ReweightingMode::kFull, 32);
    b.restore(nn::load_params(buf));
    const Batch batch = random_batch(500, 2, 25);
    out.expect(a.predict_proba(batch.x) == b.predict_proba(batch.x), "serialization round trip is bitwise");
  }

  {
    json doc = load_config("overview");
    doc["seeds"] = json::array({3});
    const auto config = harness::parse_config(doc);
    ::setenv("SLICEKIT_THREADS", "1", 1);
    const auto first = harness::run_experiment(config);
    ::unsetenv("SLICEKIT_THREADS");
    const auto second = harness::run_experiment(config);
    double gap = first.cells.size() == second.cells.size() ? 0.0 : INFINITY;
    for (std::size_t i = 0; i < first.cells.size() && i < second.cells.size(); ++i) {
      gap = std::max(gap, std::abs(first.cells[i].record.epochs.back().valid_f1 -
                                   second.cells[i].record.epochs.back().valid_f1));
    }
    out.expect(gap <= 1e-12, "determinism of final validation F1, max gap " + fmt("%g", gap));
  }
  return out;
}

struct Criterion {
  const char* title;
  std::function<Outcome()> run;
};

const std::vector<Criterion> kCriteria = {
    {"gradient correctness", gradients},
    {"overview study", overview},
    {"ablation ordering", ablation},
    {"scaling study at d = 13", scaling},
    {"comparison with the label-model baseline", dp_comparison},
    {"noise robustness", noise},
    {"parameter efficiency", parameters},
    {"architectural invariants", invariants},
};

bool run_one(std::size_t n) {
  const Criterion& c = kCriteria.at(n - 1);
  Outcome out;
  try {
    out = c.run();
  } catch (const std::exception& e) {
    out.expect(false, std::string("error: ") + e.what());
  }
  for (const auto& line : out.details) std::printf("    %s\n", line.c_str());
  std::printf("[%s] criterion %zu: %s\n", out.pass ? "PASS" : "FAIL", n, c.title);
  std::fflush(stdout);
  return out.pass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slicekit acceptance criteria"};
  std::size_t criterion = 0;
  app.add_option("--criterion", criterion, "criterion number, 0 for all")->check(CLI::Range(0, 8));
  CLI11_PARSE(app, argc, argv);
  bool pass = true;
  for (std::size_t n = 1; n <= kCriteria.size(); ++n) {
    if (criterion == 0 || criterion == n) pass = run_one(n) && pass;
  }
  return pass ? 0 : 1;
}
