// SPDX-License-Identifier: Apache-2.0
#include "slicekit/harness/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>

#include "slicekit/baselines/train.hpp"
#include "slicekit/errors.hpp"
#include "slicekit/harness/svg.hpp"
#include "slicekit/rng.hpp"

namespace slicekit::harness {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string fmt_fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

struct TestSet {
  num::Tensor2 X;
  std::vector<int> y;
  BinaryMatrix slices;
};

struct SeedData {
  data::Dataset ds;
  train::ValidData valid;
  TestSet test;
};

SeedData prepare(const ExperimentConfig& c, std::uint64_t seed) {
  const std::uint64_t data_seed = derive_seed(seed, "data");
  const bool random = c.dataset.generator == "random_slices";
  data::SynthSpec spec = random ? data::SynthSpec::random_slices(data_seed, c.dataset.n)
                                : data::SynthSpec::perturbed_boundary(data_seed, c.dataset.n);
  spec.margin = c.dataset.margin;
  data::Dataset raw = random ? data::gen_random_slices(spec) : data::gen_perturbed_boundary(spec);

  SeedData out;
  out.ds = data::stratified_split(std::move(raw), c.dataset.fractions, derive_seed(seed, "split"));
  out.valid = train::make_valid(out.ds, data::Split::kValid);
  const auto idx = out.ds.indices(data::Split::kTest);
  out.test.X = data::gather_rows(out.ds.X, idx);
  out.test.slices = BinaryMatrix(idx.size(), out.ds.slice_count());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    out.test.y.push_back(out.ds.y[idx[r]]);
    for (std::size_t s = 0; s < out.ds.slice_count(); ++s) {
      out.test.slices.set(r, s, out.ds.slices(idx[r], s));
    }
  }
  return out;
}

slicing::SliceMatrix build_lambda(std::vector<slicing::SfSpec> specs, const data::Dataset& ds,
                                  std::uint64_t seed) {
  for (std::size_t i = 0; i < specs.size(); ++i) {
    specs[i].seed = derive_seed(derive_seed(seed, "sf", i), specs[i].name, specs[i].seed);
  }
  return slicing::build_slice_matrix(specs, ds);
}

std::vector<slicing::SfSpec> default_sfs(const ExperimentConfig& c, std::size_t truth) {
  if (!c.sfs.empty()) return c.sfs;
  std::vector<slicing::SfSpec> out;
  for (std::size_t i = 0; i < truth; ++i) {
    slicing::SfSpec sf;
    sf.name = "s_" + std::to_string(i + 1);
    sf.kind = slicing::SfKind::kNoisyTruth;
    sf.params["slice"] = static_cast<double>(i);
    sf.flip_rate = c.sf_flip_rate;
    out.push_back(std::move(sf));
  }
  return out;
}

// Per-seed outputs, merged after all workers join.
struct SeedOutput {
  std::vector<CellResult> cells;
  std::vector<Figure> figures;
  std::vector<json> pretrain;
};

class SeedRunner {
 public:
  SeedRunner(const ExperimentConfig& c, std::uint64_t seed, bool draw)
      : c_(c), seed_(seed), draw_(draw), data_(prepare(c, seed)) {}

  SeedOutput run() {
    switch (c_.experiment) {
      case Experiment::kOverview:
      case Experiment::kCompare:
        run_standard();
        break;
      case Experiment::kAblate:
        run_ablate();
        break;
      case Experiment::kScale:
        run_scale();
        break;
      case Experiment::kNoise:
        run_noise();
        break;
    }
    return std::move(out_);
  }

 private:
  struct Pretrain {
    train::Pretrained result;
    nn::BackboneConfig backbone;
  };

  Pretrain pretrain(const nn::BackboneConfig& backbone, const slicing::SliceMatrix& lambda,
                    const std::string& variant) {
    train::Hyperparams hp = c_.hp;
    hp.seed = seed_;
    const Batch batch = train::make_batch(data_.ds, lambda, data::Split::kTrain);
    Pretrain p{train::pretrain_backbone(batch, data_.valid, backbone, c_.grid, hp), backbone};
    out_.pretrain.push_back({{"seed", seed_},
                             {"variant", variant},
                             {"lr", p.result.best.lr},
                             {"l2", p.result.best.l2},
                             {"valid_f1", p.result.best_valid_f1}});
    return p;
  }

  baselines::MethodContext context(const Pretrain& p, const slicing::SliceMatrix& lambda) const {
    return {&data_.ds, &lambda, p.backbone, &p.result.backbone, p.result.best};
  }

  CellResult score(const Model& model, train::RunRecord record, const std::string& method,
                   const std::string& variant) const {
    CellResult cell;
    cell.method = method;
    cell.variant = variant;
    cell.seed = seed_;
    cell.test = metrics::slice_f1(model.predict(data_.test.X), data_.test.y, data_.test.slices);
    cell.record = std::move(record);
    cell.params = metrics::count_params(model);
    return cell;
  }

  void boundary_figure(const Model& model, const std::string& label) {
    if (!draw_) return;
    const double extent = data_.ds.spec ? data_.ds.spec->extent : 1.0;
    const num::Tensor2 grid = grid_points(c_.grid_resolution, extent);
    const auto classes = model.predict(grid);
    std::vector<data::SliceGeometry> outlines;
    if (data_.ds.spec) outlines = data_.ds.spec->slices;
    out_.figures.push_back({label + "_boundary.svg",
                            class_map_svg(classes, c_.grid_resolution, extent,
                                          label + " predicted class, seed " + std::to_string(seed_),
                                          outlines)});
  }

  sram::SramConfig sram_config(std::size_t k, std::size_t d_prime) const {
    sram::SramConfig s;
    s.k = k;
    s.d_prime = d_prime;
    s.renormalize_pred = c_.renormalize_pred;
    return s;
  }

  // Trains every configured method except the noise-only "base" model.
  void run_methods(const Pretrain& p, const slicing::SliceMatrix& lambda, const std::string& variant,
                   std::size_t d_prime, bool figures) {
    const baselines::MethodContext ctx = context(p, lambda);
    std::unique_ptr<baselines::Trained<baselines::VanillaModel>> vanilla;
    auto ensure_vanilla = [&]() -> baselines::Trained<baselines::VanillaModel>& {
      if (!vanilla) {
        vanilla = std::make_unique<baselines::Trained<baselines::VanillaModel>>(
            baselines::train_vanilla(ctx));
      }
      return *vanilla;
    };
    auto emit = [&](const Model& model, train::RunRecord record, const std::string& method) {
      out_.cells.push_back(score(model, std::move(record), method, variant));
      if (figures) boundary_figure(model, out_.cells.back().label());
    };
    for (const auto& m : c_.methods) {
      if (m == "vanilla") {
        auto& v = ensure_vanilla();
        emit(v.model, v.record, m);
      } else if (m == "sbl") {
        auto t = baselines::train_sbl(ctx, sram_config(lambda.k(), d_prime));
        emit(t.model, std::move(t.record), m);
      } else if (m == "hps") {
        auto t = baselines::train_hps(ctx);
        emit(t.model, std::move(t.record), m);
      } else if (m == "manual") {
        auto r = baselines::train_manual(ctx, ensure_vanilla().model);
        emit(r.trained.model, std::move(r.trained.record), m);
      } else if (m == "moe") {
        auto t = baselines::train_moe(ctx);
        emit(t.model, std::move(t.record), m);
      } else if (m == "dp") {
        const auto votes = baselines::slice_votes_from_rule(data_.ds, lambda);
        auto r = baselines::train_dp_baseline(ctx, votes);
        emit(r.trained.model, std::move(r.trained.record), m);
      }
    }
  }

  void run_standard() {
    const auto lambda = build_lambda(default_sfs(c_, data_.ds.slice_count()), data_.ds, seed_);
    const Pretrain p = pretrain(c_.backbone, lambda, "");
    run_methods(p, lambda, "", c_.d_prime, c_.experiment == Experiment::kOverview);
  }

  void run_ablate() {
    const auto lambda = build_lambda(default_sfs(c_, data_.ds.slice_count()), data_.ds, seed_);
    const Pretrain p = pretrain(c_.backbone, lambda, "");
    const baselines::MethodContext ctx = context(p, lambda);
    for (const auto& mode : c_.modes) {
      sram::SramConfig s = sram_config(lambda.k(), c_.d_prime);
      s.mode = sram::parse_mode(mode);
      auto t = baselines::train_sbl(ctx, s);
      out_.cells.push_back(score(t.model, std::move(t.record), "sbl", mode));
    }
  }

  void run_scale() {
    const auto lambda = build_lambda(default_sfs(c_, data_.ds.slice_count()), data_.ds, seed_);
    for (std::size_t size : c_.sizes) {
      nn::BackboneConfig bb = c_.backbone;
      for (auto& h : bb.hidden) h = size;
      bb.output_dim = size;
      const std::string variant = "d" + std::to_string(size);
      const Pretrain p = pretrain(bb, lambda, variant);
      run_methods(p, lambda, variant, size, false);
    }
  }

  void run_noise() {
    slicing::SliceMatrix base_lambda;
    base_lambda.names = {std::string(slicing::kBaseSliceName)};
    base_lambda.lambda = BinaryMatrix(data_.ds.size(), 1);
    for (std::size_t r = 0; r < data_.ds.size(); ++r) base_lambda.lambda.set(r, 0, 1);
    const Pretrain p = pretrain(c_.backbone, base_lambda, "");

    const double extent = data_.ds.spec ? data_.ds.spec->extent : 1.0;
    const num::Tensor2 grid = grid_points(c_.grid_resolution, extent);
    std::vector<data::SliceGeometry> outline;
    if (data_.ds.spec) outline.push_back(data_.ds.spec->slices.at(c_.noise_slice));

    for (const auto& m : c_.methods) {
      if (m != "base") continue;
      const auto ctx = context(p, base_lambda);
      auto t = baselines::train_sbl(ctx, sram_config(0, c_.d_prime));
      out_.cells.push_back(score(t.model, std::move(t.record), "base", ""));
    }
    for (double rate : c_.flip_rates) {
      slicing::SfSpec sf;
      sf.name = "s_" + std::to_string(c_.noise_slice + 1);
      sf.kind = slicing::SfKind::kNoisyTruth;
      sf.params["slice"] = static_cast<double>(c_.noise_slice);
      sf.flip_rate = rate;
      const auto lambda = build_lambda({sf}, data_.ds, seed_);
      const std::string variant = "rho" + fmt_g(rate);
      const auto ctx = context(p, lambda);
      for (const auto& m : c_.methods) {
        if (m != "sbl") continue;
        auto t = baselines::train_sbl(ctx, sram_config(1, c_.d_prime));
        CellResult cell = score(t.model, std::move(t.record), "sbl", variant);
        const num::Tensor2 probs = t.model.indicator_probs(grid);
        const std::vector<double> column = probs.column(0);
        const metrics::Summary s = metrics::summarize(column);
        // Population dispersion over the grid.
        const double n = static_cast<double>(column.size());
        cell.indicator_std = s.std * std::sqrt((n - 1.0) / n);
        out_.cells.push_back(std::move(cell));
        if (draw_) {
          out_.figures.push_back(
              {"indicator_" + variant + ".svg",
               heatmap_svg(column, c_.grid_resolution, extent,
                           "indicator probability, flip rate " + fmt_g(rate) + ", seed " +
                               std::to_string(seed_),
                           outline)});
        }
      }
    }
  }

  const ExperimentConfig& c_;
  std::uint64_t seed_;
  bool draw_;
  SeedData data_;
  SeedOutput out_;
};

std::vector<std::string> group_labels(const ExperimentResult& r) {
  std::vector<std::string> labels;
  for (const auto& c : r.cells) {
    if (std::find(labels.begin(), labels.end(), c.label()) == labels.end()) labels.push_back(c.label());
  }
  return labels;
}

std::vector<const CellResult*> group(const ExperimentResult& r, const std::string& label) {
  std::vector<const CellResult*> out;
  for (const auto& c : r.cells) {
    if (c.label() == label) out.push_back(&c);
  }
  return out;
}

bool has_group(const ExperimentResult& r, const std::string& label) {
  return !group(r, label).empty();
}

json summary_json(const metrics::Summary& s) { return {{"mean", s.mean}, {"std", s.std}}; }

std::string reference_for(const ExperimentResult& r, const CellResult& cell) {
  if (r.experiment == Experiment::kNoise) return "base";
  if (r.experiment == Experiment::kAblate) return "";
  return cell.variant.empty() ? "vanilla" : "vanilla-" + cell.variant;
}

void add_check(ExperimentResult& r, const ExperimentConfig& c, const std::string& name,
               const std::string& threshold_key, double value, bool at_least, double scale = 1.0) {
  const double t = c.thresholds.at(threshold_key) * scale;
  r.checks.push_back({name, value, t, at_least, at_least ? value >= t : value <= t});
}

void comparison_checks(ExperimentResult& r, const ExperimentConfig& c, const std::string& suffix) {
  const std::string sbl = "sbl" + suffix;
  if (!has_group(r, sbl)) return;
  if (has_group(r, "hps" + suffix)) {
    add_check(r, c, "sbl_minus_hps_slice" + suffix, "hps_slice_gap",
              group_mean(r, sbl, mean_slice_of) - group_mean(r, "hps" + suffix, mean_slice_of), true);
  }
  if (has_group(r, "moe" + suffix)) {
    add_check(r, c, "moe_minus_sbl_slice" + suffix, "moe_slice_gap",
              group_mean(r, "moe" + suffix, mean_slice_of) - group_mean(r, sbl, mean_slice_of), false);
  }
  if (has_group(r, "dp" + suffix)) {
    add_check(r, c, "sbl_minus_dp_overall" + suffix, "dp_overall_gap",
              group_mean(r, sbl, overall_of) - group_mean(r, "dp" + suffix, overall_of), true);
  }
}

void evaluate_checks(ExperimentResult& r, const ExperimentConfig& c) {
  switch (c.experiment) {
    case Experiment::kOverview:
      if (has_group(r, "sbl") && has_group(r, "vanilla")) {
        add_check(r, c, "sbl_minus_vanilla_overall", "overall_gain",
                  group_mean(r, "sbl", overall_of) - group_mean(r, "vanilla", overall_of), true);
        add_check(r, c, "sbl_minus_vanilla_slice", "slice_gain",
                  group_mean(r, "sbl", mean_slice_of) - group_mean(r, "vanilla", mean_slice_of), true);
      }
      break;
    case Experiment::kAblate:
      if (has_group(r, "sbl-full")) {
        const double full = group_mean(r, "sbl-full", overall_of);
        for (const auto& mode : c.modes) {
          if (mode == "full") continue;
          add_check(r, c, "full_minus_" + mode + "_overall", "ablation_slack",
                    full - group_mean(r, "sbl-" + mode, overall_of), true, -1.0);
        }
      }
      break;
    case Experiment::kCompare:
      comparison_checks(r, c, "");
      break;
    case Experiment::kScale:
      if (std::find(c.sizes.begin(), c.sizes.end(), 13) != c.sizes.end()) comparison_checks(r, c, "-d13");
      break;
    case Experiment::kNoise: {
      if (c.flip_rates.size() < 2) break;
      const auto [lo, hi] = std::minmax_element(c.flip_rates.begin(), c.flip_rates.end());
      const std::string clean = "sbl-rho" + fmt_g(*lo), noisy = "sbl-rho" + fmt_g(*hi);
      if (!has_group(r, clean)) break;
      auto std_of = [](const CellResult& cell) { return cell.indicator_std.value_or(0.0); };
      const double s_clean = group_mean(r, clean, std_of);
      const double s_noisy = group_mean(r, noisy, std_of);
      add_check(r, c, "dispersion_ratio", "dispersion_ratio",
                s_clean > 0.0 ? s_noisy / s_clean : INFINITY, false);
      if (has_group(r, "base")) {
        add_check(r, c, "noisy_minus_base_overall_abs", "overall_gap",
                  std::abs(group_mean(r, noisy, overall_of) - group_mean(r, "base", overall_of)),
                  false);
      }
      break;
    }
  }
}

void build_summary(ExperimentResult& r, const ExperimentConfig& c, const std::vector<json>& pretrain) {
  json groups = json::array();
  for (const auto& label : group_labels(r)) {
    const auto cells = group(r, label);
    std::vector<metrics::SliceReport> reports;
    std::vector<double> stds;
    for (const auto* cell : cells) {
      reports.push_back(cell->test);
      if (cell->indicator_std) stds.push_back(*cell->indicator_std);
    }
    const metrics::AggregateReport agg = metrics::aggregate(reports);
    json slices = json::array();
    for (const auto& s : agg.slices) slices.push_back(summary_json(s));
    const CellResult& first = *cells.front();
    json g = {{"label", label},
              {"method", first.method},
              {"variant", first.variant},
              {"runs", agg.runs},
              {"overall", summary_json(agg.overall)},
              {"slices", slices},
              {"mean_slice", summary_json(agg.mean_slice)},
              {"params",
               {{"backbone", first.params.backbone},
                {"heads", first.params.heads},
                {"total", first.params.total},
                {"asymptotic", first.params.asymptotic}}}};
    const std::string ref = reference_for(r, first);
    if (!ref.empty() && has_group(r, ref)) {
      json lift = json::array();
      const auto ref_cells = group(r, ref);
      std::vector<metrics::SliceReport> ref_reports;
      for (const auto* rc : ref_cells) ref_reports.push_back(rc->test);
      const auto ref_agg = metrics::aggregate(ref_reports);
      for (std::size_t s = 0; s < agg.slices.size() && s < ref_agg.slices.size(); ++s) {
        lift.push_back(agg.slices[s].mean - ref_agg.slices[s].mean);
      }
      g["lift"] = lift;
      g["lift_reference"] = ref;
    }
    if (!stds.empty()) g["indicator_std"] = summary_json(metrics::summarize(stds));
    groups.push_back(std::move(g));
  }
  json checks = json::array();
  for (const auto& ch : r.checks) {
    checks.push_back({{"name", ch.name},
                      {"value", ch.value},
                      {"threshold", ch.threshold},
                      {"op", ch.at_least ? ">=" : "<="},
                      {"pass", ch.pass}});
  }
  r.summary = {{"schema_version", kSchemaVersion},
               {"experiment", std::string(to_string(c.experiment))},
               {"seeds", c.seeds},
               {"config", to_json(c)},
               {"groups", groups},
               {"checks", checks},
               {"pretrain", pretrain}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace

std::string CellResult::label() const { return variant.empty() ? method : method + "-" + variant; }

double overall_of(const CellResult& c) { return c.test.overall; }
double mean_slice_of(const CellResult& c) { return c.test.mean_slice(); }

double group_mean(const ExperimentResult& result, const std::string& label,
                  double (*metric)(const CellResult&)) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& c : result.cells) {
    if (c.label() != label) continue;
    sum += metric(c);
    ++n;
  }
  if (n == 0) throw EvaluationError("no results for '" + label + "'");
  return sum / static_cast<double>(n);
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  if (config.seeds.empty()) throw ConfigError("config: seeds must be nonempty");
  std::vector<SeedOutput> outputs(config.seeds.size());
  train::parallel_for(config.seeds.size(), [&](std::size_t i) {
    SeedRunner runner(config, config.seeds[i], i == 0);
    outputs[i] = runner.run();
  });

  ExperimentResult result;
  result.experiment = config.experiment;
  std::vector<json> pretrain;
  for (auto& o : outputs) {
    for (auto& c : o.cells) result.cells.push_back(std::move(c));
    for (auto& f : o.figures) result.figures.push_back(std::move(f));
    for (auto& p : o.pretrain) pretrain.push_back(std::move(p));
  }
  if (config.experiment == Experiment::kScale) {
    std::vector<double> x(config.sizes.begin(), config.sizes.end());
    for (const bool slice : {true, false}) {
      std::vector<Series> series;
      for (const auto& m : config.methods) {
        Series s{m, {}};
        for (auto size : config.sizes) {
          s.y.push_back(group_mean(result, m + "-d" + std::to_string(size),
                                   slice ? mean_slice_of : overall_of));
        }
        series.push_back(std::move(s));
      }
      const std::string what = slice ? "mean slice F1" : "overall F1";
      result.figures.push_back({slice ? "scale_slice_f1.svg" : "scale_overall_f1.svg",
                                line_chart_svg(what + " vs representation size", x, series,
                                               "hidden size d = d'", what)});
    }
  }
  evaluate_checks(result, config);
  build_summary(result, config, pretrain);
  return result;
}

std::string summary_csv(const ExperimentResult& result) {
  std::size_t k = 0;
  for (const auto& c : result.cells) k = std::max(k, c.test.slice_f1.size());
  std::string out = "experiment,method,variant,seed,overall";
  for (std::size_t s = 0; s < k; ++s) out += ",s_" + std::to_string(s + 1);
  out += ",mean_slice,params,selected_epoch,indicator_std\n";
  const std::string exp(to_string(result.experiment));
  for (const auto& c : result.cells) {
    out += exp + "," + c.method + "," + c.variant + "," + std::to_string(c.seed) + "," +
           fmt_fixed(c.test.overall);
    for (std::size_t s = 0; s < k; ++s) {
      out += ",";
      if (s < c.test.slice_f1.size()) out += fmt_fixed(c.test.slice_f1[s]);
    }
    out += "," + fmt_fixed(c.test.mean_slice()) + "," + std::to_string(c.params.total) + "," +
           std::to_string(c.record.selected_epoch) + ",";
    if (c.indicator_std) out += fmt_fixed(*c.indicator_std);
    out += "\n";
  }
  return out;
}

void write_outputs(const ExperimentResult& result, const std::string& out_dir) {
  const fs::path root = fs::path(out_dir) / std::string(to_string(result.experiment));
  for (const auto& c : result.cells) {
    const fs::path dir = root / c.label() / std::to_string(c.seed);
    fs::create_directories(dir);
    std::ofstream out(dir / "record.jsonl", std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + (dir / "record.jsonl").string() + "'");
    train::write_jsonl(c.record, out);
  }
  fs::create_directories(root / "figures");
  for (const auto& f : result.figures) write_text(root / "figures" / f.name, f.svg);
  write_text(root / "summary.csv", summary_csv(result));
  write_text(root / "summary.json", result.summary.dump(2) + "\n");
}

bool all_pass(const ExperimentResult& result) {
  return std::all_of(result.checks.begin(), result.checks.end(),
                     [](const Check& c) { return c.pass; });
}

}  // namespace slicekit::harness
