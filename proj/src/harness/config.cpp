// SPDX-License-Identifier: Apache-2.0
#include "slicekit/harness/config.hpp"

#include <fstream>
#include <set>

#include "slicekit/errors.hpp"
#include "slicekit/model_sram.hpp"

namespace slicekit::harness {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 5> kExperimentNames{"overview", "ablate", "scale", "noise",
                                                           "compare"};

const std::set<std::string> kMethods{"vanilla", "sbl", "hps", "manual", "moe", "dp", "base"};

std::vector<std::uint64_t> first_seeds(std::size_t n) {
  std::vector<std::uint64_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = i;
  return out;
}

[[noreturn]] void fail(const std::string& what) { throw ConfigError("config: " + what); }

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) fail(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (const char* k : keys) known = known || key == k;
    if (!known) fail("unknown key '" + (where.empty() ? key : where + "." + key) + "'");
  }
}

template <typename T>
T get(const json& obj, const char* key, const std::string& where, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    fail("bad value for '" + (where.empty() ? std::string(key) : where + "." + key) + "'");
  }
}

slicing::SfSpec parse_sf(const json& j, std::size_t index) {
  const std::string where = "sfs[" + std::to_string(index) + "]";
  check_keys(j, where, {"name", "kind", "params", "flip_rate", "seed"});
  slicing::SfSpec sf;
  sf.name = get<std::string>(j, "name", where, "sf_" + std::to_string(index + 1));
  try {
    sf.kind = slicing::parse_sf_kind(get<std::string>(j, "kind", where, ""));
  } catch (const std::exception&) {
    fail(where + ".kind must be disc, rect, halfplane or noisy_truth");
  }
  sf.params = get<std::map<std::string, double>>(j, "params", where, {});
  sf.flip_rate = get<double>(j, "flip_rate", where, 0.0);
  sf.seed = get<std::uint64_t>(j, "seed", where, 0);
  if (sf.flip_rate < 0.0 || sf.flip_rate > 1.0) fail(where + ".flip_rate outside [0, 1]");
  if (sf.kind == slicing::SfKind::kNoisyTruth) {
    if (!sf.params.contains("slice")) fail(where + " needs params.slice");
  } else {
    try {
      (void)slicing::make_function(sf);
    } catch (const std::exception& e) {
      fail(where + ": " + e.what());
    }
  }
  return sf;
}

json sf_to_json(const slicing::SfSpec& sf) {
  return {{"name", sf.name},
          {"kind", std::string(slicing::to_string(sf.kind))},
          {"params", sf.params},
          {"flip_rate", sf.flip_rate},
          {"seed", sf.seed}};
}

std::size_t truth_slices(const DatasetConfig& d) {
  return d.generator == "random_slices" ? 4 : 2;
}

}  // namespace

std::string_view to_string(Experiment e) { return kExperimentNames.at(static_cast<std::size_t>(e)); }

Experiment parse_experiment(std::string_view s) {
  for (std::size_t i = 0; i < kExperimentNames.size(); ++i) {
    if (kExperimentNames[i] == s) return static_cast<Experiment>(i);
  }
  fail("unknown experiment '" + std::string(s) + "'");
}

ExperimentConfig default_config(Experiment e) {
  ExperimentConfig c;
  c.experiment = e;
  c.seeds = first_seeds(5);
  switch (e) {
    case Experiment::kOverview:
      c.methods = {"vanilla", "sbl"};
      c.thresholds = {{"overall_gain", 0.5}, {"slice_gain", 20.0}};
      break;
    case Experiment::kAblate:
      c.dataset.generator = "random_slices";
      c.sf_flip_rate = 0.05;
      c.methods = {"sbl"};
      c.modes = {"full", "uniform", "indicator_only", "confidence_only"};
      c.seeds = first_seeds(10);
      c.thresholds = {{"ablation_slack", 0.5}};
      break;
    case Experiment::kScale:
      c.methods = {"vanilla", "dp", "hps", "moe", "sbl"};
      c.sizes = {2, 4, 8, 13, 16, 32};
      c.thresholds = {{"hps_slice_gap", 5.0}, {"moe_slice_gap", 10.0}, {"dp_overall_gap", 0.0}};
      break;
    case Experiment::kNoise:
      c.methods = {"base", "sbl"};
      c.flip_rates = {0.0, 0.4, 0.8};
      c.thresholds = {{"dispersion_ratio", 0.5}, {"overall_gap", 2.0}};
      break;
    case Experiment::kCompare:
      c.methods = {"vanilla", "dp", "hps", "manual", "moe", "sbl"};
      c.thresholds = {{"hps_slice_gap", 5.0}, {"moe_slice_gap", 10.0}, {"dp_overall_gap", 0.0}};
      break;
  }
  return c;
}

ExperimentConfig parse_config(const json& doc) {
  check_keys(doc, "", {"schema_version", "experiment", "dataset", "sfs", "sf_flip_rate", "methods",
                       "grid", "train", "backbone", "sram", "modes", "sizes", "flip_rates",
                       "noise_slice", "grid_resolution", "seeds", "out", "thresholds"});
  const int version = get<int>(doc, "schema_version", "", -1);
  if (version != kSchemaVersion) {
    fail("schema_version must be " + std::to_string(kSchemaVersion));
  }
  if (!doc.contains("experiment")) fail("missing 'experiment'");
  ExperimentConfig c = default_config(parse_experiment(get<std::string>(doc, "experiment", "", "")));

  if (doc.contains("dataset")) {
    const json& d = doc.at("dataset");
    check_keys(d, "dataset", {"generator", "n", "margin", "fractions"});
    c.dataset.generator = get<std::string>(d, "generator", "dataset", c.dataset.generator);
    c.dataset.n = get<std::size_t>(d, "n", "dataset", c.dataset.n);
    c.dataset.margin = get<double>(d, "margin", "dataset", c.dataset.margin);
    c.dataset.fractions = get<std::array<double, 3>>(d, "fractions", "dataset", c.dataset.fractions);
  }
  if (c.dataset.generator != "perturbed_boundary" && c.dataset.generator != "random_slices") {
    fail("dataset.generator must be perturbed_boundary or random_slices");
  }
  if (c.dataset.n == 0) fail("dataset.n must be positive");

  c.sf_flip_rate = get<double>(doc, "sf_flip_rate", "", c.sf_flip_rate);
  if (c.sf_flip_rate < 0.0 || c.sf_flip_rate > 1.0) fail("sf_flip_rate outside [0, 1]");
  if (doc.contains("sfs")) {
    const json& sfs = doc.at("sfs");
    if (!sfs.is_array()) fail("sfs must be an array");
    for (std::size_t i = 0; i < sfs.size(); ++i) c.sfs.push_back(parse_sf(sfs[i], i));
  }
  for (const auto& sf : c.sfs) {
    if (sf.kind == slicing::SfKind::kNoisyTruth) {
      const double s = sf.params.at("slice");
      if (s < 0 || s >= static_cast<double>(truth_slices(c.dataset)) || s != static_cast<std::size_t>(s)) {
        fail("SF '" + sf.name + "' references a slice the generator does not produce");
      }
    }
  }

  c.methods = get<std::vector<std::string>>(doc, "methods", "", c.methods);
  if (c.methods.empty()) fail("methods must be nonempty");
  for (const auto& m : c.methods) {
    if (!kMethods.contains(m)) fail("unknown method '" + m + "'");
  }

  if (doc.contains("grid")) {
    const json& g = doc.at("grid");
    check_keys(g, "grid", {"lr", "l2"});
    c.grid.lr = get<std::vector<double>>(g, "lr", "grid", c.grid.lr);
    c.grid.l2 = get<std::vector<double>>(g, "l2", "grid", c.grid.l2);
  }
  if (c.grid.lr.empty() || c.grid.l2.empty()) fail("grid.lr and grid.l2 must be nonempty");

  if (doc.contains("train")) {
    const json& t = doc.at("train");
    check_keys(t, "train", {"batch_size", "pretrain_epochs", "finetune_epochs", "optimizer"});
    c.hp.batch_size = get<std::size_t>(t, "batch_size", "train", c.hp.batch_size);
    c.hp.pretrain_epochs = get<std::size_t>(t, "pretrain_epochs", "train", c.hp.pretrain_epochs);
    c.hp.finetune_epochs = get<std::size_t>(t, "finetune_epochs", "train", c.hp.finetune_epochs);
    try {
      c.hp.optimizer = train::parse_optimizer(
          get<std::string>(t, "optimizer", "train", std::string(train::to_string(c.hp.optimizer))));
    } catch (const std::exception&) {
      fail("train.optimizer must be adam or sgd");
    }
  }
  for (double lr : c.grid.lr) {
    train::Hyperparams probe = c.hp;
    probe.lr = lr;
    for (double l2 : c.grid.l2) {
      probe.l2 = l2;
      try {
        train::validate(probe);
      } catch (const std::exception& e) {
        fail(e.what());
      }
    }
  }

  if (doc.contains("backbone")) {
    const json& b = doc.at("backbone");
    check_keys(b, "backbone", {"hidden", "output_dim", "activation"});
    c.backbone.hidden = get<std::vector<std::size_t>>(b, "hidden", "backbone", c.backbone.hidden);
    c.backbone.output_dim = get<std::size_t>(b, "output_dim", "backbone", c.backbone.output_dim);
    const auto act = get<std::string>(b, "activation", "backbone", "relu");
    if (act == "relu") {
      c.backbone.nonlinearity = nn::Activation::kRelu;
    } else if (act == "sigmoid") {
      c.backbone.nonlinearity = nn::Activation::kSigmoid;
    } else {
      fail("backbone.activation must be relu or sigmoid");
    }
  }
  if (c.backbone.output_dim == 0) fail("backbone.output_dim must be positive");
  for (auto h : c.backbone.hidden) {
    if (h == 0) fail("backbone.hidden sizes must be positive");
  }

  if (doc.contains("sram")) {
    const json& s = doc.at("sram");
    check_keys(s, "sram", {"d_prime", "renormalize_pred"});
    c.d_prime = get<std::size_t>(s, "d_prime", "sram", c.d_prime);
    c.renormalize_pred = get<bool>(s, "renormalize_pred", "sram", c.renormalize_pred);
  }
  if (c.d_prime == 0) fail("sram.d_prime must be positive");

  c.modes = get<std::vector<std::string>>(doc, "modes", "", c.modes);
  for (const auto& m : c.modes) {
    try {
      (void)sram::parse_mode(m);
    } catch (const std::exception&) {
      fail("unknown reweighting mode '" + m + "'");
    }
  }
  c.sizes = get<std::vector<std::size_t>>(doc, "sizes", "", c.sizes);
  for (auto s : c.sizes) {
    if (s == 0) fail("sizes must be positive");
  }
  c.flip_rates = get<std::vector<double>>(doc, "flip_rates", "", c.flip_rates);
  for (double r : c.flip_rates) {
    if (r < 0.0 || r > 1.0) fail("flip_rates outside [0, 1]");
  }
  c.noise_slice = get<std::size_t>(doc, "noise_slice", "", c.noise_slice);
  if (c.noise_slice >= truth_slices(c.dataset)) fail("noise_slice out of range");
  c.grid_resolution = get<std::size_t>(doc, "grid_resolution", "", c.grid_resolution);
  if (c.grid_resolution < 2) fail("grid_resolution must be at least 2");

  if (doc.contains("seeds")) {
    const json& s = doc.at("seeds");
    if (s.is_number_integer()) {
      if (s.get<long long>() < 0) fail("seeds must be a count or a list");
      c.seeds = first_seeds(s.get<std::size_t>());
    } else {
      c.seeds = get<std::vector<std::uint64_t>>(doc, "seeds", "", {});
    }
  }
  if (c.seeds.empty()) fail("seeds must be nonempty");

  c.out = get<std::string>(doc, "out", "", c.out);
  if (doc.contains("thresholds")) {
    for (const auto& [k, v] : get<std::map<std::string, double>>(doc, "thresholds", "", {})) {
      if (!c.thresholds.contains(k)) fail("unknown threshold '" + k + "'");
      c.thresholds[k] = v;
    }
  }

  switch (c.experiment) {
    case Experiment::kAblate:
      if (c.modes.empty()) fail("ablate needs at least one mode");
      break;
    case Experiment::kScale:
      if (c.sizes.empty()) fail("scale needs at least one size");
      break;
    case Experiment::kNoise:
      if (c.flip_rates.empty()) fail("noise needs at least one flip rate");
      for (const auto& m : c.methods) {
        if (m != "base" && m != "sbl") fail("noise supports only the base and sbl methods");
      }
      break;
    default:
      break;
  }
  return c;
}

json to_json(const ExperimentConfig& c) {
  json sfs = json::array();
  for (const auto& sf : c.sfs) sfs.push_back(sf_to_json(sf));
  return {{"schema_version", kSchemaVersion},
          {"experiment", std::string(to_string(c.experiment))},
          {"dataset",
           {{"generator", c.dataset.generator},
            {"n", c.dataset.n},
            {"margin", c.dataset.margin},
            {"fractions", c.dataset.fractions}}},
          {"sfs", sfs},
          {"sf_flip_rate", c.sf_flip_rate},
          {"methods", c.methods},
          {"grid", {{"lr", c.grid.lr}, {"l2", c.grid.l2}}},
          {"train",
           {{"batch_size", c.hp.batch_size},
            {"pretrain_epochs", c.hp.pretrain_epochs},
            {"finetune_epochs", c.hp.finetune_epochs},
            {"optimizer", std::string(train::to_string(c.hp.optimizer))}}},
          {"backbone",
           {{"hidden", c.backbone.hidden},
            {"output_dim", c.backbone.output_dim},
            {"activation", c.backbone.nonlinearity == nn::Activation::kRelu ? "relu" : "sigmoid"}}},
          {"sram", {{"d_prime", c.d_prime}, {"renormalize_pred", c.renormalize_pred}}},
          {"modes", c.modes},
          {"sizes", c.sizes},
          {"flip_rates", c.flip_rates},
          {"noise_slice", c.noise_slice},
          {"grid_resolution", c.grid_resolution},
          {"seeds", c.seeds},
          {"out", c.out},
          {"thresholds", c.thresholds}};
}

void apply_override(json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    fail("override '" + std::string(assignment) + "' is not key=value");
  }
  const std::string path(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) fail("override path '" + path + "' has an empty component");
    if (!node->is_object()) fail("override path '" + path + "' crosses a non-object");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

json read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open '" + path + "'");
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) fail("'" + path + "' is not valid JSON");
  return doc;
}

}  // namespace slicekit::harness
