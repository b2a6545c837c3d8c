// SPDX-License-Identifier: Apache-2.0
#include "slicekit/harness/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "slicekit/errors.hpp"
#include "slicekit/harness/config.hpp"

namespace slicekit::harness {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::array<const char*, 5> kOrder{"overview", "ablate", "scale", "noise", "compare"};

std::string cell(double mean, double std) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%6.2f (%4.2f)", mean, std);
  return buf;
}

}  // namespace

json consolidate(const std::string& dir) {
  json experiments = json::object();
  for (const char* name : kOrder) {
    const fs::path path = fs::path(dir) / name / "summary.json";
    if (!fs::exists(path)) continue;
    std::ifstream in(path);
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw ConfigError("report: '" + path.string() + "' is not valid JSON");
    experiments[name] = {{"groups", doc.value("groups", json::array())},
                         {"checks", doc.value("checks", json::array())},
                         {"seeds", doc.value("seeds", json::array())}};
  }
  if (experiments.empty()) throw ConfigError("report: no summary.json under '" + dir + "'");
  return {{"schema_version", kSchemaVersion}, {"experiments", experiments}};
}

std::string render_table(const json& report) {
  std::string out;
  char line[256];
  for (const auto& [name, exp] : report.at("experiments").items()) {
    out += "== " + name + " (" + std::to_string(exp.at("seeds").size()) + " seeds)\n";
    std::snprintf(line, sizeof line, "%-24s %-15s %-15s %s\n", "group", "overall", "mean slice",
                  "params");
    out += line;
    for (const auto& g : exp.at("groups")) {
      std::snprintf(line, sizeof line, "%-24s %-15s %-15s %zu\n",
                    g.at("label").get<std::string>().c_str(),
                    cell(g["overall"]["mean"], g["overall"]["std"]).c_str(),
                    cell(g["mean_slice"]["mean"], g["mean_slice"]["std"]).c_str(),
                    g["params"]["total"].get<std::size_t>());
      out += line;
    }
    for (const auto& c : exp.at("checks")) {
      std::snprintf(line, sizeof line, "  [%s] %s = %.3f (%s %.3f)\n",
                    c.at("pass").get<bool>() ? "PASS" : "FAIL",
                    c.at("name").get<std::string>().c_str(), c.at("value").get<double>(),
                    c.at("op").get<std::string>().c_str(), c.at("threshold").get<double>());
      out += line;
    }
    out += "\n";
  }
  return out;
}

std::string write_report(const std::string& dir) {
  const json report = consolidate(dir);
  const std::string table = render_table(report);
  std::ofstream(fs::path(dir) / "report.json") << report.dump(2) << "\n";
  std::ofstream(fs::path(dir) / "report.txt") << table;
  return table;
}

}  // namespace slicekit::harness
