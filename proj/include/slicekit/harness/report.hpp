// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include <json.hpp>

namespace slicekit::harness {

/// Collects every {dir}/<experiment>/summary.json into one document.
/// Throws ConfigError when the directory holds no summaries.
nlohmann::json consolidate(const std::string& dir);

/// Fixed-width table of overall and slice F1 per group, plus check results.
std::string render_table(const nlohmann::json& report);

/// Writes {dir}/report.json and {dir}/report.txt; returns the table text.
std::string write_report(const std::string& dir);

}  // namespace slicekit::harness
