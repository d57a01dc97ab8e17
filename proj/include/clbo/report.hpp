#pragma once

#include "clbo/harness.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace clbo {

/// First line of every trace CSV.
inline constexpr const char* kTraceSchema = "# clbo-trace v1";
inline constexpr const char* kTraceHeader =
    "run,seed,iteration,n_total,provenance,value,f_min,regret,z,regime,pei_invoked,substituted";
inline constexpr const char* kSummarySchema = "clbo-summary/1";

/// One row per evaluated point, initial design included.
std::string trace_csv(const RunSummary& summary);
/// Per-iteration ensemble error decomposition rows (empty body when not recorded).
std::string ambiguity_csv(const RunSummary& summary);
/// Final-regret box statistics and per-call median regret.
std::string summary_csv(const RunSummary& summary);
/// Everything in summary_csv plus per-run traces; see docs/summary.schema.json.
std::string summary_json(const RunSummary& summary);
std::string comparison_csv(const std::string& problem, const std::vector<ComparisonRow>& rows);
/// Human-readable aligned table.
std::string comparison_table(const std::string& problem, const std::vector<ComparisonRow>& rows);

/// Writes the files for `format` into `directory` (created if needed) and
/// returns the paths written.
std::vector<std::filesystem::path> write_summary(const RunSummary& summary, const std::filesystem::path& directory,
                                                 OutputFormat format);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace clbo
