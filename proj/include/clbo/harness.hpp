#pragma once

#include "clbo/baselines.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace clbo {

enum class OutputFormat { Csv, Json };

/// One experiment: an optimizer on a problem, repeated with seeds base_seed + k.
struct ExperimentConfig {
    std::string name = "experiment";
    std::string problem;
    OptimizerSpec optimizer;
    int repeats = 20;
    std::uint64_t base_seed = 0;
    std::filesystem::path output_dir;
    OutputFormat format = OutputFormat::Csv;
    /// Loop settings; its seed field is overwritten per repeat.
    ClboConfig loop;
    std::optional<double> failure_rate;
    /// Worker threads for repeats; 0 uses the hardware concurrency.
    int threads = 0;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Five-number summary; quartiles by linear interpolation between order
/// statistics, so an even-sized median is the mean of the middle two.
struct BoxStats {
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;

    static BoxStats of(std::vector<double> values);
};

double quantile(std::vector<double> values, double probability);
double median(std::vector<double> values);

struct RunSummary {
    std::string problem;
    std::string optimizer;
    std::optional<double> known_optimum;
    std::vector<OptimizationResult> runs;
    /// Regret after each function call, per run.
    std::vector<std::vector<double>> regret_traces;
    /// Per-call median over runs, up to the shortest run.
    std::vector<double> median_trace;
    BoxStats final_regret;
    int pei_invocations = 0;
    std::map<std::string, int> regime_counts;
    std::vector<double> wall_seconds;
};

/// Aggregates finished runs (all of the same problem and optimizer).
RunSummary summarize(std::vector<OptimizationResult> runs);

/// Runs `repeats` seeds concurrently; results are ordered by seed.
std::vector<OptimizationResult> run_repeats(const BenchmarkProblem& problem, const OptimizerSpec& spec,
                                            const ClboConfig& loop, int repeats, std::uint64_t base_seed,
                                            int threads = 0);

/// Validates, runs every repeat and aggregates. Does not write files.
RunSummary run_experiment(const ExperimentConfig& config);

/// Validates, runs, and writes the configured output files.
RunSummary run_and_write(const ExperimentConfig& config);

struct ComparisonRow {
    std::string optimizer;
    BoxStats final_regret;
    /// 1-based rank of the median final regret (ties share the better rank).
    int rank = 0;
};

std::vector<ComparisonRow> compare_summaries(const std::vector<RunSummary>& summaries);

}  // namespace clbo
