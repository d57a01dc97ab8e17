#include "clbo/harness.hpp"

#include "clbo/errors.hpp"
#include "clbo/report.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace clbo {

void ExperimentConfig::validate() const {
    if (repeats < 1) throw ConfigError("repeats", "must be at least 1");
    const auto names = problem_names();
    if (std::find(names.begin(), names.end(), problem) == names.end())
        throw ConfigError("problem", "unknown problem '" + problem + "'");
    if (failure_rate && !(*failure_rate >= 0.0 && *failure_rate < 1.0))
        throw ConfigError("failure_rate", "must lie in [0, 1)");
    if (threads < 0) throw ConfigError("threads", "must be non-negative");
    if (loop.ambiguity_points < 0) throw ConfigError("ambiguity_points", "must be non-negative");
    if (optimizer.batch_size < 1) throw ConfigError("optimizer", "batch size must be at least 1");

    const int d = make_problem(problem).dimension();
    ClboConfig effective = loop;
    effective.m_subsets = optimizer.m_subsets;
    effective.use_sogp = optimizer.use_sogp;
    const int n_init = effective.resolved_n_init(d);
    const int budget = effective.resolved_n_budget(d);
    if (loop.n_init < 0) throw ConfigError("n_init", "must be non-negative");
    if (loop.n_budget < 0) throw ConfigError("budget", "must be non-negative");
    if (loop.t_max < 0) throw ConfigError("t_max", "must be non-negative");
    if (n_init < 2) throw ConfigError("n_init", "at least 2 initial points are needed");
    if (budget <= n_init) throw ConfigError("budget", "must exceed the initial design size");
    if (!(loop.epsilon >= 0.0)) throw ConfigError("epsilon", "must be non-negative");
    if (loop.fit.starts < 1) throw ConfigError("fit_starts", "must be at least 1");
    if (loop.refit_starts < 0) throw ConfigError("refit_starts", "must be non-negative");
    if (optimizer.kind == OptimizerKind::Clbo || optimizer.kind == OptimizerKind::Msbo) {
        try {
            effective.validate(d);
        } catch (const ContractViolation& e) {
            throw ConfigError("optimizer", e.what());
        }
    }
}

double quantile(std::vector<double> values, double probability) {
    require(!values.empty(), "quantile of an empty sample");
    require(probability >= 0.0 && probability <= 1.0, "quantile probability outside [0, 1]");
    std::sort(values.begin(), values.end());
    const double h = probability * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double median(std::vector<double> values) {
    require(!values.empty(), "median of an empty sample");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

BoxStats BoxStats::of(std::vector<double> values) {
    require(!values.empty(), "box statistics of an empty sample");
    std::sort(values.begin(), values.end());
    BoxStats stats;
    stats.min = values.front();
    stats.max = values.back();
    stats.q1 = quantile(values, 0.25);
    stats.median = clbo::median(values);
    stats.q3 = quantile(values, 0.75);
    return stats;
}

RunSummary summarize(std::vector<OptimizationResult> runs) {
    require(!runs.empty(), "summarize needs at least one run");
    RunSummary summary;
    summary.problem = runs.front().problem;
    summary.optimizer = runs.front().optimizer;
    summary.known_optimum = runs.front().known_optimum;

    std::vector<double> finals;
    std::size_t shortest = runs.front().best_by_evaluation.size();
    for (const auto& run : runs) {
        require(run.problem == summary.problem && run.optimizer == summary.optimizer,
                "summarize mixes problems or optimizers");
        summary.regret_traces.push_back(run.regret_by_evaluation());
        shortest = std::min(shortest, run.best_by_evaluation.size());
        finals.push_back(run.final_regret());
        summary.pei_invocations += run.pei_invocations;
        summary.wall_seconds.push_back(run.wall_seconds);
        for (const auto& it : run.history)
            for (const auto& q : it.queries)
                if (q.provenance.source != Provenance::Source::Initial) ++summary.regime_counts[std::string(to_string(q.regime))];
    }
    summary.final_regret = BoxStats::of(finals);

    summary.median_trace.resize(shortest);
    std::vector<double> column(summary.regret_traces.size());
    for (std::size_t k = 0; k < shortest; ++k) {
        for (std::size_t r = 0; r < summary.regret_traces.size(); ++r) column[r] = summary.regret_traces[r][k];
        summary.median_trace[k] = median(column);
    }
    summary.runs = std::move(runs);
    return summary;
}

std::vector<OptimizationResult> run_repeats(const BenchmarkProblem& problem, const OptimizerSpec& spec,
                                            const ClboConfig& loop, int repeats, std::uint64_t base_seed,
                                            int threads) {
    require(repeats >= 1, "repeats must be at least 1");
    std::vector<OptimizationResult> results(static_cast<std::size_t>(repeats));
    int workers = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    workers = std::min(workers, repeats);

    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (int k = next++; k < repeats; k = next++) {
            try {
                ClboConfig config = loop;
                config.seed = base_seed + static_cast<std::uint64_t>(k);
                results[static_cast<std::size_t>(k)] = run_optimizer(problem, spec, config);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);
    return results;
}

RunSummary run_experiment(const ExperimentConfig& config) {
    config.validate();
    BenchmarkProblem problem = make_problem(config.problem);
    if (config.failure_rate) problem.failure_rate = *config.failure_rate;
    return summarize(
        run_repeats(problem, config.optimizer, config.loop, config.repeats, config.base_seed, config.threads));
}

RunSummary run_and_write(const ExperimentConfig& config) {
    RunSummary summary = run_experiment(config);
    write_summary(summary, config.output_dir, config.format);
    return summary;
}

std::vector<ComparisonRow> compare_summaries(const std::vector<RunSummary>& summaries) {
    std::vector<ComparisonRow> rows;
    for (const auto& s : summaries) rows.push_back({s.optimizer, s.final_regret, 0});
    for (auto& row : rows) {
        row.rank = 1 + static_cast<int>(std::count_if(rows.begin(), rows.end(), [&](const ComparisonRow& other) {
                       return other.final_regret.median < row.final_regret.median;
                   }));
    }
    return rows;
}

}  // namespace clbo
