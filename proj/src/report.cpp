#include "clbo/report.hpp"

#include "clbo/errors.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace clbo {
namespace {

std::string number(double v) {
    if (std::isnan(v)) return "";
    return fmt::format("{}", v);
}

nlohmann::json json_number(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

nlohmann::json box_json(const BoxStats& b) {
    return {{"min", b.min}, {"q1", b.q1}, {"median", b.median}, {"q3", b.q3}, {"max", b.max}};
}

}  // namespace

std::string trace_csv(const RunSummary& summary) {
    std::string out = fmt::format("{}\n{}\n", kTraceSchema, kTraceHeader);
    for (std::size_t r = 0; r < summary.runs.size(); ++r) {
        const auto& run = summary.runs[r];
        int n = 0;
        for (const auto& it : run.history) {
            for (const auto& q : it.queries) {
                const double f_min = run.best_by_evaluation[static_cast<std::size_t>(n)];
                ++n;
                const bool initial = q.provenance.source == Provenance::Source::Initial;
                out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", r, run.seed, it.iteration, n,
                                   q.provenance.label(), number(q.value), number(f_min), number(run.regret(f_min)),
                                   initial ? "" : number(q.z), initial ? "" : to_string(q.regime),
                                   q.pei_invoked ? 1 : 0, q.substituted ? 1 : 0);
            }
        }
    }
    return out;
}

std::string ambiguity_csv(const RunSummary& summary) {
    std::string out = "# clbo-ambiguity v1\nrun,seed,iteration,n_total,models,ensemble_error,individual_error,diversity\n";
    for (std::size_t r = 0; r < summary.runs.size(); ++r) {
        const auto& run = summary.runs[r];
        for (const auto& it : run.history) {
            if (!it.ambiguity) continue;
            const auto& a = *it.ambiguity;
            out += fmt::format("{},{},{},{},{},{},{},{}\n", r, run.seed, it.iteration, it.n_total, a.models,
                               number(a.ensemble_error), number(a.individual_error), number(a.diversity));
        }
    }
    return out;
}

std::string summary_csv(const RunSummary& summary) {
    auto count = [&](const char* regime) {
        const auto it = summary.regime_counts.find(regime);
        return it == summary.regime_counts.end() ? 0 : it->second;
    };
    const auto& b = summary.final_regret;
    std::string out =
        "# clbo-summary v1\n"
        "problem,optimizer,runs,regret_min,regret_q1,regret_median,regret_q3,regret_max,pei_invocations,"
        "balanced,over_exploitation,over_exploration,undefined\n";
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", summary.problem, summary.optimizer,
                       summary.runs.size(), number(b.min), number(b.q1), number(b.median), number(b.q3),
                       number(b.max), summary.pei_invocations, count("balanced"), count("over_exploitation"),
                       count("over_exploration"), count("undefined"));
    out += "\nn_total,median_regret\n";
    for (std::size_t k = 0; k < summary.median_trace.size(); ++k)
        out += fmt::format("{},{}\n", k + 1, number(summary.median_trace[k]));
    return out;
}

std::string summary_json(const RunSummary& summary) {
    nlohmann::json runs = nlohmann::json::array();
    for (std::size_t r = 0; r < summary.runs.size(); ++r) {
        const auto& run = summary.runs[r];
        nlohmann::json iterations = nlohmann::json::array();
        for (const auto& it : run.history) {
            nlohmann::json entry = {{"iteration", it.iteration}, {"n_total", it.n_total}, {"f_min", it.f_min}};
            if (it.ambiguity) {
                entry["ambiguity"] = {{"models", it.ambiguity->models},
                                      {"ensemble_error", json_number(it.ambiguity->ensemble_error)},
                                      {"individual_error", json_number(it.ambiguity->individual_error)},
                                      {"diversity", json_number(it.ambiguity->diversity)}};
            }
            iterations.push_back(std::move(entry));
        }
        nlohmann::json regret = nlohmann::json::array();
        for (double v : summary.regret_traces[r]) regret.push_back(json_number(v));
        runs.push_back({{"run", r},
                        {"seed", run.seed},
                        {"final_regret", json_number(run.final_regret())},
                        {"f_min", run.incumbent.f_min},
                        {"x_min", std::vector<double>(run.incumbent.x_min.begin(), run.incumbent.x_min.end())},
                        {"n_total", run.n_total},
                        {"iterations", run.t_total},
                        {"evaluation_failures", run.evaluation_failures},
                        {"pei_invocations", run.pei_invocations},
                        {"regret_by_call", std::move(regret)},
                        {"history", std::move(iterations)}});
    }
    nlohmann::json median = nlohmann::json::array();
    for (double v : summary.median_trace) median.push_back(json_number(v));
    nlohmann::json doc = {{"schema", kSummarySchema},
                          {"problem", summary.problem},
                          {"optimizer", summary.optimizer},
                          {"known_optimum", summary.known_optimum ? nlohmann::json(*summary.known_optimum)
                                                                  : nlohmann::json(nullptr)},
                          {"final_regret", box_json(summary.final_regret)},
                          {"pei_invocations", summary.pei_invocations},
                          {"regime_counts", summary.regime_counts},
                          {"median_regret_by_call", std::move(median)},
                          {"runs", std::move(runs)}};
    return doc.dump(2) + "\n";
}

std::string comparison_csv(const std::string& problem, const std::vector<ComparisonRow>& rows) {
    std::string out = "# clbo-compare v1\nproblem,optimizer,rank,regret_min,regret_q1,regret_median,regret_q3,regret_max\n";
    for (const auto& row : rows) {
        const auto& b = row.final_regret;
        out += fmt::format("{},{},{},{},{},{},{},{}\n", problem, row.optimizer, row.rank, number(b.min),
                           number(b.q1), number(b.median), number(b.q3), number(b.max));
    }
    return out;
}

std::string comparison_table(const std::string& problem, const std::vector<ComparisonRow>& rows) {
    std::size_t width = 9;
    for (const auto& row : rows) width = std::max(width, row.optimizer.size());
    std::string out = fmt::format("{}\n{:<{}}  {:>4}  {:>12}  {:>12}  {:>12}\n", problem, "optimizer", width, "rank",
                                  "q1", "median", "q3");
    for (const auto& row : rows)
        out += fmt::format("{:<{}}  {:>4}  {:>12.6g}  {:>12.6g}  {:>12.6g}\n", row.optimizer, width, row.rank,
                           row.final_regret.q1, row.final_regret.median, row.final_regret.q3);
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw std::runtime_error("cannot open " + path.string() + " for writing");
    file << text;
    if (!file) throw std::runtime_error("failed writing " + path.string());
}

std::vector<std::filesystem::path> write_summary(const RunSummary& summary, const std::filesystem::path& directory,
                                                 OutputFormat format) {
    std::vector<std::filesystem::path> written;
    auto emit = [&](const char* name, const std::string& text) {
        write_text(directory / name, text);
        written.push_back(directory / name);
    };
    if (format == OutputFormat::Json) {
        emit("summary.json", summary_json(summary));
    } else {
        emit("trace.csv", trace_csv(summary));
        emit("summary.csv", summary_csv(summary));
        bool any_ambiguity = false;
        for (const auto& run : summary.runs)
            for (const auto& it : run.history) any_ambiguity = any_ambiguity || it.ambiguity.has_value();
        if (any_ambiguity) emit("ambiguity.csv", ambiguity_csv(summary));
    }
    return written;
}

}  // namespace clbo
