#include "clbo/cli.hpp"

#include "clbo/config_file.hpp"
#include "clbo/errors.hpp"
#include "clbo/harness.hpp"
#include "clbo/oracle.hpp"
#include "clbo/report.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace clbo {
namespace {

std::filesystem::path default_output_dir() {
    if (const char* env = std::getenv("CLBO_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
    return "clbo-out";
}

// Settings given on the command line, applied through the same path as config files.
struct Overrides {
    std::map<std::string, std::string> values;
    std::vector<std::string> assignments;

    void add_options(CLI::App& app) {
        const std::vector<std::pair<std::string, std::string>> flags = {
            {"repeats", "Independent runs (seeds seed, seed+1, ...)"},
            {"seed", "Base seed"},
            {"format", "Output format: csv or json"},
            {"budget", "Total function calls (default 30 d)"},
            {"n_init", "Initial design size (default 6 d)"},
            {"t_max", "Iteration limit (default from budget and batch size)"},
            {"epsilon", "Minimum normalized distance before pseudo-EI is used"},
            {"fit_starts", "Hyperparameter starts for the first fit"},
            {"refit_starts", "Random hyperparameter starts for later refits"},
            {"ambiguity_points", "Held-out points for the ensemble error decomposition (0 disables)"},
            {"failure_rate", "Probability that an evaluation fails"},
            {"threads", "Worker threads for repeats (0 = all cores)"},
        };
        for (const auto& [key, help] : flags) {
            std::string name = "--" + key;
            std::replace(name.begin(), name.end(), '_', '-');
            app.add_option_function<std::string>(
                name, [this, key](const std::string& v) { values[key] = v; }, help);
        }
        app.add_option("--set", assignments, "Any config-file setting as key=value");
    }

    void apply(ExperimentConfig& config, bool skip_format = false) const {
        for (const auto& a : assignments) {
            const auto eq = a.find('=');
            if (eq == std::string::npos) throw ConfigError("set", "expected key=value, got '" + a + "'");
            apply_setting(config, a.substr(0, eq), a.substr(eq + 1));
        }
        for (const auto& [key, value] : values)
            if (!(skip_format && key == "format")) apply_setting(config, key, value);
    }
};

int run_command(const ExperimentConfig& config, std::ostream& out) {
    const RunSummary summary = run_experiment(config);
    for (const auto& path : write_summary(summary, config.output_dir, config.format)) out << path.string() << "\n";
    out << summary.problem << " " << summary.optimizer << ": median final regret " << summary.final_regret.median
        << " over " << summary.runs.size() << " runs\n";
    return kExitSuccess;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Co-learning Bayesian optimization experiments", "clbo"};
    app.require_subcommand(1);
    std::string out_dir;
    app.add_option("--out", out_dir, "Output directory (default $CLBO_OUTPUT_DIR or ./clbo-out)");

    auto* run = app.add_subcommand("run", "Run one optimizer on one problem");
    std::string problem;
    std::string optimizer;
    run->add_option("--problem", problem, "Problem name")->required();
    run->add_option("--optimizer", optimizer, "ego, cl[N], pei[N], msbo, clbo, clbo-mfgpM[+sogp]")->required();
    run->add_option("--out", out_dir, "Output directory");
    Overrides run_overrides;
    run_overrides.add_options(*run);

    auto* suite = app.add_subcommand("suite", "Run every experiment in a config file");
    std::string suite_file;
    suite->add_option("config", suite_file, "Suite file")->required();
    suite->add_option("--out", out_dir, "Output directory; each section writes to a subdirectory");
    Overrides suite_overrides;
    suite_overrides.add_options(*suite);

    auto* compare = app.add_subcommand("compare", "Paired comparison of optimizers on one problem");
    std::string compare_problem;
    std::vector<std::string> optimizers = {"clbo", "ego", "msbo", "cl", "pei"};
    compare->add_option("--problem", compare_problem, "Problem name")->required();
    compare->add_option("--optimizers", optimizers, "Optimizer names")->delimiter(',');
    compare->add_option("--out", out_dir, "Output directory");
    Overrides compare_overrides;
    compare_overrides.add_options(*compare);

    auto* oracle = app.add_subcommand("oracle", "Regenerate the reference-value fixtures");
    OracleOptions oracle_options;
    std::string oracle_dir = "tests/fixtures";
    oracle->add_option("--out", oracle_dir, "Directory for oracle_values.json");
    oracle->add_option("--grid", oracle_options.grid, "Grid points per axis");
    oracle->add_option("--starts", oracle_options.starts, "Local-search starts for 5-D and 6-D problems");
    oracle->add_option("--seed", oracle_options.seed, "Seed for the start points");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitConfigError;
    } catch (const ConfigError& e) {
        err << "configuration error in '" << e.field() << "': " << e.message() << "\n";
        return kExitConfigError;
    }

    const std::filesystem::path out_path = out_dir.empty() ? default_output_dir() : std::filesystem::path(out_dir);
    try {
        if (run->parsed()) {
            ExperimentConfig config;
            apply_setting(config, "problem", problem);
            apply_setting(config, "optimizer", optimizer);
            run_overrides.apply(config);
            config.output_dir = out_path;
            return run_command(config, out);
        }
        if (suite->parsed()) {
            std::ifstream file(suite_file);
            if (!file) throw ConfigError("config", "cannot read '" + suite_file + "'");
            std::stringstream text;
            text << file.rdbuf();
            auto configs = parse_suite(text.str());
            for (auto& config : configs) {
                suite_overrides.apply(config);
                config.output_dir = out_path / (config.output_dir.empty() ? std::filesystem::path(config.name) : config.output_dir);
                config.validate();
            }
            for (const auto& config : configs) run_command(config, out);
            return kExitSuccess;
        }
        if (compare->parsed()) {
            std::vector<ExperimentConfig> configs;
            for (const auto& name : optimizers) {
                ExperimentConfig config;
                apply_setting(config, "problem", compare_problem);
                apply_setting(config, "optimizer", name);
                compare_overrides.apply(config);
                config.output_dir = out_path / config.optimizer.label();
                config.validate();
                configs.push_back(std::move(config));
            }
            std::vector<RunSummary> summaries;
            for (const auto& config : configs) {
                summaries.push_back(run_experiment(config));
                write_summary(summaries.back(), config.output_dir, config.format);
            }
            const auto rows = compare_summaries(summaries);
            write_text(out_path / "compare.csv", comparison_csv(compare_problem, rows));
            out << comparison_table(compare_problem, rows);
            out << (out_path / "compare.csv").string() << "\n";
            return kExitSuccess;
        }
        if (oracle->parsed()) {
            if (oracle_options.grid < 16) throw ConfigError("grid", "must be at least 16");
            if (oracle_options.starts < 1) throw ConfigError("starts", "must be at least 1");
            const auto path = std::filesystem::path(oracle_dir) / "oracle_values.json";
            write_text(path, oracle_fixture(oracle_options));
            out << path.string() << "\n";
            return kExitSuccess;
        }
    } catch (const ConfigError& e) {
        err << "configuration error in '" << e.field() << "': " << e.message() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntimeFailure;
    }
    return kExitConfigError;
}

int cli_main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return cli_main(args, std::cout, std::cerr);
}

}  // namespace clbo
