// Acceptance suite: one PASS/FAIL line per criterion.
//
//   clbo_acceptance                 run every criterion
//   clbo_acceptance --criterion 7   run one (repeatable)

#include "clbo/baselines.hpp"
#include "clbo/cli.hpp"
#include "clbo/diagnostics.hpp"
#include "clbo/harness.hpp"
#include "clbo/sampling.hpp"

#include "../support/oracles.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace clbo;
using namespace clbo::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    const char* title;
    double time_limit_seconds;
    Outcome (*run)();
};

// ---------------------------------------------------------------- 1
Outcome gp_oracle() {
    Rng rng(101);
    std::uniform_int_distribution<int> dim(1, 3);
    std::uniform_int_distribution<int> size(1, 20);
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
        const int d = dim(rng);
        const Dataset data = random_dataset(size(rng), d, rng);
        const SogpParams p = random_sogp_params(d, rng);
        const SogpModel model(data, p);
        const Matrix queries = random_unit_matrix(20, d, rng);
        for (int q = 0; q < queries.rows(); ++q) {
            const Vector x = queries.row(q).transpose();
            const Posterior got = model.predict(x);
            const Posterior want = dense_posterior(data.inputs, data.outputs, p, x);
            worst = std::max({worst, relative_error(got.mean, want.mean), relative_error(got.variance, want.variance)});
        }
    }
    return {worst <= 1e-8, fmt::format("max relative error {:.3g} over 50 datasets x 20 queries", worst)};
}

// ---------------------------------------------------------------- 2
Outcome ei_monte_carlo() {
    Rng rng(202);
    std::normal_distribution<double> normal;
    const int draws = 1000000;
    int failures = 0;
    double worst = 0.0;
    for (double sigma : {0.1, 1.0, 10.0}) {
        for (int z = -3; z <= 3; ++z) {
            const double mean = 0.25;
            const double f_min = mean + z * sigma;
            double sum = 0.0;
            double sum_sq = 0.0;
            for (int i = 0; i < draws; ++i) {
                const double gain = std::max(f_min - (mean + sigma * normal(rng)), 0.0);
                sum += gain;
                sum_sq += gain * gain;
            }
            const double mc = sum / draws;
            const double se = std::sqrt(std::max(sum_sq / draws - mc * mc, 0.0) / draws);
            const double closed = expected_improvement(mean, sigma * sigma, f_min);
            const double ratio = std::abs(closed - mc) / se;
            worst = std::max(worst, ratio);
            if (!(ratio <= 3.0)) ++failures;
        }
    }
    return {failures == 0, fmt::format("{} of 21 grid points outside 3 SE; worst |diff|/SE = {:.2f}", failures, worst)};
}

// ---------------------------------------------------------------- 3
Outcome mfgp_degeneracy() {
    Rng rng(303);
    double worst_single = 0.0;
    double worst_independent = 0.0;
    for (int k = 0; k < 10; ++k) {
        const int d = 1 + k % 3;
        const Matrix queries = random_unit_matrix(20, d, rng);

        const Dataset data = random_dataset(8 + k, d, rng);
        const SogpParams p = random_sogp_params(d, rng);
        const MfgpModel single(SubsetCollection{{data}}, MfgpParams::from_sogp(p, 1));
        const SogpModel sogp(data, p);

        const int m = 2 + k % 2;
        const SubsetCollection subsets = random_subsets(m, 6, d, rng);
        MfgpParams q = random_mfgp_params(d, m, rng);
        q.correlation_factor = Matrix::Identity(m, m);
        const MfgpModel independent(subsets, q);
        std::vector<SogpModel> separate;
        for (int j = 0; j < m; ++j)
            separate.emplace_back(subsets.subsets[j],
                                  SogpParams{q.shared_lengthscales, q.output_scales[j], q.noise_variances[j]});

        for (int i = 0; i < queries.rows(); ++i) {
            const Vector x = queries.row(i).transpose();
            const MfgpPosterior a = single.predict(x);
            const Posterior b = sogp.predict(x);
            worst_single = std::max({worst_single, std::abs(a.means[0] - b.mean), std::abs(a.variances[0] - b.variance)});
            const MfgpPosterior c = independent.predict(x);
            for (int j = 0; j < m; ++j) {
                const Posterior e = separate[static_cast<std::size_t>(j)].predict(x);
                worst_independent =
                    std::max({worst_independent, std::abs(c.means[j] - e.mean), std::abs(c.variances[j] - e.variance)});
            }
        }
    }
    return {worst_single <= 1e-8 && worst_independent <= 1e-8,
            fmt::format("m=1 vs SOGP max diff {:.3g}; zero correlation vs independent GPs max diff {:.3g}",
                        worst_single, worst_independent)};
}

// ---------------------------------------------------------------- 4
Outcome gradient_check() {
    Rng rng(404);
    double worst_sogp = 0.0;
    double worst_mfgp = 0.0;
    for (int k = 0; k < 20; ++k) {
        const int d = 1 + k % 3;
        const Dataset data = random_dataset(6 + k % 10, d, rng);
        const SogpParams p = random_sogp_params(d, rng);
        const Vector analytic = sogp_nlml_with_gradient(data, p).gradient;
        const Vector numeric =
            central_difference([&](const Vector& v) { return sogp_nlml(data, unpack_sogp(v)); }, pack_sogp(p), 1e-5);
        worst_sogp = std::max(worst_sogp, (analytic - numeric).norm() / std::max(numeric.norm(), 1e-12));

        const int m = 2 + k % 3;
        const SubsetCollection subsets = random_subsets(m, 5, d, rng);
        const MfgpParams q = random_mfgp_params(d, m, rng);
        const Vector ga = mfgp_nlml_with_gradient(subsets, q).gradient;
        const Vector gn = central_difference([&](const Vector& v) { return mfgp_nlml(subsets, unpack_mfgp(v, d, m)); },
                                             pack_mfgp(q), 1e-5);
        worst_mfgp = std::max(worst_mfgp, (ga - gn).norm() / std::max(gn.norm(), 1e-12));
    }
    return {worst_sogp < 1e-4 && worst_mfgp < 1e-4,
            fmt::format("max relative error: SOGP {:.3g}, MFGP {:.3g} (20 instances each)", worst_sogp, worst_mfgp)};
}

// ---------------------------------------------------------------- 5
Outcome ambiguity_identity() {
    Rng rng(505);
    std::uniform_int_distribution<int> count(1, 8);
    std::uniform_real_distribution<double> value(-10.0, 10.0);
    std::uniform_real_distribution<double> weight(0.0, 1.0);
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
        const int m = count(rng);
        std::vector<double> p(static_cast<std::size_t>(m));
        std::vector<double> w(static_cast<std::size_t>(m));
        double total = 0.0;
        for (int i = 0; i < m; ++i) {
            p[i] = value(rng);
            w[i] = weight(rng) + 1e-3;
            total += w[i];
        }
        for (auto& wi : w) wi /= total;
        const double y = value(rng);
        const auto r = ambiguity_decomposition(p, w, y);
        worst = std::max(worst, std::abs(r.ensemble_error - (r.individual_error - r.diversity)));
    }
    return {worst <= 1e-12, fmt::format("max |E - (E_ind - Div)| = {:.3g} over 10^4 instances", worst)};
}

// ---------------------------------------------------------------- 6
struct RunCheck {
    std::vector<std::string> violations;
};

void check_history(const OptimizationResult& r, int batch, int budget, int t_max, std::vector<std::string>& out) {
    const auto& h = r.history;
    for (std::size_t t = 1; t < h.size(); ++t) {
        if (h[t].f_min > h[t - 1].f_min) out.push_back("f_min increased");
        if (static_cast<int>(h[t].queries.size()) != batch) out.push_back("batch size mismatch");
    }
    if (r.n_total > budget + batch) out.push_back("n_total exceeds budget + batch");
    if (r.t_total > t_max) out.push_back("t_total exceeds t_max");
    if (r.n_total < budget && r.t_total < t_max) out.push_back("stopped before either termination bound");
    for (std::size_t k = 1; k < r.best_by_evaluation.size(); ++k)
        if (r.best_by_evaluation[k] > r.best_by_evaluation[k - 1]) out.push_back("incumbent trace increased");
    for (const auto& it : h)
        for (const auto& q : it.queries)
            if (!q.x_unit.allFinite() || (q.x_unit.array() < 0.0).any() || (q.x_unit.array() > 1.0).any())
                out.push_back("query outside the unit box");
}

bool same_history(const OptimizationResult& a, const OptimizationResult& b) {
    if (a.history.size() != b.history.size() || a.best_by_evaluation != b.best_by_evaluation) return false;
    for (std::size_t t = 0; t < a.history.size(); ++t) {
        if (a.history[t].queries.size() != b.history[t].queries.size()) return false;
        for (std::size_t q = 0; q < a.history[t].queries.size(); ++q)
            if (a.history[t].queries[q].x_unit != b.history[t].queries[q].x_unit ||
                a.history[t].queries[q].value != b.history[t].queries[q].value)
                return false;
    }
    return true;
}

Outcome engine_properties() {
    Rng rng(606);
    const auto suite = desk_scale_suite();
    std::uniform_int_distribution<int> pick_problem(0, static_cast<int>(suite.size()) - 1);
    std::uniform_int_distribution<int> pick_kind(0, 9);
    std::uniform_int_distribution<int> pick_m(1, 3);
    std::uniform_int_distribution<int> extra_cycles(0, 3);
    std::bernoulli_distribution coin(0.5);
    std::vector<std::string> violations;
    int co_learning_runs = 0;
    int determinism_checks = 0;

    for (int run = 0; run < 500; ++run) {
        BenchmarkProblem problem = suite[static_cast<std::size_t>(pick_problem(rng))];
        if (coin(rng) && coin(rng)) problem.failure_rate = 0.1;
        const int d = problem.dimension();

        ClboConfig config;
        config.seed = 10000 + static_cast<std::uint64_t>(run);
        config.fit.starts = 2;
        config.m_subsets = pick_m(rng);
        config.use_sogp = config.m_subsets == 1 ? true : coin(rng);
        config.own_query_retention = coin(rng);
        config.bootstrap = coin(rng) || coin(rng);
        config.epsilon = coin(rng) ? 1e-3 : 0.05;
        const int kind = pick_kind(rng);
        OptimizerSpec spec;
        if (kind < 6) {
            spec.kind = kind < 5 ? OptimizerKind::Clbo : OptimizerKind::Msbo;
        } else {
            spec.kind = kind == 6 ? OptimizerKind::Ego : kind == 7 ? OptimizerKind::ConstantLiar : OptimizerKind::PeiBatch;
            spec.batch_size = spec.kind == OptimizerKind::Ego ? 1 : 1 + pick_m(rng);
        }
        const bool co_learning = spec.kind == OptimizerKind::Clbo || spec.kind == OptimizerKind::Msbo;
        const int batch = co_learning ? config.batch_size() : spec.batch_size;
        config.n_init = 6 * d;
        config.n_budget = config.n_init + batch * extra_cycles(rng) + (coin(rng) ? 1 : 0);
        if (coin(rng)) config.t_max = 1 + extra_cycles(rng);
        const int t_max = config.resolved_t_max(d, batch);

        auto tag = [&](const std::string& what) {
            return fmt::format("run {} ({} on {}, seed {}): {}", run, spec.label(), problem.name, config.seed, what);
        };
        std::vector<std::string> found;
        OptimizationResult result;
        if (co_learning) {
            ++co_learning_runs;
            spec.m_subsets = config.m_subsets;
            spec.use_sogp = config.use_sogp;
            const auto observe = [&](const ClboState& s) {
                for (auto& v : s.invariant_violations()) found.push_back(v);
                for (const auto& members : s.subsets)
                    if (members.empty()) found.push_back("empty subset");
            };
            result = run_co_learning(problem, config,
                                     spec.kind == OptimizerKind::Clbo ? make_mfgp_surrogate : make_independent_surrogate,
                                     spec.label(), observe);
        } else {
            result = run_optimizer(problem, spec, config);
        }
        check_history(result, batch, config.n_budget, t_max, found);
        if (run % 5 == 0) {
            ++determinism_checks;
            if (!same_history(result, run_optimizer(problem, spec, config))) found.push_back("seed determinism broken");
        }
        for (const auto& f : found) violations.push_back(tag(f));
    }
    std::string detail = fmt::format("500 runs ({} co-learning, {} determinism re-runs): {} violations",
                                     co_learning_runs, determinism_checks, violations.size());
    for (std::size_t i = 0; i < std::min<std::size_t>(violations.size(), 5); ++i) detail += "\n    " + violations[i];
    return {violations.empty(), detail};
}

// ---------------------------------------------------------------- 7
Outcome branin_sanity() {
    ClboConfig config;
    config.n_budget = 60;
    const auto runs = run_repeats(make_problem("branin2"), OptimizerSpec::parse("clbo-mfgp2+sogp"), config, 20, 0);
    const RunSummary s = summarize(runs);
    return {s.final_regret.median < 0.5,
            fmt::format("median final regret {:.4g} (q1 {:.3g}, q3 {:.3g}, max {:.3g}) over 20 seeds",
                        s.final_regret.median, s.final_regret.q1, s.final_regret.q3, s.final_regret.max)};
}

// ---------------------------------------------------------------- 8
RunSummary study(const std::string& problem, const std::string& optimizer, int budget) {
    ClboConfig config;
    config.n_budget = budget;
    return summarize(run_repeats(make_problem(problem), OptimizerSpec::parse(optimizer), config, 10, 0));
}

Outcome rank_order() {
    const std::vector<std::string> optimizers{"clbo", "ego", "msbo", "cl3", "pei3"};
    bool pass = true;
    std::string detail;
    for (const std::string problem : {"michalewicz5", "rastrigin5"}) {
        std::vector<RunSummary> summaries;
        for (const auto& o : optimizers) summaries.push_back(study(problem, o, 150));
        const auto rows = compare_summaries(summaries);
        const int clbo_rank = rows[0].rank;
        const bool beats_msbo = summaries[0].final_regret.median <= summaries[2].final_regret.median;
        pass = pass && clbo_rank <= 2 && beats_msbo;
        detail += fmt::format("\n    {}: CLBO rank {}{}; medians", problem, clbo_rank,
                              beats_msbo ? "" : " (worse than MSBO)");
        for (const auto& row : rows) detail += fmt::format(" {}={:.4g}", row.optimizer, row.final_regret.median);
    }
    return {pass, detail};
}

// ---------------------------------------------------------------- 9
Outcome sensitivity() {
    const RunSummary two = study("michalewicz5", "clbo-mfgp2+sogp", 150);
    const RunSummary four = study("michalewicz5", "clbo-mfgp4", 150);
    return {two.final_regret.median <= four.final_regret.median,
            fmt::format("median final regret: clbo-mfgp2+sogp {:.4g}, clbo-mfgp4 {:.4g}", two.final_regret.median,
                        four.final_regret.median)};
}

// ---------------------------------------------------------------- 10
Outcome benchmark_fidelity() {
    std::ifstream in(CLBO_FIXTURE_DIR "/oracle_values.json");
    const auto fixture = nlohmann::json::parse(in);
    Rng rng(1010);
    std::vector<std::string> problems;
    for (const auto& name : problem_names()) {
        const auto p = make_problem(name);
        double best = INFINITY;
        for (int k = 0; k < 1000000; ++k)
            best = std::min(best, p.evaluate(p.bounds.from_unit(uniform_point(p.dimension(), rng))));
        if (best < *p.known_optimum) problems.push_back(fmt::format("{} sample {} < optimum {}", name, best, *p.known_optimum));
    }
    Vector x(10);
    for (int i = 0; i < 10; ++i) x[i] = (i + 1.0) * (10.0 - i);
    const double trid_value = trid(x);
    const Vector canonical = (Vector(6) << 0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573).finished();
    const double h = hartman6(canonical);
    const double refined = fixture.at("optima").at("hartman6").at("value").get<double>();
    const bool trid_ok = std::abs(trid_value + 210.0) <= 1e-9;
    const bool hartman_ok = std::abs(h - refined) <= 1e-4 && std::abs(h + 3.32237) <= 1e-4;
    std::string detail = fmt::format("{} problems x 10^6 samples, {} below optimum; trid10 {:.12g}; hartman6 "
                                     "canonical {:.8f} vs oracle {:.8f}",
                                     problem_names().size(), problems.size(), trid_value, h, refined);
    for (const auto& p : problems) detail += "\n    " + p;
    return {problems.empty() && trid_ok && hartman_ok, detail};
}

// ---------------------------------------------------------------- 11
std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome cli_contract() {
    const fs::path dir = fs::temp_directory_path() / "clbo_acceptance_cli";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ostringstream out;
    std::ostringstream err;
    std::vector<std::string> problems;
    auto expect = [&](const std::vector<std::string>& args, int code, const std::string& label) {
        err.str("");
        const int got = cli_main(args, out, err);
        if (got != code) problems.push_back(fmt::format("{}: exit {} (expected {}) {}", label, got, code, err.str()));
        return err.str();
    };

    const std::vector<std::string> run_args{"run", "--problem", "branin2", "--optimizer", "ego", "--repeats", "2",
                                            "--seed", "7"};
    for (const char* name : {"run1", "run2"}) {
        auto args = run_args;
        args.insert(args.end(), {"--out", (dir / name).string()});
        expect(args, 0, name);
    }
    if (!fs::exists(dir / "run1" / "trace.csv")) problems.push_back("run wrote no trace.csv");
    if (slurp(dir / "run1" / "trace.csv") != slurp(dir / "run2" / "trace.csv") ||
        slurp(dir / "run1" / "summary.csv") != slurp(dir / "run2" / "summary.csv"))
        problems.push_back("identical run configs produced different files");

    std::ofstream(dir / "suite.cfg") << "repeats = 2\nbudget = 15\n[ego]\nproblem = branin2\noptimizer = ego\n"
                                        "[clbo]\nproblem = gramacy_lee1\noptimizer = clbo\nformat = json\n";
    expect({"suite", (dir / "suite.cfg").string(), "--out", (dir / "suite1").string()}, 0, "suite");
    expect({"suite", (dir / "suite.cfg").string(), "--out", (dir / "suite2").string()}, 0, "suite again");
    if (slurp(dir / "suite1" / "clbo" / "summary.json") != slurp(dir / "suite2" / "clbo" / "summary.json"))
        problems.push_back("identical suite configs produced different JSON");

    expect({"compare", "--problem", "branin2", "--optimizers", "clbo,ego", "--repeats", "2", "--budget", "15", "--out",
            (dir / "cmp").string()},
           0, "compare");
    if (!fs::exists(dir / "cmp" / "compare.csv")) problems.push_back("compare wrote no compare.csv");

    expect({"oracle", "--out", (dir / "oracle1").string()}, 0, "oracle");
    expect({"oracle", "--out", (dir / "oracle2").string()}, 0, "oracle again");
    if (slurp(dir / "oracle1" / "oracle_values.json") != slurp(dir / "oracle2" / "oracle_values.json"))
        problems.push_back("oracle output differs between runs");

    const std::string e1 = expect({"run", "--problem", "branin2", "--optimizer", "simulated-annealing"}, 1, "bad optimizer");
    if (e1.find("optimizer") == std::string::npos) problems.push_back("bad optimizer diagnostic does not name the field");
    std::ofstream(dir / "bad.cfg") << "[x]\nproblem = branin2\noptimizer = ego\nrepeats = -2\n";
    const std::string e2 = expect({"suite", (dir / "bad.cfg").string(), "--out", (dir / "bad").string()}, 1, "bad suite");
    if (e2.find("repeats") == std::string::npos) problems.push_back("bad suite diagnostic does not name the field");

    std::string detail = fmt::format("run/suite/compare/oracle checked; {} problems", problems.size());
    for (const auto& p : problems) detail += "\n    " + p;
    return {problems.empty(), detail};
}

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> all{
        {1, "GP posterior equals dense-inverse oracle", 10.0, gp_oracle},
        {2, "EI closed form equals Monte-Carlo integral", 30.0, ei_monte_carlo},
        {3, "MFGP degeneracy suite", 60.0, mfgp_degeneracy},
        {4, "NLML gradients equal central differences", 0.0, gradient_check},
        {5, "ambiguity identity", 0.0, ambiguity_identity},
        {6, "engine invariants over 500 randomized runs", 0.0, engine_properties},
        {7, "Branin desk-scale sanity", 600.0, branin_sanity},
        {8, "rank order on 5-D Michalewicz and Rastrigin", 7200.0, rank_order},
        {9, "sensitivity ordering MFGP2+SOGP vs MFGP4", 0.0, sensitivity},
        {10, "benchmark fidelity", 0.0, benchmark_fidelity},
        {11, "CLI contract", 0.0, cli_contract},
    };
    return all;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CLBO acceptance suite"};
    std::vector<int> selected;
    app.add_option("--criterion,-c", selected, "Criterion number (repeatable); default all")->check(CLI::Range(1, 11));
    CLI11_PARSE(app, argc, argv);

    int failed = 0;
    for (const auto& c : criteria()) {
        if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::string timing = fmt::format("{:.1f}s", seconds);
        if (c.time_limit_seconds > 0.0) {
            timing += fmt::format(" of {:.0f}s allowed", c.time_limit_seconds);
            if (seconds >= c.time_limit_seconds) {
                o.pass = false;
                timing += ", over budget";
            }
        }
        std::cout << fmt::format("[{}] criterion {:>2}: {} ({}) -- {}", o.pass ? "PASS" : "FAIL", c.id, c.title,
                                 timing, o.detail)
                  << std::endl;
        if (!o.pass) ++failed;
    }
    return failed == 0 ? 0 : 1;
}
