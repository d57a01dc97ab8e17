#include "clbo/baselines.hpp"

#include "clbo/errors.hpp"
#include "clbo/sampling.hpp"
#include "loop_support.hpp"

#include <charconv>
#include <chrono>

namespace clbo {
namespace {

OptimizationResult run_single_model(const BenchmarkProblem& problem, const LoopConfig& config, int batch_size,
                                    BatchRule rule, std::string name) {
    require(batch_size >= 1, "batch size must be at least 1");
    const auto started = std::chrono::steady_clock::now();
    problem.bounds.validate();
    const int d = problem.dimension();
    require(config.resolved_n_init(d) >= d + 1, "n_init must be at least d + 1");

    Rng design_rng = make_stream(config.seed, detail::kDesignStream);
    Rng fit_rng = make_stream(config.seed, detail::kFitStream);
    Rng acquisition_rng = make_stream(config.seed, detail::kAcquisitionStream);
    Evaluator evaluator(problem, make_stream(config.seed, detail::kFailureStream));

    // Reuse the co-learning state for bookkeeping; it simply has no subsets.
    ClboState state;
    state.inputs.resize(0, d);
    {
        IterationRecord record;
        const Matrix design = latin_hypercube(config.resolved_n_init(d), d, design_rng);
        for (Eigen::Index i = 0; i < design.rows(); ++i) {
            const auto outcome = evaluator.evaluate(design.row(i).transpose());
            state.append(outcome.x_unit, outcome.value);
            Candidate initial{outcome.x_unit, {}, std::numeric_limits<double>::quiet_NaN(),
                              std::numeric_limits<double>::quiet_NaN(), Regime::Undefined, false};
            record.queries.push_back(detail::to_query(initial, outcome));
        }
        record.f_min = state.incumbent.f_min;
        record.n_total = state.n_total;
        state.history.push_back(std::move(record));
    }

    const int budget = config.resolved_n_budget(d);
    const int t_max = config.resolved_t_max(d, batch_size);
    FullSurrogate full(config);

    while (state.n_total < budget && state.t_total < t_max) {
        const Dataset master = state.master_dataset();
        const SogpModel& model = full.fit(master, fit_rng);
        const double f_min = master.transform.standardize(state.incumbent.f_min);
        const std::vector<Vector> seeds{state.incumbent.x_min};

        const auto batch = select_batch(model, f_min, batch_size, rule, config.acquisition, acquisition_rng, seeds);

        IterationRecord record;
        for (const auto& c : batch) {
            const auto outcome = evaluator.evaluate(c.x_unit);
            state.append(outcome.x_unit, outcome.value);
            record.queries.push_back(detail::to_query(c, outcome));
        }
        ++state.t_total;
        record.iteration = state.t_total;
        record.f_min = state.incumbent.f_min;
        record.n_total = state.n_total;
        state.history.push_back(std::move(record));
    }

    OptimizationResult result;
    result.optimizer = std::move(name);
    result.seed = config.seed;
    result.history = std::move(state.history);
    result.t_total = state.t_total;
    detail::finish_result(result, problem, state.inputs, state.values, evaluator.failures(), started);
    return result;
}

bool parse_int(std::string_view text, int& out) {
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, out);
    return ec == std::errc() && ptr == end;
}

}  // namespace

double batch_pseudo_ei(const SogpModel& model, double f_min, const Vector& x, std::span<const Vector> chosen) {
    const Posterior p = model.predict(x);
    double value = expected_improvement(p.mean, p.variance, f_min);
    for (const auto& anchor : chosen) value *= influence_function(x, anchor, model.params().lengthscales);
    return value;
}

std::vector<Candidate> select_batch(const SogpModel& model, double f_min, int batch_size, BatchRule rule,
                                    const AcquisitionConfig& config, Rng& rng, std::span<const Vector> seeds) {
    require(batch_size >= 1, "batch size must be at least 1");
    const Dataset& data = model.data();
    const int d = data.dimension();
    const Bounds unit = Bounds::unit_cube(d);
    std::vector<Candidate> batch;
    std::vector<Vector> chosen;
    // Constant liar: posterior conditioned on the lies collected so far.
    std::optional<SogpModel> lied;
    for (int k = 0; k < batch_size; ++k) {
        const SogpModel& current = lied ? *lied : model;
        const auto acquisition = [&](const Vector& x) {
            if (rule == BatchRule::PseudoEi) return batch_pseudo_ei(model, f_min, x, chosen);
            const Posterior p = current.predict(x);
            return expected_improvement(p.mean, p.variance, f_min);
        };
        const auto best = maximize_acquisition(acquisition, unit, config, rng, seeds);
        const double z = detail::z_or_nan(current.predict(best.x), f_min);
        batch.push_back(Candidate{best.x, {Provenance::Source::Sogp, k}, best.value, z, classify_z(z), false});
        chosen.push_back(best.x);

        if (rule == BatchRule::ConstantLiar && k + 1 < batch_size) {
            const Eigen::Index n = data.size();
            Matrix inputs(n + static_cast<Eigen::Index>(chosen.size()), d);
            Vector outputs(inputs.rows());
            inputs.topRows(n) = data.inputs;
            outputs.head(n) = data.outputs;
            for (std::size_t j = 0; j < chosen.size(); ++j) {
                inputs.row(n + static_cast<Eigen::Index>(j)) = chosen[j].transpose();
                outputs[n + static_cast<Eigen::Index>(j)] = f_min;
            }
            lied.emplace(Dataset{std::move(inputs), std::move(outputs), data.transform}, model.params());
        }
    }
    return batch;
}

std::string OptimizerSpec::label() const {
    switch (kind) {
        case OptimizerKind::Ego: return "ego";
        case OptimizerKind::ConstantLiar: return "cl" + std::to_string(batch_size);
        case OptimizerKind::PeiBatch: return "pei" + std::to_string(batch_size);
        case OptimizerKind::Msbo: return "msbo";
        case OptimizerKind::Clbo: return "clbo-mfgp" + std::to_string(m_subsets) + (use_sogp ? "+sogp" : "");
    }
    return "unknown";
}

OptimizerSpec OptimizerSpec::parse(std::string_view name) {
    const auto fail = [&] { return ConfigError("optimizer", "unknown optimizer '" + std::string(name) + "'"); };
    OptimizerSpec spec;
    if (name == "clbo") {
        return spec;
    }
    if (name == "msbo") {
        spec.kind = OptimizerKind::Msbo;
        return spec;
    }
    if (name == "ego") {
        spec.kind = OptimizerKind::Ego;
        spec.batch_size = 1;
        return spec;
    }
    constexpr std::string_view clbo_prefix = "clbo-mfgp";
    if (name.starts_with(clbo_prefix)) {
        std::string_view rest = name.substr(clbo_prefix.size());
        spec.use_sogp = rest.ends_with("+sogp");
        if (spec.use_sogp) {
            rest.remove_suffix(5);
        }
        if (!parse_int(rest, spec.m_subsets) || spec.m_subsets < 1) {
            throw fail();
        }
        return spec;
    }
    // "cl", "cl<batch>", "pei", "pei<batch>"
    for (const auto& [prefix, kind] : {std::pair{std::string_view("cl"), OptimizerKind::ConstantLiar},
                                       std::pair{std::string_view("pei"), OptimizerKind::PeiBatch}}) {
        if (!name.starts_with(prefix)) {
            continue;
        }
        spec.kind = kind;
        const std::string_view rest = name.substr(prefix.size());
        if (!rest.empty() && (!parse_int(rest, spec.batch_size) || spec.batch_size < 1)) {
            throw fail();
        }
        return spec;
    }
    throw fail();
}

OptimizationResult run_ego(const BenchmarkProblem& problem, const LoopConfig& config) {
    return run_single_model(problem, config, 1, BatchRule::ConstantLiar, "ego");
}

OptimizationResult run_constant_liar(const BenchmarkProblem& problem, const LoopConfig& config, int batch_size) {
    return run_single_model(problem, config, batch_size, BatchRule::ConstantLiar, "cl" + std::to_string(batch_size));
}

OptimizationResult run_pei_batch(const BenchmarkProblem& problem, const LoopConfig& config, int batch_size) {
    return run_single_model(problem, config, batch_size, BatchRule::PseudoEi, "pei" + std::to_string(batch_size));
}

OptimizationResult run_msbo(const BenchmarkProblem& problem, const ClboConfig& config) {
    return run_co_learning(problem, config, make_independent_surrogate, "msbo");
}

OptimizationResult run_optimizer(const BenchmarkProblem& problem, const OptimizerSpec& spec, const ClboConfig& config) {
    switch (spec.kind) {
        case OptimizerKind::Ego: return run_ego(problem, config);
        case OptimizerKind::ConstantLiar: return run_constant_liar(problem, config, spec.batch_size);
        case OptimizerKind::PeiBatch: return run_pei_batch(problem, config, spec.batch_size);
        case OptimizerKind::Msbo:
        case OptimizerKind::Clbo: {
            ClboConfig c = config;
            c.m_subsets = spec.m_subsets;
            c.use_sogp = spec.use_sogp;
            return spec.kind == OptimizerKind::Msbo ? run_msbo(problem, c) : run_clbo(problem, c);
        }
    }
    throw ConfigError("optimizer", "unhandled optimizer kind");
}

}  // namespace clbo
