#include "clbo/engine.hpp"

#include "clbo/diagnostics.hpp"
#include "clbo/errors.hpp"
#include "clbo/sampling.hpp"
#include "loop_support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace clbo {

namespace detail {

void finish_result(OptimizationResult& result, const BenchmarkProblem& problem, const Matrix& unit_inputs,
                   const Vector& values, int evaluation_failures, std::chrono::steady_clock::time_point started) {
    result.problem = problem.name;
    result.known_optimum = problem.known_optimum;
    result.n_total = static_cast<int>(values.size());
    result.evaluation_failures = evaluation_failures;
    result.best_by_evaluation.clear();
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index best_row = 0;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        if (values[i] < best) {
            best = values[i];
            best_row = i;
        }
        result.best_by_evaluation.push_back(best);
    }
    result.incumbent = Incumbent{best, problem.bounds.from_unit(unit_inputs.row(best_row).transpose())};
    result.pei_invocations = 0;
    for (const auto& record : result.history) {
        for (const auto& q : record.queries) {
            result.pei_invocations += q.pei_invoked ? 1 : 0;
        }
    }
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
}

}  // namespace detail

int LoopConfig::resolved_t_max(int dimension, int batch_size) const {
    if (t_max > 0) {
        return t_max;
    }
    const int remaining = std::max(resolved_n_budget(dimension) - resolved_n_init(dimension), 0);
    return 2 * ((remaining + batch_size - 1) / batch_size);
}

void ClboConfig::validate(int dimension) const {
    require(m_subsets >= 1, "ClboConfig: m_subsets must be at least 1");
    require(epsilon > 0.0, "ClboConfig: epsilon must be positive");
    require(resolved_n_init(dimension) >= dimension + 1, "ClboConfig: n_init must be at least d + 1");
    require(n_budget >= 0 && t_max >= 0, "ClboConfig: budget and t_max must be non-negative");
    require(resolved_n_budget(dimension) >= resolved_n_init(dimension), "ClboConfig: n_budget must be at least n_init");
}

std::string Provenance::label() const {
    switch (source) {
        case Source::Initial: return "initial";
        case Source::Sogp: return "sogp";
        case Source::Subset: return "subset" + std::to_string(index + 1);
    }
    return "initial";
}

std::vector<double> OptimizationResult::regret_by_evaluation() const {
    std::vector<double> out;
    out.reserve(best_by_evaluation.size());
    for (double v : best_by_evaluation) {
        out.push_back(regret(v));
    }
    return out;
}

std::vector<double> OptimizationResult::regret_by_iteration() const {
    std::vector<double> out;
    out.reserve(history.size());
    for (const auto& record : history) {
        out.push_back(regret(record.f_min));
    }
    return out;
}

Evaluator::Evaluator(const BenchmarkProblem& problem, Rng failure_stream)
    : problem_(&problem), rng_(std::move(failure_stream)) {}

std::optional<double> Evaluator::try_evaluate(const Vector& x_raw) {
    if (problem_->failure_rate > 0.0) {
        std::bernoulli_distribution fail(problem_->failure_rate);
        if (fail(rng_)) {
            return std::nullopt;
        }
    }
    try {
        const double value = problem_->evaluate(x_raw);
        if (!std::isfinite(value)) {
            return std::nullopt;
        }
        return value;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

Evaluator::Outcome Evaluator::evaluate(const Vector& x_unit) {
    Outcome outcome{x_unit, problem_->bounds.from_unit(x_unit), 0.0, false};
    constexpr int kMaxAttempts = 1000;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        if (auto value = try_evaluate(outcome.x)) {
            outcome.value = *value;
            return outcome;
        }
        ++failures_;
        outcome.substituted = true;
        outcome.x_unit = uniform_point(problem_->dimension(), rng_);
        outcome.x = problem_->bounds.from_unit(outcome.x_unit);
    }
    throw std::runtime_error("objective '" + problem_->name + "' failed " + std::to_string(kMaxAttempts) +
                             " consecutive evaluations");
}

Dataset ClboState::master_dataset() const {
    return deduplicate(Dataset::with_transform(inputs, values, transform()));
}

SubsetCollection ClboState::subset_collection() const {
    const OutputTransform t = transform();
    SubsetCollection out;
    for (const auto& rows : subsets) {
        out.subsets.push_back(Dataset{select_rows(inputs, rows), t.standardize(select_entries(values, rows)), t});
    }
    return out;
}

int ClboState::append(const Vector& x_unit, double value) {
    const auto row = inputs.rows();
    if (row == 0) {
        inputs.resize(0, x_unit.size());
    }
    inputs.conservativeResize(row + 1, Eigen::NoChange);
    values.conservativeResize(row + 1);
    inputs.row(row) = x_unit.transpose();
    values[row] = value;
    if (row == 0 || value < incumbent.f_min) {
        incumbent = Incumbent{value, x_unit};
    }
    n_total = static_cast<int>(row + 1);
    return static_cast<int>(row);
}

bool ClboState::add_to_subset(int subset, int row) {
    auto& members = subsets.at(static_cast<std::size_t>(subset));
    for (int existing : members) {
        if (inputs.row(existing) == inputs.row(row)) {
            return false;
        }
    }
    members.push_back(row);
    return true;
}

std::vector<std::string> ClboState::invariant_violations() const {
    std::vector<std::string> problems;
    if (inputs.rows() != values.size() || n_total != values.size()) {
        problems.emplace_back("evaluation counter does not match the master set size");
    }
    if (values.size() > 0) {
        if (incumbent.f_min != values.minCoeff()) {
            problems.emplace_back("incumbent is not the best evaluated value");
        }
        bool found = false;
        for (Eigen::Index i = 0; i < values.size() && !found; ++i) {
            found = values[i] == incumbent.f_min && inputs.row(i).transpose() == incumbent.x_min;
        }
        if (!found) {
            problems.emplace_back("incumbent point was never evaluated");
        }
    }
    for (std::size_t s = 0; s < subsets.size(); ++s) {
        const auto& members = subsets[s];
        for (int idx : members) {
            if (idx < 0 || idx >= inputs.rows()) {
                problems.emplace_back("subset " + std::to_string(s) + " references a row outside the master set");
            }
        }
        if (unique_row_indices(select_rows(inputs, members)).size() != members.size()) {
            problems.emplace_back("subset " + std::to_string(s) + " contains duplicate rows");
        }
    }
    for (std::size_t k = 1; k < history.size(); ++k) {
        if (history[k].f_min > history[k - 1].f_min) {
            problems.emplace_back("f_min increased at iteration " + std::to_string(k));
        }
    }
    return problems;
}

namespace {

class MfgpSurrogate final : public SubsetSurrogate {
public:
    explicit MfgpSurrogate(const LoopConfig& config) : config_(config) {}

    void fit(const SubsetCollection& subsets, Rng& rng) override {
        FitConfig fit = config_.fit;
        std::vector<MfgpParams> warm;
        if (model_ && model_->outputs() == subsets.count()) {
            warm.push_back(model_->params());
            fit.starts = config_.refit_starts;
            fit.include_default_start = false;
        }
        model_.emplace(MfgpModel::fit(subsets, fit, rng, warm));
    }

    [[nodiscard]] int outputs() const override { return model_->outputs(); }
    [[nodiscard]] Posterior predict(int output, const Vector& x) const override {
        return model_->predict_output(output, x);
    }
    [[nodiscard]] Vector lengthscales(int) const override { return model_->params().shared_lengthscales; }

private:
    LoopConfig config_;
    std::optional<MfgpModel> model_;
};

class IndependentSurrogate final : public SubsetSurrogate {
public:
    explicit IndependentSurrogate(const LoopConfig& config) : config_(config) {}

    void fit(const SubsetCollection& subsets, Rng& rng) override {
        models_.resize(static_cast<std::size_t>(subsets.count()));
        for (std::size_t i = 0; i < models_.size(); ++i) {
            FullSurrogate& model = models_[i].has_value() ? *models_[i] : models_[i].emplace(config_);
            model.fit(subsets.subsets[i], rng);
        }
    }

    [[nodiscard]] int outputs() const override { return static_cast<int>(models_.size()); }
    [[nodiscard]] Posterior predict(int output, const Vector& x) const override {
        return models_.at(static_cast<std::size_t>(output))->model().predict(x);
    }
    [[nodiscard]] Vector lengthscales(int output) const override {
        return models_.at(static_cast<std::size_t>(output))->model().params().lengthscales;
    }

private:
    LoopConfig config_;
    std::vector<std::optional<FullSurrogate>> models_;
};

double min_distance(const Vector& x, const Matrix& rows, const std::vector<Candidate>& selected) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        best = std::min(best, (rows.row(i).transpose() - x).norm());
    }
    for (const auto& c : selected) {
        best = std::min(best, (c.x_unit - x).norm());
    }
    return best;
}

std::optional<AmbiguityRecord> ambiguity_on_grid(const BenchmarkProblem& problem, const ClboState& state,
                                                 const CycleModels& models, int points, Rng& rng) {
    if (points <= 0) {
        return std::nullopt;
    }
    const OutputTransform t = state.transform();
    const int d = problem.dimension();
    const Matrix grid = latin_hypercube(points, d, rng);
    const int outputs = models.subsets != nullptr ? models.subsets->outputs() : 0;
    const int count = outputs + (models.sogp != nullptr ? 1 : 0);
    if (count == 0) {
        return std::nullopt;
    }
    const std::vector<double> weights(static_cast<std::size_t>(count), 1.0 / count);
    AmbiguityRecord record{0.0, 0.0, 0.0, count};
    std::vector<double> predictions(static_cast<std::size_t>(count));
    for (int p = 0; p < points; ++p) {
        const Vector x = grid.row(p).transpose();
        const double truth = t.standardize(problem.evaluate(problem.bounds.from_unit(x)));
        std::size_t k = 0;
        if (models.sogp != nullptr) {
            predictions[k++] = models.sogp->predict(x).mean;
        }
        for (int j = 0; j < outputs; ++j) {
            predictions[k++] = models.subsets->predict(j, x).mean;
        }
        const auto parts = ambiguity_decomposition(predictions, weights, truth);
        record.ensemble_error += parts.ensemble_error / points;
        record.individual_error += parts.individual_error / points;
        record.diversity += parts.diversity / points;
    }
    return record;
}

}  // namespace

std::unique_ptr<SubsetSurrogate> make_mfgp_surrogate(const LoopConfig& config) {
    return std::make_unique<MfgpSurrogate>(config);
}

std::unique_ptr<SubsetSurrogate> make_independent_surrogate(const LoopConfig& config) {
    return std::make_unique<IndependentSurrogate>(config);
}

const SogpModel& FullSurrogate::fit(const Dataset& data, Rng& rng) {
    FitConfig fit = config_.fit;
    std::vector<SogpParams> warm;
    if (model_) {
        warm.push_back(model_->params());
        fit.starts = config_.refit_starts;
        fit.include_default_start = false;
    }
    model_.emplace(SogpModel::fit(data, fit, rng, warm));
    return *model_;
}

ClboState initialize(const BenchmarkProblem& problem, const ClboConfig& config, Evaluator& evaluator, Rng& design_rng,
                     Rng& bootstrap_rng) {
    problem.bounds.validate();
    const int d = problem.dimension();
    config.validate(d);
    const int n_init = config.resolved_n_init(d);

    ClboState state;
    state.inputs.resize(0, d);
    IterationRecord record;
    const Matrix design = latin_hypercube(n_init, d, design_rng);
    for (int i = 0; i < n_init; ++i) {
        const auto outcome = evaluator.evaluate(design.row(i).transpose());
        state.append(outcome.x_unit, outcome.value);
        QueryRecord q;
        q.x = outcome.x;
        q.x_unit = outcome.x_unit;
        q.value = outcome.value;
        q.acquisition = std::numeric_limits<double>::quiet_NaN();
        q.z = std::numeric_limits<double>::quiet_NaN();
        q.substituted = outcome.substituted;
        record.queries.push_back(std::move(q));
    }
    record.f_min = state.incumbent.f_min;
    record.n_total = state.n_total;
    state.history.push_back(std::move(record));

    for (int i = 0; i < config.m_subsets; ++i) {
        state.subsets.push_back(config.bootstrap ? bootstrap_indices(state.inputs, bootstrap_rng)
                                                 : unique_row_indices(state.inputs));
    }
    return state;
}

std::vector<Candidate> search_samples(const ClboState& state, const CycleModels& models, const ClboConfig& config,
                                      Rng& rng) {
    const int d = static_cast<int>(state.inputs.cols());
    const Bounds unit = Bounds::unit_cube(d);
    const double f_min = state.transform().standardize(state.incumbent.f_min);
    const std::vector<Vector> seeds{state.incumbent.x_min};
    std::vector<Candidate> selected;

    if (models.sogp != nullptr) {
        const SogpModel& sogp = *models.sogp;
        const auto best = maximize_acquisition(
            [&](const Vector& x) {
                const Posterior p = sogp.predict(x);
                return expected_improvement(p.mean, p.variance, f_min);
            },
            unit, config.acquisition, rng, seeds);
        const double z = detail::z_or_nan(sogp.predict(best.x), f_min);
        selected.push_back(Candidate{best.x, {Provenance::Source::Sogp, 0}, best.value, z, classify_z(z), false});
    }

    if (models.subsets != nullptr) {
        const SubsetSurrogate& subsets = *models.subsets;
        for (int i = 0; i < subsets.outputs(); ++i) {
            auto best = maximize_acquisition(
                [&](const Vector& x) {
                    const Posterior p = subsets.predict(i, x);
                    return expected_improvement(p.mean, p.variance, f_min);
                },
                unit, config.acquisition, rng, seeds);
            bool pei = false;
            if (min_distance(best.x, state.inputs, selected) < config.epsilon) {
                const Vector anchor = best.x;
                const Vector lengthscales = subsets.lengthscales(i);
                best = maximize_acquisition(
                    [&](const Vector& x) {
                        return pseudo_expected_improvement(subsets.predict(i, x), f_min, x, anchor, lengthscales);
                    },
                    unit, config.acquisition, rng, seeds);
                pei = true;
            }
            const double z = detail::z_or_nan(subsets.predict(i, best.x), f_min);
            selected.push_back(Candidate{best.x, {Provenance::Source::Subset, i}, best.value, z, classify_z(z), pei});
        }
    }
    return selected;
}

void exchange_samples(ClboState& state, const std::vector<Candidate>& candidates,
                      const std::vector<Evaluator::Outcome>& outcomes, const ClboConfig& config, Rng& rng) {
    require(candidates.size() == outcomes.size(), "exchange_samples: one outcome per candidate required");
    const double previous = state.incumbent.f_min;
    std::vector<int> rows;
    rows.reserve(outcomes.size());
    for (const auto& outcome : outcomes) {
        rows.push_back(state.append(outcome.x_unit, outcome.value));
    }

    const int m = static_cast<int>(state.subsets.size());
    int sogp_pos = -1;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        if (candidates[k].provenance.source == Provenance::Source::Sogp) {
            sogp_pos = static_cast<int>(k);
            break;
        }
    }
    auto add_sogp_to_random_subset = [&] {
        if (sogp_pos >= 0 && m > 0) {
            std::uniform_int_distribution<int> pick(0, m - 1);
            state.add_to_subset(pick(rng), rows[static_cast<std::size_t>(sogp_pos)]);
        }
    };

    if (state.incumbent.f_min < previous) {
        // First batch member achieving the new best value.
        std::size_t winner = 0;
        for (std::size_t k = 0; k < outcomes.size(); ++k) {
            if (outcomes[k].value == state.incumbent.f_min) {
                winner = k;
                break;
            }
        }
        if (candidates[winner].provenance.source == Provenance::Source::Sogp) {
            for (int i = 0; i < m; ++i) {
                state.add_to_subset(i, rows[winner]);
            }
        } else {
            const int nbest = candidates[winner].provenance.index;
            for (int i = 0; i < m; ++i) {
                if (i != nbest) {
                    state.add_to_subset(i, rows[winner]);
                }
            }
            add_sogp_to_random_subset();
        }
    } else {
        add_sogp_to_random_subset();
    }

    if (config.own_query_retention) {
        for (std::size_t k = 0; k < candidates.size(); ++k) {
            if (candidates[k].provenance.source == Provenance::Source::Subset) {
                state.add_to_subset(candidates[k].provenance.index, rows[k]);
            }
        }
    }
}

OptimizationResult run_co_learning(const BenchmarkProblem& problem, const ClboConfig& config,
                                   const SurrogateFactory& factory, const std::string& optimizer_name,
                                   const CycleObserver& observer) {
    const auto started = std::chrono::steady_clock::now();
    const int d = problem.dimension();
    config.validate(d);
    Rng design_rng = make_stream(config.seed, detail::kDesignStream);
    Rng fit_rng = make_stream(config.seed, detail::kFitStream);
    Rng acquisition_rng = make_stream(config.seed, detail::kAcquisitionStream);
    Rng exchange_rng = make_stream(config.seed, detail::kExchangeStream);
    Rng bootstrap_rng = make_stream(config.seed, detail::kBootstrapStream);
    Rng ambiguity_rng = make_stream(config.seed, detail::kAmbiguityStream);
    Evaluator evaluator(problem, make_stream(config.seed, detail::kFailureStream));

    ClboState state = initialize(problem, config, evaluator, design_rng, bootstrap_rng);
    if (observer) observer(state);
    const int budget = config.resolved_n_budget(d);
    const int t_max = config.resolved_t_max(d, config.batch_size());

    FullSurrogate full(config);
    std::unique_ptr<SubsetSurrogate> subset_models = factory(config);

    while (state.n_total < budget && state.t_total < t_max) {
        CycleModels models;
        if (config.use_sogp) {
            models.sogp = &full.fit(state.master_dataset(), fit_rng);
        }
        subset_models->fit(state.subset_collection(), fit_rng);
        models.subsets = subset_models.get();

        IterationRecord record;
        record.ambiguity = ambiguity_on_grid(problem, state, models, config.ambiguity_points, ambiguity_rng);

        const auto candidates = search_samples(state, models, config, acquisition_rng);
        std::vector<Evaluator::Outcome> outcomes;
        outcomes.reserve(candidates.size());
        for (const auto& c : candidates) {
            outcomes.push_back(evaluator.evaluate(c.x_unit));
        }
        exchange_samples(state, candidates, outcomes, config, exchange_rng);
        ++state.t_total;
        if (observer) observer(state);

        record.iteration = state.t_total;
        for (std::size_t k = 0; k < candidates.size(); ++k) {
            record.queries.push_back(detail::to_query(candidates[k], outcomes[k]));
        }
        record.f_min = state.incumbent.f_min;
        record.n_total = state.n_total;
        state.history.push_back(std::move(record));
    }

    OptimizationResult result;
    result.optimizer = optimizer_name;
    result.seed = config.seed;
    result.history = std::move(state.history);
    result.t_total = state.t_total;
    detail::finish_result(result, problem, state.inputs, state.values, evaluator.failures(), started);
    return result;
}

OptimizationResult run_clbo(const BenchmarkProblem& problem, const ClboConfig& config,
                            const CycleObserver& observer) {
    const std::string name = "clbo-mfgp" + std::to_string(config.m_subsets) + (config.use_sogp ? "+sogp" : "");
    return run_co_learning(problem, config, make_mfgp_surrogate, name, observer);
}

}  // namespace clbo
