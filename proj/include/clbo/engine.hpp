#pragma once

#include "clbo/acquisition.hpp"
#include "clbo/benchmarks.hpp"
#include "clbo/mfgp.hpp"
#include "clbo/sogp.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace clbo {

/// Settings shared by every optimizer loop.
struct LoopConfig {
    /// 0 selects 6 * d.
    int n_init = 0;
    /// 0 selects 30 * d.
    int n_budget = 0;
    /// 0 selects 2 * ceil((n_budget - n_init) / batch size).
    int t_max = 0;
    std::uint64_t seed = 0;
    /// Used for the first fit of every model.
    FitConfig fit{};
    /// Random starts for later refits; the previous optimum is always a start too.
    int refit_starts = 1;
    AcquisitionConfig acquisition{};
    /// Held-out Latin-hypercube points for the per-iteration ensemble error
    /// decomposition; 0 disables it.
    int ambiguity_points = 256;

    [[nodiscard]] int resolved_n_init(int dimension) const { return n_init > 0 ? n_init : 6 * dimension; }
    [[nodiscard]] int resolved_n_budget(int dimension) const { return n_budget > 0 ? n_budget : 30 * dimension; }
    [[nodiscard]] int resolved_t_max(int dimension, int batch_size) const;
};

struct ClboConfig : LoopConfig {
    int m_subsets = 2;
    bool use_sogp = true;
    /// Minimum distance (normalized coordinates) before the pseudo-EI remedy kicks in.
    double epsilon = 1e-3;
    /// Each subset model's own query joins its own subset after every cycle.
    bool own_query_retention = true;
    /// When false every subset starts as a full copy of the initial design.
    bool bootstrap = true;

    [[nodiscard]] int batch_size() const { return m_subsets + (use_sogp ? 1 : 0); }
    /// Throws ContractViolation on invalid settings for a problem of the given dimension.
    void validate(int dimension) const;
};

/// Which model proposed a point.
struct Provenance {
    enum class Source { Initial, Sogp, Subset };
    Source source = Source::Initial;
    int index = 0;

    [[nodiscard]] std::string label() const;
    friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct QueryRecord {
    Vector x;       // raw coordinates
    Vector x_unit;  // normalized coordinates
    Provenance provenance;
    double value = 0.0;
    /// Acquisition value and z at selection time (standardized units); NaN when undefined.
    double acquisition = 0.0;
    double z = 0.0;
    Regime regime = Regime::Undefined;
    bool pei_invoked = false;
    /// The proposed point failed to evaluate and a random point was used instead.
    bool substituted = false;
};

struct AmbiguityRecord {
    double ensemble_error = 0.0;
    double individual_error = 0.0;
    double diversity = 0.0;
    int models = 0;
};

struct IterationRecord {
    /// 0 is the initial design.
    int iteration = 0;
    std::vector<QueryRecord> queries;
    double f_min = 0.0;
    int n_total = 0;
    std::optional<AmbiguityRecord> ambiguity;
};

struct OptimizationResult {
    std::string optimizer;
    std::string problem;
    std::uint64_t seed = 0;
    Incumbent incumbent;  // raw coordinates
    std::optional<double> known_optimum;
    std::vector<IterationRecord> history;
    /// Best value after each function call.
    std::vector<double> best_by_evaluation;
    int n_total = 0;
    int t_total = 0;
    int evaluation_failures = 0;
    int pei_invocations = 0;
    double wall_seconds = 0.0;

    [[nodiscard]] double regret(double value) const { return known_optimum ? value - *known_optimum : value; }
    [[nodiscard]] double final_regret() const { return regret(incumbent.f_min); }
    [[nodiscard]] std::vector<double> regret_by_evaluation() const;
    [[nodiscard]] std::vector<double> regret_by_iteration() const;
};

/// Evaluates a problem at normalized points, replacing failed evaluations
/// (injected failures, exceptions, non-finite values) with uniform random points.
class Evaluator {
public:
    struct Outcome {
        Vector x_unit;
        Vector x;
        double value = 0.0;
        bool substituted = false;
    };

    Evaluator(const BenchmarkProblem& problem, Rng failure_stream);

    Outcome evaluate(const Vector& x_unit);
    [[nodiscard]] int failures() const { return failures_; }

private:
    std::optional<double> try_evaluate(const Vector& x_raw);

    const BenchmarkProblem* problem_;
    Rng rng_;
    int failures_ = 0;
};

/// Optimizer state shared by the co-learning loop. Subsets hold row indices
/// into the master set, so every subset row is a master row by construction.
struct ClboState {
    Matrix inputs;  // normalized, one row per evaluation
    Vector values;  // raw objective values
    std::vector<std::vector<int>> subsets;
    Incumbent incumbent;  // normalized x
    int n_total = 0;
    int t_total = 0;
    std::vector<IterationRecord> history;

    [[nodiscard]] OutputTransform transform() const { return OutputTransform::fit(values); }
    /// Master set (duplicates merged) standardized with transform().
    [[nodiscard]] Dataset master_dataset() const;
    [[nodiscard]] SubsetCollection subset_collection() const;
    /// Appends a row and updates the incumbent; returns the row index.
    int append(const Vector& x_unit, double value);
    /// Adds `row` to subset `subset` unless an identical input is already there.
    bool add_to_subset(int subset, int row);
    /// Human-readable list of broken invariants (empty when consistent).
    [[nodiscard]] std::vector<std::string> invariant_violations() const;
};

/// Models of the bootstrap subsets, one output per subset.
class SubsetSurrogate {
public:
    virtual ~SubsetSurrogate() = default;
    virtual void fit(const SubsetCollection& subsets, Rng& rng) = 0;
    [[nodiscard]] virtual int outputs() const = 0;
    [[nodiscard]] virtual Posterior predict(int output, const Vector& x_unit) const = 0;
    [[nodiscard]] virtual Vector lengthscales(int output) const = 0;
};

using SurrogateFactory = std::function<std::unique_ptr<SubsetSurrogate>(const LoopConfig&)>;

/// One multi-form GP over all subsets (shared lengthscales).
std::unique_ptr<SubsetSurrogate> make_mfgp_surrogate(const LoopConfig& config);
/// An independently fitted SOGP per subset (own lengthscales).
std::unique_ptr<SubsetSurrogate> make_independent_surrogate(const LoopConfig& config);

/// Full-data SOGP that warm-starts each refit from its previous optimum.
class FullSurrogate {
public:
    explicit FullSurrogate(const LoopConfig& config) : config_(config) {}

    const SogpModel& fit(const Dataset& data, Rng& rng);
    [[nodiscard]] const SogpModel& model() const { return *model_; }
    [[nodiscard]] bool fitted() const { return model_.has_value(); }

private:
    LoopConfig config_;
    std::optional<SogpModel> model_;
};

struct Candidate {
    Vector x_unit;
    Provenance provenance;
    double acquisition = 0.0;
    double z = 0.0;
    Regime regime = Regime::Undefined;
    bool pei_invoked = false;
};

/// Models fitted for one cycle. `sogp` is null when the full-data model is disabled.
struct CycleModels {
    const SogpModel* sogp = nullptr;
    const SubsetSurrogate* subsets = nullptr;
};

/// Latin-hypercube design of n_init points, evaluated, plus the bootstrap subsets.
ClboState initialize(const BenchmarkProblem& problem, const ClboConfig& config, Evaluator& evaluator, Rng& design_rng,
                     Rng& bootstrap_rng);

/// One arg-max-EI point from the SOGP, then one per subset output. A subset
/// candidate closer than epsilon to the master set or to earlier candidates is
/// replaced by the arg-max of pseudo-EI anchored at it.
std::vector<Candidate> search_samples(const ClboState& state, const CycleModels& models, const ClboConfig& config,
                                      Rng& rng);

/// Appends the evaluated batch to the master set and routes points into the
/// subsets (SOGP winner goes everywhere, subset winner goes to the other
/// subsets, otherwise the SOGP point goes to one random subset).
void exchange_samples(ClboState& state, const std::vector<Candidate>& candidates,
                      const std::vector<Evaluator::Outcome>& outcomes, const ClboConfig& config, Rng& rng);

/// Called with the state after initialization and after every exchange.
using CycleObserver = std::function<void(const ClboState&)>;

/// Full co-learning loop with the given subset model family.
OptimizationResult run_co_learning(const BenchmarkProblem& problem, const ClboConfig& config,
                                   const SurrogateFactory& factory, const std::string& optimizer_name,
                                   const CycleObserver& observer = {});

/// CLBO: multi-form GP over the subsets plus (optionally) the full-data SOGP.
OptimizationResult run_clbo(const BenchmarkProblem& problem, const ClboConfig& config,
                            const CycleObserver& observer = {});

}  // namespace clbo
