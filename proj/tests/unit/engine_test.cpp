#include "clbo/engine.hpp"
#include "clbo/errors.hpp"
#include "clbo/sampling.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

using namespace clbo;
using namespace clbo::testing;

namespace {

ClboConfig small_config(std::uint64_t seed, int budget) {
    ClboConfig c;
    c.seed = seed;
    c.n_budget = budget;
    c.fit.starts = 3;
    return c;
}

// Subset model whose EI peaks at a chosen point with a flat, known variance.
class PeakSurrogate : public SubsetSurrogate {
public:
    PeakSurrogate(std::vector<Vector> peaks, double lengthscale) : peaks_(std::move(peaks)), lengthscale_(lengthscale) {}
    void fit(const SubsetCollection&, Rng&) override {}
    [[nodiscard]] int outputs() const override { return static_cast<int>(peaks_.size()); }
    [[nodiscard]] Posterior predict(int output, const Vector& x) const override {
        return {(x - peaks_[static_cast<std::size_t>(output)]).squaredNorm() * 10.0 - 2.0, 0.01};
    }
    [[nodiscard]] Vector lengthscales(int) const override {
        return Vector::Constant(peaks_.front().size(), lengthscale_);
    }

private:
    std::vector<Vector> peaks_;
    double lengthscale_;
};

ClboState state_from(const Matrix& x, const Vector& y, std::vector<std::vector<int>> subsets) {
    ClboState state;
    for (int i = 0; i < x.rows(); ++i) state.append(x.row(i).transpose(), y[i]);
    state.subsets = std::move(subsets);
    return state;
}

Evaluator::Outcome outcome(double x, double value) {
    return {Vector::Constant(1, x), Vector::Constant(1, x), value, false};
}

Candidate candidate(double x, Provenance::Source source, int index) {
    return Candidate{Vector::Constant(1, x), {source, index}, 0.0, 0.0, Regime::Balanced, false};
}

}  // namespace

TEST_CASE("initialization with defaults") {
    const BenchmarkProblem problem = make_problem("branin2");
    ClboConfig config;
    Evaluator evaluator(problem, make_stream(1, 5));
    Rng design = make_stream(1, 1);
    Rng boot = make_stream(1, 6);
    const ClboState state = initialize(problem, config, evaluator, design, boot);
    CHECK(state.n_total == 12);
    CHECK(state.inputs.rows() == 12);
    CHECK(state.subsets.size() == 2);
    CHECK(state.invariant_violations().empty());
    CHECK(state.history.size() == 1);
    CHECK(state.history[0].iteration == 0);
}

TEST_CASE("configuration validation") {
    ClboConfig c;
    c.m_subsets = 0;
    c.use_sogp = false;
    CHECK_THROWS_AS(c.validate(2), ContractViolation);
    ClboConfig e;
    e.epsilon = -1.0;
    CHECK_THROWS_AS(e.validate(2), ContractViolation);
    ClboConfig b;
    b.n_init = 20;
    b.n_budget = 10;
    CHECK_THROWS_AS(b.validate(2), ContractViolation);
    CHECK(ClboConfig{}.resolved_t_max(5, 3) == 2 * 40);
}

TEST_CASE("budget equal to the initial design") {
    ClboConfig c = small_config(3, 6);
    c.n_init = 6;
    const auto r = run_clbo(make_problem("quadratic1"), c);
    CHECK(r.t_total == 0);
    CHECK(r.n_total == 6);
    CHECK(r.history.size() == 1);
}

TEST_CASE("single model degenerate configuration") {
    ClboConfig c = small_config(4, 12);
    c.m_subsets = 1;
    c.use_sogp = false;
    const auto r = run_clbo(make_problem("quadratic1"), c);
    for (std::size_t t = 1; t < r.history.size(); ++t) CHECK(r.history[t].queries.size() == 1);
    CHECK(r.n_total == 12);
}

TEST_CASE("run invariants and determinism") {
    const BenchmarkProblem problem = make_problem("branin2");
    const ClboConfig c = small_config(5, 24);
    std::vector<std::string> violations;
    const auto r = run_clbo(problem, c, [&](const ClboState& s) {
        for (auto& v : s.invariant_violations()) violations.push_back(v);
    });
    CHECK(violations.empty());
    const int t_max = c.resolved_t_max(2, 3);
    CHECK(r.t_total <= t_max);
    CHECK(r.n_total <= 24 + 3);
    double previous = r.history.front().f_min;
    for (std::size_t t = 1; t < r.history.size(); ++t) {
        CHECK(r.history[t].queries.size() == 3);
        CHECK(r.history[t].f_min <= previous);
        previous = r.history[t].f_min;
    }
    const auto again = run_clbo(problem, c);
    REQUIRE(again.best_by_evaluation.size() == r.best_by_evaluation.size());
    for (std::size_t t = 0; t < r.history.size(); ++t)
        for (std::size_t q = 0; q < r.history[t].queries.size(); ++q)
            CHECK(r.history[t].queries[q].x == again.history[t].queries[q].x);
    CHECK(r.incumbent.f_min == again.incumbent.f_min);
}

TEST_CASE("search: distant candidates keep plain EI") {
    Matrix x(4, 1);
    x << 0.0, 0.3, 0.6, 0.9;
    const ClboState state = state_from(x, (Vector(4) << 1.0, 2.0, 3.0, 4.0).finished(), {{0, 1}, {2, 3}});
    const PeakSurrogate surrogate({Vector::Constant(1, 0.15), Vector::Constant(1, 0.75)}, 0.1);
    Rng rng(6);
    const auto cands = search_samples(state, CycleModels{nullptr, &surrogate}, ClboConfig{}, rng);
    REQUIRE(cands.size() == 2);
    CHECK_FALSE(cands[0].pei_invoked);
    CHECK_FALSE(cands[1].pei_invoked);
    CHECK(std::abs(cands[0].x_unit[0] - 0.15) < 1e-3);
    CHECK(std::abs(cands[1].x_unit[0] - 0.75) < 1e-3);
}

TEST_CASE("search: a candidate on a master row switches to pseudo-EI") {
    int moved = 0;
    const int trials = 40;
    for (int k = 0; k < trials; ++k) {
        Rng data_rng(100 + k);
        const Matrix x = random_unit_matrix(5, 1, data_rng);
        const ClboState state = state_from(x, Vector::LinSpaced(5, 1.0, 5.0), {{0, 1, 2}, {2, 3, 4}});
        const Vector row = x.row(k % 5).transpose();
        const PeakSurrogate surrogate({row, row}, 0.1);
        Rng rng(k);
        const auto cands = search_samples(state, CycleModels{nullptr, &surrogate}, ClboConfig{}, rng);
        CHECK(cands[0].pei_invoked);
        CHECK(cands[1].pei_invoked);
        if ((cands[0].x_unit - row).norm() >= 1e-3) ++moved;
    }
    CHECK(moved >= 0.95 * trials);
}

TEST_CASE("search: batch of three with SOGP") {
    Rng rng(7);
    const Dataset d = random_dataset(8, 1, rng);
    const ClboState state = state_from(d.inputs, d.raw_outputs(), {{0, 1, 2, 3}, {4, 5, 6, 7}});
    const SogpModel sogp(state.master_dataset(), SogpParams{Vector::Constant(1, 0.2), 1.0, 1e-4});
    const PeakSurrogate surrogate({Vector::Constant(1, 0.123), Vector::Constant(1, 0.877)}, 0.1);
    const auto cands = search_samples(state, CycleModels{&sogp, &surrogate}, ClboConfig{}, rng);
    REQUIRE(cands.size() == 3);
    CHECK(cands[0].provenance.source == Provenance::Source::Sogp);
    CHECK(cands[1].provenance == Provenance{Provenance::Source::Subset, 0});
    CHECK(cands[2].provenance == Provenance{Provenance::Source::Subset, 1});
}

TEST_CASE("exchange rules") {
    Matrix x(4, 1);
    x << 0.1, 0.2, 0.3, 0.4;
    const Vector y = (Vector(4) << 5.0, 4.0, 3.0, 2.0).finished();
    ClboConfig config;
    config.own_query_retention = false;
    const std::vector<Candidate> cands{candidate(0.5, Provenance::Source::Sogp, 0),
                                       candidate(0.6, Provenance::Source::Subset, 0),
                                       candidate(0.7, Provenance::Source::Subset, 1)};

    SUBCASE("SOGP point is the new best") {
        ClboState s = state_from(x, y, {{0, 1}, {2, 3}});
        Rng rng(1);
        exchange_samples(s, cands, {outcome(0.5, 1.0), outcome(0.6, 3.0), outcome(0.7, 3.5)}, config, rng);
        CHECK(s.n_total == 7);
        CHECK(s.subsets[0] == std::vector<int>{0, 1, 4});
        CHECK(s.subsets[1] == std::vector<int>{2, 3, 4});
        CHECK(s.invariant_violations().empty());
    }
    SUBCASE("subset 0's point is the new best") {
        ClboState s = state_from(x, y, {{0, 1}, {2, 3}});
        Rng rng(2);
        exchange_samples(s, cands, {outcome(0.5, 3.0), outcome(0.6, 1.0), outcome(0.7, 3.5)}, config, rng);
        const auto& s0 = s.subsets[0];
        const auto& s1 = s.subsets[1];
        CHECK(std::find(s1.begin(), s1.end(), 5) != s1.end());
        CHECK(std::find(s0.begin(), s0.end(), 5) == s0.end());
        const bool sogp_in_0 = std::find(s0.begin(), s0.end(), 4) != s0.end();
        const bool sogp_in_1 = std::find(s1.begin(), s1.end(), 4) != s1.end();
        CHECK(sogp_in_0 != sogp_in_1);
    }
    SUBCASE("nothing improves") {
        ClboState s = state_from(x, y, {{0, 1}, {2, 3}});
        Rng rng(3);
        exchange_samples(s, cands, {outcome(0.5, 9.0), outcome(0.6, 8.0), outcome(0.7, 7.0)}, config, rng);
        CHECK(s.n_total == 7);
        CHECK(s.incumbent.f_min == 2.0);
        CHECK(s.subsets[0].size() + s.subsets[1].size() == 5);
    }
    SUBCASE("own-query retention") {
        config.own_query_retention = true;
        ClboState s = state_from(x, y, {{0, 1}, {2, 3}});
        Rng rng(4);
        exchange_samples(s, cands, {outcome(0.5, 9.0), outcome(0.6, 8.0), outcome(0.7, 7.0)}, config, rng);
        CHECK(std::find(s.subsets[0].begin(), s.subsets[0].end(), 5) != s.subsets[0].end());
        CHECK(std::find(s.subsets[1].begin(), s.subsets[1].end(), 6) != s.subsets[1].end());
    }
    SUBCASE("a duplicate input is not added twice") {
        ClboState s = state_from(x, y, {{0, 1}, {2, 3}});
        Rng rng(5);
        const std::vector<Candidate> dup{candidate(0.1, Provenance::Source::Sogp, 0)};
        exchange_samples(s, dup, {outcome(0.1, 0.5)}, config, rng);
        CHECK(s.subsets[0] == std::vector<int>{0, 1});
        CHECK(s.subsets[1] == std::vector<int>{2, 3, 4});
        CHECK(s.invariant_violations().empty());
    }
}

TEST_CASE("failed evaluations are replaced by random points") {
    BenchmarkProblem problem = make_problem("quadratic1");
    problem.failure_rate = 0.5;
    Evaluator evaluator(problem, make_stream(9, 5));
    int substituted = 0;
    for (int k = 0; k < 200; ++k) {
        const auto o = evaluator.evaluate(Vector::Constant(1, 0.3));
        CHECK(std::isfinite(o.value));
        CHECK(o.value == doctest::Approx(shifted_quadratic(o.x)));
        if (o.substituted) ++substituted;
    }
    CHECK(substituted <= evaluator.failures());
    CHECK(substituted > 50);
    CHECK(substituted < 150);

    BenchmarkProblem nan_problem = make_problem("quadratic1");
    nan_problem.evaluate = [](const Vector& x) { return x[0] < 0.5 ? std::nan("") : 1.0; };
    Evaluator nan_eval(nan_problem, make_stream(9, 5));
    const auto o = nan_eval.evaluate(Vector::Constant(1, 0.2));
    CHECK(o.substituted);
    CHECK(o.value == 1.0);
}

TEST_CASE("CLBO solves the 1-D quadratic") {
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        ClboConfig c;
        c.seed = seed;
        c.n_budget = 30;
        if (run_clbo(make_problem("quadratic1"), c).final_regret() < 1e-3) ++hits;
    }
    CHECK(hits >= 18);
}

TEST_CASE("ambiguity records") {
    ClboConfig c = small_config(10, 12);
    c.ambiguity_points = 64;
    const auto r = run_clbo(make_problem("branin2"), c);
    for (std::size_t t = 1; t < r.history.size(); ++t) {
        REQUIRE(r.history[t].ambiguity.has_value());
        const auto& a = *r.history[t].ambiguity;
        CHECK(a.models == 3);
        CHECK(std::abs(a.ensemble_error - (a.individual_error - a.diversity)) <= 1e-9 * std::max(1.0, a.individual_error));
    }
}
