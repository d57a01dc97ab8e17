#include "clbo/baselines.hpp"
#include "clbo/errors.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

using namespace clbo;
using namespace clbo::testing;

namespace {

LoopConfig loop(std::uint64_t seed, int budget) {
    LoopConfig c;
    c.seed = seed;
    c.n_budget = budget;
    c.fit.starts = 3;
    return c;
}

SogpModel smooth_model(Rng& rng) {
    const Matrix x = random_unit_matrix(6, 1, rng);
    Vector y(6);
    for (int i = 0; i < 6; ++i) y[i] = std::sin(5.0 * x(i, 0));
    return SogpModel(Dataset::from_raw(x, y), SogpParams{Vector::Constant(1, 0.2), 1.0, 1e-6});
}

SogpModel bimodal_model() {
    Matrix x(6, 1);
    x << 0.05, 0.2, 0.35, 0.6, 0.75, 0.95;
    const Vector y = (Vector(6) << 1.0, -0.8, 1.0, 1.0, -0.7, 1.0).finished();
    return SogpModel(Dataset::from_raw(x, y), SogpParams{Vector::Constant(1, 0.08), 1.0, 1e-6});
}

void check_loop_invariants(const OptimizationResult& r, int budget, int batch) {
    double previous = r.history.front().f_min;
    for (std::size_t t = 1; t < r.history.size(); ++t) {
        CHECK(r.history[t].queries.size() == static_cast<std::size_t>(batch));
        CHECK(r.history[t].f_min <= previous);
        previous = r.history[t].f_min;
        for (const auto& q : r.history[t].queries) {
            CHECK(q.x_unit.allFinite());
            CHECK((q.x_unit.array() >= 0.0).all());
            CHECK((q.x_unit.array() <= 1.0).all());
        }
    }
    CHECK(r.n_total <= budget + batch);
    for (std::size_t k = 1; k < r.best_by_evaluation.size(); ++k)
        CHECK(r.best_by_evaluation[k] <= r.best_by_evaluation[k - 1]);
}

}  // namespace

TEST_CASE("optimizer names") {
    CHECK(OptimizerSpec::parse("ego").label() == "ego");
    CHECK(OptimizerSpec::parse("cl").label() == "cl3");
    CHECK(OptimizerSpec::parse("pei5").label() == "pei5");
    CHECK(OptimizerSpec::parse("msbo").label() == "msbo");
    CHECK(OptimizerSpec::parse("clbo").label() == "clbo-mfgp2+sogp");
    CHECK(OptimizerSpec::parse("clbo-mfgp4").label() == "clbo-mfgp4");
    CHECK(OptimizerSpec::parse("clbo-mfgp3+sogp").m_subsets == 3);
    for (const char* bad : {"", "egox", "cl0", "clbo-mfgp", "clbo-mfgp0", "pei-1", "random"}) {
        try {
            OptimizerSpec::parse(bad);
            FAIL("accepted " << bad);
        } catch (const ConfigError& e) {
            CHECK(e.field() == "optimizer");
        }
    }
}

TEST_CASE("EGO solves the 1-D quadratic") {
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        LoopConfig c;
        c.seed = seed;
        c.n_budget = 30;
        if (run_ego(make_problem("quadratic1"), c).final_regret() < 1e-3) ++hits;
    }
    CHECK(hits >= 18);
}

TEST_CASE("EGO edge cases") {
    LoopConfig c = loop(1, 6);
    c.n_init = 6;
    const auto r = run_ego(make_problem("quadratic1"), c);
    CHECK(r.t_total == 0);
    const auto a = run_ego(make_problem("branin2"), loop(2, 20));
    const auto b = run_ego(make_problem("branin2"), loop(2, 20));
    CHECK(a.best_by_evaluation == b.best_by_evaluation);
    check_loop_invariants(a, 20, 1);
}

TEST_CASE("constant liar with batch 1 is EGO") {
    const auto a = run_ego(make_problem("branin2"), loop(3, 20));
    const auto b = run_constant_liar(make_problem("branin2"), loop(3, 20), 1);
    CHECK(a.best_by_evaluation == b.best_by_evaluation);
    const auto c = run_pei_batch(make_problem("branin2"), loop(3, 20), 1);
    CHECK(a.best_by_evaluation == c.best_by_evaluation);
}

TEST_CASE("batch baselines evaluate three points per cycle") {
    for (auto* run : {&run_constant_liar, &run_pei_batch}) {
        const auto r = (*run)(make_problem("branin2"), loop(4, 30), 3);
        check_loop_invariants(r, 30, 3);
    }
}

TEST_CASE("constant liar batches are spread out") {
    int distinct = 0;
    const int trials = 40;
    for (int k = 0; k < trials; ++k) {
        Rng rng(k);
        const SogpModel model = smooth_model(rng);
        const double f_min = model.data().outputs.minCoeff();
        const auto batch = select_batch(model, f_min, 3, BatchRule::ConstantLiar, AcquisitionConfig{}, rng);
        bool ok = true;
        for (std::size_t i = 0; i < batch.size(); ++i)
            for (std::size_t j = 0; j < i; ++j) ok = ok && (batch[i].x_unit - batch[j].x_unit).norm() > 1e-9;
        if (ok) ++distinct;
    }
    CHECK(distinct >= 0.95 * trials);
}

TEST_CASE("pseudo-EI batch") {
    Rng rng(5);
    const SogpModel model = bimodal_model();
    const double f_min = model.data().outputs.minCoeff();
    const auto batch = select_batch(model, f_min, 3, BatchRule::PseudoEi, AcquisitionConfig{}, rng);
    std::vector<Vector> chosen;
    for (const auto& c : batch) {
        for (const auto& previous : chosen) CHECK(batch_pseudo_ei(model, f_min, previous, chosen) == 0.0);
        chosen.push_back(c.x_unit);
    }

    // The second pick should land in the other EI bump, as seen on a dense grid.
    auto ei = [&](double x) {
        const Posterior p = model.predict(Vector::Constant(1, x));
        return expected_improvement(p.mean, p.variance, f_min);
    };
    double best_left = 0.0;
    double best_right = 0.0;
    double arg_left = 0.0;
    double arg_right = 0.0;
    for (int i = 0; i < 4096; ++i) {
        const double x = i / 4095.0;
        if (x < 0.475 && ei(x) > best_left) best_left = ei(x), arg_left = x;
        if (x >= 0.475 && ei(x) > best_right) best_right = ei(x), arg_right = x;
    }
    const double first = batch[0].x_unit[0];
    const double second = batch[1].x_unit[0];
    const double other = std::abs(first - arg_left) < std::abs(first - arg_right) ? arg_right : arg_left;
    CHECK(std::abs(second - other) < 0.05);
}

TEST_CASE("MSBO shares the co-learning loop") {
    ClboConfig c;
    c.seed = 6;
    c.n_budget = 24;
    c.fit.starts = 3;
    const auto msbo = run_msbo(make_problem("branin2"), c);
    const auto clbo = run_clbo(make_problem("branin2"), c);
    CHECK(msbo.optimizer == "msbo");
    CHECK(msbo.history.size() == clbo.history.size());
    for (std::size_t t = 1; t < msbo.history.size(); ++t) CHECK(msbo.history[t].queries.size() == 3);
    CHECK(msbo.history[0].queries.size() == clbo.history[0].queries.size());
    for (std::size_t q = 0; q < msbo.history[0].queries.size(); ++q)
        CHECK(msbo.history[0].queries[q].x == clbo.history[0].queries[q].x);
    const auto again = run_msbo(make_problem("branin2"), c);
    CHECK(again.best_by_evaluation == msbo.best_by_evaluation);
}

TEST_CASE("MSBO without bootstrap proposes closer candidates") {
    // Identical subsets give near-identical models, so per-cycle proposals bunch together.
    auto mean_spread = [](const OptimizationResult& r) {
        double total = 0.0;
        int count = 0;
        for (std::size_t t = 1; t < r.history.size(); ++t) {
            const auto& q = r.history[t].queries;
            for (std::size_t i = 0; i < q.size(); ++i)
                for (std::size_t j = 0; j < i; ++j) {
                    total += (q[i].x_unit - q[j].x_unit).norm();
                    ++count;
                }
        }
        return count > 0 ? total / count : 0.0;
    };
    double with_bootstrap = 0.0;
    double without = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        ClboConfig c;
        c.seed = seed;
        c.n_budget = 30;
        c.fit.starts = 3;
        c.use_sogp = false;
        c.own_query_retention = false;
        with_bootstrap += mean_spread(run_msbo(make_problem("branin2"), c));
        c.bootstrap = false;
        without += mean_spread(run_msbo(make_problem("branin2"), c));
    }
    CHECK(without < with_bootstrap);
}

TEST_CASE("run_optimizer dispatch") {
    ClboConfig c;
    c.seed = 7;
    c.n_budget = 9;
    c.fit.starts = 2;
    CHECK(run_optimizer(make_problem("quadratic1"), OptimizerSpec::parse("ego"), c).optimizer == "ego");
    CHECK(run_optimizer(make_problem("quadratic1"), OptimizerSpec::parse("cl2"), c).optimizer == "cl2");
    CHECK(run_optimizer(make_problem("quadratic1"), OptimizerSpec::parse("clbo-mfgp3"), c).optimizer ==
          "clbo-mfgp3");
}
