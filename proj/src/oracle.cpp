#include "clbo/oracle.hpp"

#include "clbo/benchmarks.hpp"
#include "clbo/box_minimize.hpp"
#include "clbo/sampling.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_min.h>
#include <json.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace clbo {
namespace {

using nlohmann::json;
using Scalar = std::function<double(double)>;

struct Point {
    Vector x;
    double value = 0.0;
};

json point_json(const Point& p, const std::string& method) {
    return {{"value", p.value}, {"x", std::vector<double>(p.x.begin(), p.x.end())}, {"method", method}};
}

double gsl_scalar(double x, void* params) { return (*static_cast<const Scalar*>(params))(x); }

// Grid search followed by Brent's method inside the bracketing grid cells.
std::pair<double, double> minimize_1d(const Scalar& f, double lo, double hi, int grid) {
    const double h = (hi - lo) / grid;
    int best = 0;
    double best_value = f(lo);
    for (int i = 1; i <= grid; ++i) {
        const double v = f(lo + i * h);
        if (v < best_value) {
            best = i;
            best_value = v;
        }
    }
    if (best == 0 || best == grid) return {lo + best * h, best_value};

    gsl_function fn{&gsl_scalar, const_cast<Scalar*>(&f)};
    gsl_min_fminimizer* s = gsl_min_fminimizer_alloc(gsl_min_fminimizer_brent);
    gsl_min_fminimizer_set(s, &fn, lo + best * h, lo + (best - 1) * h, lo + (best + 1) * h);
    for (int iter = 0; iter < 200; ++iter) {
        gsl_min_fminimizer_iterate(s);
        const double a = gsl_min_fminimizer_x_lower(s);
        const double b = gsl_min_fminimizer_x_upper(s);
        if (gsl_min_test_interval(a, b, 1e-15, 0.0) == GSL_SUCCESS) break;
    }
    const double x = gsl_min_fminimizer_x_minimum(s);
    const double v = gsl_min_fminimizer_f_minimum(s);
    gsl_min_fminimizer_free(s);
    return v < best_value ? std::pair{x, v} : std::pair{lo + best * h, best_value};
}

Point polish(const BenchmarkProblem& problem, Vector start) {
    SimplexOptions options;
    options.max_iterations = 20000;
    options.initial_step = 1e-3 * (problem.bounds.upper - problem.bounds.lower).maxCoeff();
    options.size_tolerance = 1e-13;
    Point best{start, problem.evaluate(start)};
    // Restart until the simplex stops improving; a collapsed simplex can stall early.
    for (int round = 0; round < 5; ++round) {
        const LocalResult r =
            minimize_simplex(problem.evaluate, best.x, problem.bounds.lower, problem.bounds.upper, options);
        if (!(r.value < best.value)) break;
        best = {r.x, r.value};
    }
    return best;
}

Point grid_2d(const BenchmarkProblem& problem, int grid) {
    const Vector lo = problem.bounds.lower;
    const Vector step = (problem.bounds.upper - lo) / grid;
    Point best{lo, problem.evaluate(lo)};
    Vector x(2);
    for (int i = 0; i <= grid; ++i) {
        x[0] = lo[0] + i * step[0];
        for (int j = 0; j <= grid; ++j) {
            x[1] = lo[1] + j * step[1];
            const double v = problem.evaluate(x);
            if (v < best.value) best = {x, v};
        }
    }
    return polish(problem, best.x);
}

Point multistart(const BenchmarkProblem& problem, int starts, std::uint64_t seed, const std::vector<Vector>& extra) {
    Rng rng = make_stream(seed, 0);
    const int d = problem.dimension();
    const Matrix design = latin_hypercube(starts, d, rng);
    Point best{extra.empty() ? problem.bounds.from_unit(design.row(0).transpose()) : extra.front(), 0.0};
    best.value = problem.evaluate(best.x);
    auto consider = [&](const Vector& start) {
        SimplexOptions options;
        options.max_iterations = 4000;
        options.initial_step = 0.05 * (problem.bounds.upper - problem.bounds.lower).maxCoeff();
        options.size_tolerance = 1e-10;
        const LocalResult r =
            minimize_simplex(problem.evaluate, start, problem.bounds.lower, problem.bounds.upper, options);
        if (r.value < best.value) best = {r.x, r.value};
    };
    for (const auto& x : extra) consider(x);
    for (int s = 0; s < starts; ++s) consider(problem.bounds.from_unit(design.row(s).transpose()));
    return polish(problem, best.x);
}

// Michalewicz is a sum of independent 1-D terms, so its minimum is the sum of their minima.
Point michalewicz_separable(int dimension, int grid) {
    Point p{Vector(dimension), 0.0};
    for (int i = 0; i < dimension; ++i) {
        const double k = i + 1;
        const Scalar term = [k](double x) {
            return -std::sin(x) * std::pow(std::sin(k * x * x / std::numbers::pi), 20);
        };
        const auto [x, v] = minimize_1d(term, 0.0, std::numbers::pi, grid);
        p.x[i] = x;
        p.value += v;
    }
    p.value = michalewicz(p.x);
    return p;
}

// E[max(f - Y, 0)] for Y ~ N(mu, sigma^2), integrated directly.
double ei_quadrature(double mu, double sigma, double f_min) {
    const Scalar integrand = [&](double y) {
        const double u = (y - mu) / sigma;
        return (f_min - y) * std::exp(-0.5 * u * u) / (sigma * std::sqrt(2.0 * std::numbers::pi));
    };
    gsl_function fn{&gsl_scalar, const_cast<Scalar*>(&integrand)};
    gsl_integration_workspace* w = gsl_integration_workspace_alloc(1000);
    double result = 0.0;
    double error = 0.0;
    const int status = gsl_integration_qagil(&fn, f_min, 0.0, 1e-13, 1000, w, &result, &error);
    gsl_integration_workspace_free(w);
    if (status != GSL_SUCCESS) throw std::runtime_error("EI quadrature did not converge");
    return result;
}

}  // namespace

std::string oracle_fixture(const OracleOptions& options) {
    gsl_set_error_handler_off();
    json optima;

    const int fine = options.grid * 16;
    {
        const auto [x, v] = minimize_1d([](double t) { return gramacy_lee(Vector::Constant(1, t)); }, 0.5, 2.5, fine);
        optima["gramacy_lee1"] = point_json({Vector::Constant(1, x), v}, "grid+brent");
    }
    optima["branin2"] = point_json(grid_2d(make_problem("branin2"), options.grid), "grid+simplex");
    optima["michalewicz2"] = point_json(michalewicz_separable(2, fine), "separable grid+brent");
    optima["michalewicz5"] = point_json(michalewicz_separable(5, fine), "separable grid+brent");

    const Point m5 = multistart(make_problem("michalewicz5"), options.starts, options.seed, {});
    const Vector canonical = (Vector(6) << 0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573).finished();
    const Point h6 = multistart(make_problem("hartman6"), options.starts, options.seed, {canonical});
    optima["hartman6"] = point_json(h6, "multistart simplex");

    Vector trid_x(10);
    for (int i = 0; i < 10; ++i) trid_x[i] = (i + 1) * (10 - i);
    optima["trid10"] = point_json({trid_x, trid(trid_x)}, "analytic minimizer");
    optima["quadratic1"] = point_json({Vector::Constant(1, 0.3), 0.0}, "analytic minimizer");
    optima["rastrigin5"] = point_json({Vector::Zero(5), rastrigin(Vector::Zero(5))}, "analytic minimizer");
    optima["ackley5"] = point_json({Vector::Zero(5), ackley(Vector::Zero(5))}, "analytic minimizer");

    json ei = json::array();
    for (double sigma : {0.1, 1.0, 10.0})
        for (int z = -3; z <= 3; ++z) {
            const double mu = 0.5;
            const double f_min = mu + z * sigma;
            ei.push_back({{"mean", mu}, {"sigma", sigma}, {"f_min", f_min}, {"ei", ei_quadrature(mu, sigma, f_min)}});
        }

    json doc = {{"schema", "clbo-oracle/1"},
                {"options", {{"grid", options.grid}, {"starts", options.starts}, {"seed", options.seed}}},
                {"optima", optima},
                {"cross_checks",
                 {{"michalewicz5_multistart", m5.value},
                  {"hartman6_canonical", hartman6(canonical)}}},
                {"expected_improvement", ei}};
    return doc.dump(2) + "\n";
}

}  // namespace clbo
