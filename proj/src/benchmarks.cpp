#include "clbo/benchmarks.hpp"

#include "clbo/errors.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace clbo {

using std::numbers::pi;

double michalewicz(const Vector& x, double steepness) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double inner = std::sin(static_cast<double>(i + 1) * x[i] * x[i] / pi);
        sum += std::sin(x[i]) * std::pow(inner, 2.0 * steepness);
    }
    return -sum;
}

double rastrigin(const Vector& x) {
    double sum = 10.0 * static_cast<double>(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        sum += x[i] * x[i] - 10.0 * std::cos(2.0 * pi * x[i]);
    }
    return sum;
}

double ackley(const Vector& x) {
    const double d = static_cast<double>(x.size());
    const double sq = x.squaredNorm() / d;
    double cosines = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        cosines += std::cos(2.0 * pi * x[i]);
    }
    return -20.0 * std::exp(-0.2 * std::sqrt(sq)) - std::exp(cosines / d) + 20.0 + std::numbers::e;
}

double hartman6(const Vector& x) {
    require(x.size() == 6, "hartman6: expects a 6-vector");
    static constexpr std::array<double, 4> alpha{1.0, 1.2, 3.0, 3.2};
    static constexpr std::array<std::array<double, 6>, 4> a{{{10, 3, 17, 3.5, 1.7, 8},
                                                             {0.05, 10, 17, 0.1, 8, 14},
                                                             {3, 3.5, 1.7, 10, 17, 8},
                                                             {17, 8, 0.05, 10, 0.1, 14}}};
    static constexpr std::array<std::array<double, 6>, 4> p{{{1312, 1696, 5569, 124, 8283, 5886},
                                                             {2329, 4135, 8307, 3736, 1004, 9991},
                                                             {2348, 1451, 3522, 2883, 3047, 6650},
                                                             {4047, 8828, 8732, 5743, 1091, 381}}};
    double sum = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        double inner = 0.0;
        for (std::size_t j = 0; j < 6; ++j) {
            const double diff = x[static_cast<Eigen::Index>(j)] - 1e-4 * p[i][j];
            inner += a[i][j] * diff * diff;
        }
        sum += alpha[i] * std::exp(-inner);
    }
    return -sum;
}

double trid(const Vector& x) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        sum += (x[i] - 1.0) * (x[i] - 1.0);
        if (i > 0) {
            sum -= x[i] * x[i - 1];
        }
    }
    return sum;
}

double branin(const Vector& x) {
    require(x.size() == 2, "branin: expects a 2-vector");
    const double b = 5.1 / (4.0 * pi * pi);
    const double c = 5.0 / pi;
    const double t = 1.0 / (8.0 * pi);
    const double term = x[1] - b * x[0] * x[0] + c * x[0] - 6.0;
    return term * term + 10.0 * (1.0 - t) * std::cos(x[0]) + 10.0;
}

double gramacy_lee(const Vector& x) {
    require(x.size() == 1, "gramacy_lee: expects a 1-vector");
    const double v = x[0];
    return std::sin(10.0 * pi * v) / (2.0 * v) + std::pow(v - 1.0, 4);
}

double shifted_quadratic(const Vector& x) { return (x.array() - 0.3).square().sum(); }

std::vector<std::string> problem_names() {
    return {"quadratic1", "gramacy_lee1", "branin2", "michalewicz2", "michalewicz5",
            "rastrigin5", "ackley5", "hartman6", "trid10"};
}

BenchmarkProblem make_problem(std::string_view name) {
    if (name == "quadratic1") {
        return {"quadratic1", Bounds::unit_cube(1), shifted_quadratic, 0.0};
    }
    if (name == "gramacy_lee1") {
        return {"gramacy_lee1", Bounds::uniform(1, 0.5, 2.5), gramacy_lee, kGramacyLeeOptimum};
    }
    if (name == "branin2") {
        return {"branin2", Bounds{Eigen::Vector2d(-5.0, 0.0), Eigen::Vector2d(10.0, 15.0)}, branin, kBraninOptimum};
    }
    if (name == "michalewicz2") {
        return {"michalewicz2", Bounds::uniform(2, 0.0, pi), [](const Vector& x) { return michalewicz(x); },
                kMichalewicz2Optimum};
    }
    if (name == "michalewicz5") {
        return {"michalewicz5", Bounds::uniform(5, 0.0, pi), [](const Vector& x) { return michalewicz(x); },
                kMichalewicz5Optimum};
    }
    if (name == "rastrigin5") {
        return {"rastrigin5", Bounds::uniform(5, -5.12, 5.12), rastrigin, 0.0};
    }
    if (name == "ackley5") {
        return {"ackley5", Bounds::uniform(5, -2.0, 2.0), ackley, 0.0};
    }
    if (name == "hartman6") {
        return {"hartman6", Bounds::unit_cube(6), hartman6, kHartman6Optimum};
    }
    if (name == "trid10") {
        // Minimum -d(d+4)(d-1)/6 at x_i = i(d+1-i).
        return {"trid10", Bounds::uniform(10, -100.0, 100.0), trid, -210.0};
    }
    throw ConfigError("problem", "unknown problem '" + std::string(name) + "'");
}

std::vector<BenchmarkProblem> desk_scale_suite() {
    return {make_problem("branin2"), make_problem("michalewicz2"), make_problem("gramacy_lee1")};
}

}  // namespace clbo
