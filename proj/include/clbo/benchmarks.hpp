#pragma once

#include "clbo/dataset.hpp"

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace clbo {

/// An analytic test problem in raw coordinates.
struct BenchmarkProblem {
    std::string name;
    Bounds bounds;
    std::function<double(const Vector&)> evaluate;
    std::optional<double> known_optimum;
    /// Probability that a single evaluation is reported as failed (seeded by the caller).
    double failure_rate = 0.0;

    [[nodiscard]] int dimension() const { return bounds.dimension(); }
    /// Regret of `value`, or the value itself when no optimum is known.
    [[nodiscard]] double regret(double value) const { return known_optimum ? value - *known_optimum : value; }
};

/// -sum_i sin(x_i) sin(i x_i^2 / pi)^(2 steepness), i counted from 1.
double michalewicz(const Vector& x, double steepness = 10.0);
double rastrigin(const Vector& x);
/// a = 20, b = 0.2, c = 2 pi.
double ackley(const Vector& x);
double hartman6(const Vector& x);
double trid(const Vector& x);
double branin(const Vector& x);
/// sin(10 pi x) / (2x) + (x - 1)^4 on [0.5, 2.5].
double gramacy_lee(const Vector& x);
/// (x - 0.3)^2 on [0, 1].
double shifted_quadratic(const Vector& x);

// Reference minima; regenerated by `clbo oracle`.
inline constexpr double kMichalewicz2Optimum = -1.8013034100985532;
inline constexpr double kMichalewicz5Optimum = -4.687658179088149;
inline constexpr double kHartman6Optimum = -3.322368011415515;
inline constexpr double kBraninOptimum = 0.39788735772973816;
inline constexpr double kGramacyLeeOptimum = -0.8690111349894998;

/// Names accepted by make_problem().
std::vector<std::string> problem_names();

/// Builds a registered problem. Throws ConfigError (field "problem") for unknown names.
BenchmarkProblem make_problem(std::string_view name);

/// Fast problems for CI-scale runs: 2-D Branin, 2-D Michalewicz, 1-D Gramacy-Lee.
std::vector<BenchmarkProblem> desk_scale_suite();

}  // namespace clbo
