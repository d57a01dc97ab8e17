#pragma once

#include "clbo/dataset.hpp"

#include <functional>

namespace clbo {

/// Objective with gradient. `gradient` may be null when only the value is needed.
/// Implementations signal an infeasible point by returning +infinity.
using SmoothObjective = std::function<double(const Vector& x, Vector* gradient)>;
using PlainObjective = std::function<double(const Vector& x)>;

struct LocalResult {
    Vector x;
    double value = 0.0;
    int iterations = 0;
    int evaluations = 0;
};

struct QuasiNewtonOptions {
    int max_iterations = 100;
    double gradient_tolerance = 1e-5;
    double initial_step = 0.1;
    double line_tolerance = 0.1;
};

/// Bounded quasi-Newton (BFGS) minimization. The box is handled by a smooth
/// logistic reparameterization, so iterates never leave [lower, upper].
/// The result is the best point evaluated, never worse than `start`.
LocalResult minimize_quasi_newton(const SmoothObjective& objective, const Vector& start, const Vector& lower,
                                  const Vector& upper, const QuasiNewtonOptions& options = {});

struct SimplexOptions {
    int max_iterations = 200;
    double initial_step = 0.05;
    double size_tolerance = 1e-7;
};

/// Nelder-Mead minimization on the box. Trial points are projected onto the
/// box before evaluation and the returned point is in bounds.
LocalResult minimize_simplex(const PlainObjective& objective, const Vector& start, const Vector& lower,
                             const Vector& upper, const SimplexOptions& options = {});

}  // namespace clbo
