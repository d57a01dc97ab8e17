#include "clbo/box_minimize.hpp"

#include "clbo/errors.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <gsl/gsl_vector.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>

namespace clbo {
namespace {

// Stand-in for +inf so GSL line searches stay finite.
constexpr double kInfeasible = 1e100;

void disable_gsl_abort() {
    static std::once_flag flag;
    std::call_once(flag, [] { gsl_set_error_handler_off(); });
}

struct GslVector {
    explicit GslVector(std::size_t n) : ptr(gsl_vector_alloc(n)) {}
    ~GslVector() { gsl_vector_free(ptr); }
    GslVector(const GslVector&) = delete;
    GslVector& operator=(const GslVector&) = delete;
    gsl_vector* ptr;
};

Vector to_eigen(const gsl_vector* v) {
    Vector out(static_cast<Eigen::Index>(v->size));
    for (std::size_t i = 0; i < v->size; ++i) {
        out[static_cast<Eigen::Index>(i)] = gsl_vector_get(v, i);
    }
    return out;
}

void check_box(const Vector& start, const Vector& lower, const Vector& upper) {
    require(start.size() == lower.size() && start.size() == upper.size(), "box minimizer: dimension mismatch");
    require(start.size() > 0, "box minimizer: empty parameter vector");
    require((lower.array() <= upper.array()).all(), "box minimizer: lower bound above upper bound");
}

// x = lower + (upper - lower) * logistic(u)
struct LogisticBox {
    Vector lower;
    Vector width;

    [[nodiscard]] Vector to_box(const Vector& u) const {
        Vector x(u.size());
        for (Eigen::Index i = 0; i < u.size(); ++i) {
            x[i] = width[i] > 0.0 ? lower[i] + width[i] / (1.0 + std::exp(-u[i])) : lower[i];
        }
        return x;
    }

    [[nodiscard]] Vector to_free(const Vector& x) const {
        Vector u(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            if (width[i] <= 0.0) {
                u[i] = 0.0;
                continue;
            }
            const double fraction = std::clamp((x[i] - lower[i]) / width[i], 1e-9, 1.0 - 1e-9);
            u[i] = std::log(fraction / (1.0 - fraction));
        }
        return u;
    }

    // dx/du
    [[nodiscard]] Vector jacobian(const Vector& u) const {
        Vector j(u.size());
        for (Eigen::Index i = 0; i < u.size(); ++i) {
            const double s = 1.0 / (1.0 + std::exp(-u[i]));
            j[i] = width[i] * s * (1.0 - s);
        }
        return j;
    }
};

struct SmoothContext {
    const SmoothObjective* objective;
    LogisticBox box;
    Vector best_x;
    double best_value = std::numeric_limits<double>::infinity();
    int evaluations = 0;

    double evaluate(const gsl_vector* u_gsl, gsl_vector* grad_gsl) {
        const Vector u = to_eigen(u_gsl);
        const Vector x = box.to_box(u);
        Vector gradient;
        double value = (*objective)(x, grad_gsl != nullptr ? &gradient : nullptr);
        ++evaluations;
        const bool feasible = std::isfinite(value) && (grad_gsl == nullptr || gradient.allFinite());
        if (feasible && value < best_value) {
            best_value = value;
            best_x = x;
        }
        if (!feasible) {
            value = kInfeasible;
        }
        if (grad_gsl != nullptr) {
            const Vector chain = feasible ? Vector(gradient.cwiseProduct(box.jacobian(u))) : Vector::Zero(u.size());
            for (Eigen::Index i = 0; i < u.size(); ++i) {
                gsl_vector_set(grad_gsl, static_cast<std::size_t>(i), chain[i]);
            }
        }
        return value;
    }
};

double smooth_f(const gsl_vector* u, void* params) { return static_cast<SmoothContext*>(params)->evaluate(u, nullptr); }

void smooth_df(const gsl_vector* u, void* params, gsl_vector* g) { static_cast<SmoothContext*>(params)->evaluate(u, g); }

void smooth_fdf(const gsl_vector* u, void* params, double* f, gsl_vector* g) {
    *f = static_cast<SmoothContext*>(params)->evaluate(u, g);
}

struct PlainContext {
    const PlainObjective* objective;
    Vector lower;
    Vector upper;
    Vector best_x;
    double best_value = std::numeric_limits<double>::infinity();
    int evaluations = 0;

    double evaluate(const gsl_vector* v) {
        const Vector x = to_eigen(v).cwiseMax(lower).cwiseMin(upper);
        double value = (*objective)(x);
        ++evaluations;
        if (!std::isfinite(value)) {
            return kInfeasible;
        }
        if (value < best_value) {
            best_value = value;
            best_x = x;
        }
        return value;
    }
};

double plain_f(const gsl_vector* v, void* params) { return static_cast<PlainContext*>(params)->evaluate(v); }

}  // namespace

LocalResult minimize_quasi_newton(const SmoothObjective& objective, const Vector& start, const Vector& lower,
                                  const Vector& upper, const QuasiNewtonOptions& options) {
    check_box(start, lower, upper);
    disable_gsl_abort();
    const auto n = static_cast<std::size_t>(start.size());
    SmoothContext context{&objective, LogisticBox{lower, upper - lower}, Vector{}, std::numeric_limits<double>::infinity(), 0};
    const Vector clamped_start = start.cwiseMax(lower).cwiseMin(upper);
    const Vector u0 = context.box.to_free(clamped_start);

    GslVector initial(n);
    for (std::size_t i = 0; i < n; ++i) {
        gsl_vector_set(initial.ptr, i, u0[static_cast<Eigen::Index>(i)]);
    }
    gsl_multimin_function_fdf function{&smooth_f, &smooth_df, &smooth_fdf, n, &context};
    std::unique_ptr<gsl_multimin_fdfminimizer, decltype(&gsl_multimin_fdfminimizer_free)> minimizer(
        gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, n), &gsl_multimin_fdfminimizer_free);

    int iterations = 0;
    if (gsl_multimin_fdfminimizer_set(minimizer.get(), &function, initial.ptr, options.initial_step,
                                      options.line_tolerance) == GSL_SUCCESS &&
        context.best_value < kInfeasible) {
        for (; iterations < options.max_iterations; ++iterations) {
            if (gsl_multimin_fdfminimizer_iterate(minimizer.get()) != GSL_SUCCESS) {
                break;
            }
            if (gsl_multimin_test_gradient(minimizer->gradient, options.gradient_tolerance) == GSL_SUCCESS) {
                ++iterations;
                break;
            }
        }
    }
    if (context.best_x.size() == 0) {
        return LocalResult{clamped_start, std::numeric_limits<double>::infinity(), iterations, context.evaluations};
    }
    return LocalResult{context.best_x, context.best_value, iterations, context.evaluations};
}

LocalResult minimize_simplex(const PlainObjective& objective, const Vector& start, const Vector& lower,
                             const Vector& upper, const SimplexOptions& options) {
    check_box(start, lower, upper);
    disable_gsl_abort();
    const auto n = static_cast<std::size_t>(start.size());
    PlainContext context{&objective, lower, upper, Vector{}, std::numeric_limits<double>::infinity(), 0};
    const Vector clamped_start = start.cwiseMax(lower).cwiseMin(upper);

    GslVector initial(n);
    GslVector steps(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        gsl_vector_set(initial.ptr, i, clamped_start[k]);
        gsl_vector_set(steps.ptr, i, options.initial_step * (upper[k] - lower[k]));
    }
    gsl_multimin_function function{&plain_f, n, &context};
    std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> minimizer(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n), &gsl_multimin_fminimizer_free);

    int iterations = 0;
    if (gsl_multimin_fminimizer_set(minimizer.get(), &function, initial.ptr, steps.ptr) == GSL_SUCCESS) {
        for (; iterations < options.max_iterations; ++iterations) {
            if (gsl_multimin_fminimizer_iterate(minimizer.get()) != GSL_SUCCESS) {
                break;
            }
            const double size = gsl_multimin_fminimizer_size(minimizer.get());
            if (gsl_multimin_test_size(size, options.size_tolerance) == GSL_SUCCESS) {
                ++iterations;
                break;
            }
        }
    }
    if (context.best_x.size() == 0) {
        return LocalResult{clamped_start, std::numeric_limits<double>::infinity(), iterations, context.evaluations};
    }
    return LocalResult{context.best_x, context.best_value, iterations, context.evaluations};
}

}  // namespace clbo
