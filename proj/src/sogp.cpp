#include "clbo/sogp.hpp"

#include "clbo/box_minimize.hpp"
#include "clbo/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace clbo {
namespace {

constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

Matrix noisy_gram(const Dataset& data, const SogpParams& params) {
    Matrix k = build_gram(data.inputs, params);
    k.diagonal().array() += params.noise_variance;
    return k;
}

void check_params(const Dataset& data, const SogpParams& params) {
    if (params.lengthscales.size() != data.dimension()) {
        throw ContractViolation("SOGP: lengthscale count does not match input dimension");
    }
    require((params.lengthscales.array() > 0.0).all(), "SOGP: lengthscales must be positive");
    require(params.signal_variance > 0.0, "SOGP: signal variance must be positive");
    require(params.noise_variance >= 0.0, "SOGP: noise variance must be non-negative");
}

struct LogBox {
    Vector lower;
    Vector upper;
};

LogBox sogp_log_box(int dimension, const FitConfig& config) {
    const auto& b = config.bounds;
    LogBox box{Vector(dimension + 2), Vector(dimension + 2)};
    box.lower.head(dimension).setConstant(std::log(b.lengthscale.lower));
    box.upper.head(dimension).setConstant(std::log(b.lengthscale.upper));
    box.lower[dimension] = std::log(b.signal_variance.lower);
    box.upper[dimension] = std::log(b.signal_variance.upper);
    const double noise_low = std::log(std::max(b.noise_variance.lower, kNoiseFloor));
    box.lower[dimension + 1] = noise_low;
    box.upper[dimension + 1] = config.learn_noise ? std::log(b.noise_variance.upper) : noise_low;
    return box;
}

double log_uniform(Rng& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    return u(rng);
}

}  // namespace

Vector pack_sogp(const SogpParams& params) {
    const int d = params.dimension();
    Vector packed(d + 2);
    packed.head(d) = params.lengthscales.array().log().matrix();
    packed[d] = std::log(params.signal_variance);
    packed[d + 1] = std::log(params.noise_variance);
    return packed;
}

SogpParams unpack_sogp(const Vector& packed) {
    const auto d = packed.size() - 2;
    require(d >= 1, "unpack_sogp: packed vector too short");
    return SogpParams{packed.head(d).array().exp().matrix(), std::exp(packed[d]), std::exp(packed[d + 1])};
}

CholeskyModel factor_sogp(const Dataset& data, const SogpParams& params) {
    check_params(data, params);
    auto model = CholeskyModel::try_factor(noisy_gram(data, params), data.outputs);
    if (!model) {
        const Vector packed = pack_sogp(params);
        throw IllConditionedModel("SOGP covariance is not positive definite after maximum jitter",
                                  std::vector<double>(packed.data(), packed.data() + packed.size()));
    }
    return std::move(*model);
}

double sogp_nlml(const Dataset& data, const SogpParams& params) {
    const CholeskyModel chol = factor_sogp(data, params);
    return 0.5 * chol.data_fit() + 0.5 * chol.log_determinant() + 0.5 * data.size() * kLogTwoPi;
}

NlmlValue sogp_nlml_with_gradient(const Dataset& data, const SogpParams& params) {
    const CholeskyModel chol = factor_sogp(data, params);
    const int n = data.size();
    const int d = data.dimension();
    NlmlValue result;
    result.value = 0.5 * chol.data_fit() + 0.5 * chol.log_determinant() + 0.5 * n * kLogTwoPi;

    // dNLML/dtheta = 0.5 tr((K^-1 - a a^T) dK/dtheta)
    Matrix w = chol.inverse();
    w.noalias() -= chol.alpha() * chol.alpha().transpose();

    result.gradient = Vector::Zero(d + 2);
    const Vector inv_sq = params.lengthscales.array().square().inverse().matrix();
    double signal_term = 0.0;
    for (int i = 0; i < n; ++i) {
        signal_term += 0.5 * w(i, i) * params.signal_variance;
        for (int j = 0; j < i; ++j) {
            double scaled = 0.0;
            for (int h = 0; h < d; ++h) {
                const double diff = data.inputs(i, h) - data.inputs(j, h);
                scaled += diff * diff * inv_sq[h];
            }
            const double k = params.signal_variance * std::exp(-0.5 * scaled);
            const double wk = w(i, j) * k;  // symmetric pair counted twice, times 0.5
            signal_term += wk;
            for (int h = 0; h < d; ++h) {
                const double diff = data.inputs(i, h) - data.inputs(j, h);
                result.gradient[h] += wk * diff * diff * inv_sq[h];
            }
        }
    }
    result.gradient[d] = signal_term;
    result.gradient[d + 1] = 0.5 * params.noise_variance * w.trace();
    return result;
}

SogpParams fit_sogp(const Dataset& data, const FitConfig& config, Rng& rng, std::span<const SogpParams> extra_starts) {
    const Dataset unique = deduplicate(data);
    if (unique.size() < 2) {
        throw ContractViolation("fit_sogp: need at least two distinct training inputs");
    }
    const int d = unique.dimension();
    const LogBox box = sogp_log_box(d, config);

    std::vector<Vector> starts;
    if (config.include_default_start) {
        SogpParams initial{Vector::Constant(d, 0.5), 1.0, 1e-4};
        starts.push_back(pack_sogp(initial));
    }
    for (const auto& start : extra_starts) {
        require(start.dimension() == d, "fit_sogp: start point has wrong dimension");
        starts.push_back(pack_sogp(start));
    }
    const auto& b = config.bounds;
    for (int s = 0; s < config.starts; ++s) {
        Vector packed(d + 2);
        for (int h = 0; h < d; ++h) {
            packed[h] = log_uniform(rng, std::max(b.lengthscale.lower, 0.05), std::min(b.lengthscale.upper, 2.0));
        }
        packed[d] = log_uniform(rng, std::max(b.signal_variance.lower, 0.2), std::min(b.signal_variance.upper, 5.0));
        packed[d + 1] = log_uniform(rng, std::max(b.noise_variance.lower, kNoiseFloor), 1e-2);
        starts.push_back(packed);
    }

    const SmoothObjective objective = [&unique](const Vector& packed, Vector* gradient) {
        try {
            if (gradient == nullptr) {
                return sogp_nlml(unique, unpack_sogp(packed));
            }
            NlmlValue value = sogp_nlml_with_gradient(unique, unpack_sogp(packed));
            *gradient = std::move(value.gradient);
            return value.value;
        } catch (const IllConditionedModel&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    QuasiNewtonOptions options;
    options.max_iterations = config.max_iterations;
    options.gradient_tolerance = config.gradient_tolerance;

    Vector best;
    double best_value = std::numeric_limits<double>::infinity();
    Vector last_tried;
    for (const Vector& start : starts) {
        last_tried = start.cwiseMax(box.lower).cwiseMin(box.upper);
        const LocalResult local = minimize_quasi_newton(objective, last_tried, box.lower, box.upper, options);
        if (local.value < best_value) {
            best_value = local.value;
            best = local.x;
        }
    }
    if (!std::isfinite(best_value)) {
        throw IllConditionedModel("fit_sogp: every start failed to factorize",
                                  std::vector<double>(last_tried.data(), last_tried.data() + last_tried.size()));
    }
    return unpack_sogp(best);
}

SogpModel::SogpModel(const Dataset& data, SogpParams params)
    : data_(deduplicate(data)), params_(std::move(params)), cholesky_(factor_sogp(data_, params_)) {}

SogpModel SogpModel::fit(const Dataset& data, const FitConfig& config, Rng& rng,
                         std::span<const SogpParams> extra_starts) {
    return SogpModel(data, fit_sogp(data, config, rng, extra_starts));
}

Posterior SogpModel::predict(const Eigen::Ref<const Vector>& x) const {
    if (x.size() != data_.dimension()) {
        throw ContractViolation("SogpModel::predict: dimension mismatch");
    }
    const Vector k = params_.signal_variance * correlation_vector(x, data_.inputs, params_.lengthscales);
    const double mean = k.dot(cholesky_.alpha());
    const Vector v = cholesky_.half_solve(k);
    const double reduced = std::max(params_.signal_variance - v.squaredNorm(), 0.0);
    return Posterior{mean, reduced + params_.noise_variance};
}

}  // namespace clbo
